#include "dproc/quantum.hpp"

#include <cmath>
#include <sstream>

namespace dproc::quantum {

namespace {

using numerics::eig_hermitian;
using numerics::is_hermitian;
using numerics::max_abs_diff;

ComplexMatrix conjugate_by(const ComplexMatrix& a, const ComplexMatrix& rho) {
    return a * rho * a.adjoint();
}

void require_kraus_index(const Superoperator& action, std::size_t i) {
    if (i < 1 || i > action.kraus.size()) {
        std::ostringstream os;
        os << "Kraus index " << i << " out of range 1.." << action.kraus.size();
        throw IndexOutOfRange(os.str());
    }
}

void require_state_shape(const DensityMatrix& rho, const Superoperator& action) {
    if (action.kraus.empty()) throw DimensionMismatch("superoperator has no Kraus matrices");
    if (action.kraus.front().rows() != rho.dim()) {
        std::ostringstream os;
        os << "state dimension " << rho.dim() << " does not match action dimension "
           << action.kraus.front().rows();
        throw DimensionMismatch(os.str());
    }
}

// Raw (unclamped) branch trace Tr(A_i rho A_i^dag).
double branch_trace(const DensityMatrix& rho, const Superoperator& action, std::size_t i) {
    return conjugate_by(action.kraus[i - 1], rho.mat()).trace().real();
}

}  // namespace

DensityMatrix::DensityMatrix(ComplexMatrix mat, const ToleranceConfig& tol, bool check_psd)
    : mat_(std::move(mat)) {
    std::vector<Violation> violations = check(mat_, tol, check_psd);
    if (!violations.empty()) {
        throw ValidationError("invalid density matrix", std::move(violations));
    }
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
    ComplexMatrix m = ComplexMatrix::identity(dim);
    m *= Complex(1.0 / static_cast<double>(dim), 0.0);
    return DensityMatrix(std::move(m), {}, false);
}

DensityMatrix DensityMatrix::basis_state(std::size_t dim, std::size_t index) {
    if (index >= dim) throw IndexOutOfRange("basis_state: index outside dimension");
    return DensityMatrix(ComplexMatrix::unit(dim, index, index), {}, false);
}

std::vector<Violation> DensityMatrix::check(const ComplexMatrix& mat, const ToleranceConfig& tol,
                                            bool check_psd) {
    std::vector<Violation> out;
    if (!mat.square()) {
        out.push_back({"density matrix square", 0.0});
        return out;
    }
    if (!mat.all_finite()) {
        out.push_back({"density matrix finite", 0.0});
        return out;
    }
    const double herm_dev = max_abs_diff(mat, mat.adjoint());
    if (herm_dev > tol.eps_structural) {
        out.push_back({"density matrix hermitian", herm_dev});
    }
    const double trace_dev = std::abs(mat.trace() - Complex(1.0, 0.0));
    if (trace_dev > tol.eps_structural) {
        out.push_back({"density matrix unit trace", trace_dev});
    }
    if (check_psd && herm_dev <= tol.eps_structural) {
        const auto eig = eig_hermitian(mat, tol);
        if (eig.eigenvalues.front() < -tol.eps_structural) {
            out.push_back({"density matrix psd", -eig.eigenvalues.front()});
        }
    }
    return out;
}

bool approx_equal(const DensityMatrix& a, const DensityMatrix& b, double eps) {
    if (a.dim() != b.dim()) return false;
    return max_abs_diff(a.mat(), b.mat()) <= eps;
}

CompletenessReport validate_superoperator(const std::vector<ComplexMatrix>& kraus,
                                          const ToleranceConfig& tol) {
    if (kraus.empty()) throw DimensionMismatch("validate_superoperator: no Kraus matrices");
    const std::size_t d = kraus.front().rows();
    for (const ComplexMatrix& k : kraus) {
        if (!k.square() || k.rows() != d) {
            throw DimensionMismatch("validate_superoperator: matrices differ in shape");
        }
    }
    ComplexMatrix sum(d, d);
    for (const ComplexMatrix& k : kraus) sum += k.adjoint() * k;

    CompletenessReport report;
    const ComplexMatrix eye = ComplexMatrix::identity(d);
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            const double dev = std::abs(sum.at(r, c) - eye.at(r, c));
            if (dev > report.max_deviation) {
                report.max_deviation = dev;
                report.worst_row = r;
                report.worst_col = c;
            }
        }
    }
    report.complete = report.max_deviation <= tol.eps_structural;
    return report;
}

namespace {

void check_actions(const std::vector<Superoperator>& actions, std::size_t dim, std::size_t num_obs,
                   const ToleranceConfig& tol, std::vector<Violation>& out) {
    if (actions.empty()) {
        out.push_back({"at least one action", 0.0});
        return;
    }
    for (std::size_t a = 0; a < actions.size(); ++a) {
        const Superoperator& action = actions[a];
        std::ostringstream label;
        label << "action " << a;
        if (action.kraus.size() != num_obs) {
            out.push_back({label.str() + " kraus count equals num_obs",
                           static_cast<double>(action.kraus.size() > num_obs
                                                   ? action.kraus.size() - num_obs
                                                   : num_obs - action.kraus.size())});
            continue;
        }
        bool shapes_ok = true;
        for (const ComplexMatrix& k : action.kraus) {
            if (!k.square() || k.rows() != dim || !k.all_finite()) shapes_ok = false;
        }
        if (!shapes_ok) {
            out.push_back({label.str() + " kraus shapes", 0.0});
            continue;
        }
        const CompletenessReport report = validate_superoperator(action.kraus, tol);
        if (!report.complete) {
            out.push_back({label.str() + " completeness", report.max_deviation});
        }
    }
}

void check_state_dim(const DensityMatrix& rho, std::size_t dim, const char* label,
                     std::vector<Violation>& out) {
    if (rho.dim() != dim) {
        out.push_back({std::string(label) + " dimension matches model", 0.0});
    }
}

}  // namespace

std::vector<Violation> validate_qomdp(const Qomdp& q, const ToleranceConfig& tol) {
    std::vector<Violation> out;
    if (q.dim < 1) out.push_back({"dim at least 1", 0.0});
    if (q.num_obs < 1) out.push_back({"num_obs at least 1", 0.0});
    check_actions(q.actions, q.dim, q.num_obs, tol, out);
    if (q.rewards.size() != q.actions.size()) {
        out.push_back({"one reward operator per action", 0.0});
    }
    for (std::size_t a = 0; a < q.rewards.size(); ++a) {
        const ComplexMatrix& r = q.rewards[a];
        if (!r.square() || r.rows() != q.dim) {
            std::ostringstream label;
            label << "reward " << a << " shape";
            out.push_back({label.str(), 0.0});
            continue;
        }
        const double dev = max_abs_diff(r, r.adjoint());
        if (dev > tol.eps_structural) {
            std::ostringstream label;
            label << "reward " << a << " hermitian";
            out.push_back({label.str(), dev});
        }
    }
    if (!(q.gamma >= 0.0 && q.gamma < 1.0)) {
        out.push_back({"gamma in [0, 1)", q.gamma < 0.0 ? -q.gamma : q.gamma - 1.0});
    }
    check_state_dim(q.rho0, q.dim, "rho0", out);
    for (const Violation& v : DensityMatrix::check(q.rho0.mat(), tol)) {
        out.push_back({"rho0 " + v.invariant, v.deviation});
    }
    return out;
}

std::vector<Violation> validate_goal_qomdp(const GoalQomdp& q, const ToleranceConfig& tol) {
    std::vector<Violation> out;
    if (q.dim < 1) out.push_back({"dim at least 1", 0.0});
    if (q.num_obs < 1) out.push_back({"num_obs at least 1", 0.0});
    check_actions(q.actions, q.dim, q.num_obs, tol, out);
    check_state_dim(q.rho0, q.dim, "rho0", out);
    for (const Violation& v : DensityMatrix::check(q.rho0.mat(), tol)) {
        out.push_back({"rho0 " + v.invariant, v.deviation});
    }
    check_state_dim(q.rho_g, q.dim, "rho_g", out);
    for (const Violation& v : DensityMatrix::check(q.rho_g.mat(), tol)) {
        out.push_back({"rho_g " + v.invariant, v.deviation});
    }
    if (out.empty()) {
        AbsorbingReport report = is_absorbing_goal(q, tol);
        for (Violation& v : report.violations) out.push_back(std::move(v));
    }
    return out;
}

double observation_prob(const DensityMatrix& rho, const Superoperator& action, std::size_t i,
                        const ToleranceConfig& tol) {
    require_state_shape(rho, action);
    require_kraus_index(action, i);
    const double t = branch_trace(rho, action, i);
    if (t < -tol.eps_structural || t > 1.0 + tol.eps_structural) {
        std::ostringstream os;
        os << "observation probability " << t << " outside [0, 1] beyond eps_structural";
        throw Error(os.str());
    }
    if (t < 0.0) return 0.0;
    if (t > 1.0) return 1.0;
    return t;
}

DensityMatrix evolve(const DensityMatrix& rho, const Superoperator& action, std::size_t i,
                     const ToleranceConfig& tol) {
    require_state_shape(rho, action);
    require_kraus_index(action, i);
    const ComplexMatrix& k = action.kraus[i - 1];
    ComplexMatrix next = conjugate_by(k, rho.mat());
    const double t = next.trace().real();
    if (t <= tol.eps_zero) {
        std::ostringstream os;
        os << "branch " << i << " has probability " << t << " <= eps_zero";
        throw ZeroProbabilityBranch(os.str());
    }
    next *= Complex(1.0 / t, 0.0);
    // Conjugation of a PSD state is PSD; skip the eigendecomposition.
    return DensityMatrix(std::move(next), tol, false);
}

double reward(const DensityMatrix& rho, const ComplexMatrix& r_op, const ToleranceConfig& tol) {
    if (!r_op.square() || r_op.rows() != rho.dim()) {
        throw DimensionMismatch("reward: operator dimension does not match state");
    }
    const double herm_dev = max_abs_diff(r_op, r_op.adjoint());
    if (herm_dev > tol.eps_structural) {
        std::ostringstream os;
        os << "reward operator is not Hermitian (deviation " << herm_dev << ")";
        throw NonHermitianReward(os.str());
    }
    const Complex t = (rho.mat() * r_op).trace();
    if (std::abs(t.imag()) > tol.eps_structural) {
        std::ostringstream os;
        os << "reward trace has imaginary part " << t.imag();
        throw Error(os.str());
    }
    return t.real();
}

SampleStepResult sample_step(const DensityMatrix& rho, const Superoperator& action, SplitRng rng,
                             const ToleranceConfig& tol) {
    require_state_shape(rho, action);
    std::vector<double> probs(action.kraus.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        probs[i] = observation_prob(rho, action, i + 1, tol);
        sum += probs[i];
    }
    if (std::abs(sum - 1.0) > tol.eps_structural) {
        std::ostringstream os;
        os << "branch probabilities sum to " << sum << ", not 1 within eps_structural";
        throw Error(os.str());
    }
    // Branches at or below eps_zero are unobservable; drop them so the drawn
    // branch always survives evolve, and renormalize the rest.
    double kept = 0.0;
    for (double& p : probs) {
        if (p <= tol.eps_zero) p = 0.0;
        kept += p;
    }
    for (double& p : probs) p /= kept;
    const std::size_t index = sample_categorical(probs, rng);
    DensityMatrix next = evolve(rho, action, index + 1, tol);
    return SampleStepResult{index + 1, std::move(next), std::move(rng)};
}

AbsorbingReport is_absorbing_goal(const GoalQomdp& q, const ToleranceConfig& tol) {
    AbsorbingReport report;
    for (std::size_t a = 0; a < q.actions.size(); ++a) {
        const Superoperator& action = q.actions[a];
        for (std::size_t j = 1; j <= action.kraus.size(); ++j) {
            const double t = branch_trace(q.rho_g, action, j);
            if (t <= tol.eps_zero) continue;
            ComplexMatrix next = conjugate_by(action.kraus[j - 1], q.rho_g.mat());
            next *= Complex(1.0 / t, 0.0);
            const double dev = max_abs_diff(next, q.rho_g.mat());
            if (dev > tol.eps_zero) {
                std::ostringstream label;
                label << "absorbing goal: action " << a << " observation " << j;
                report.violations.push_back({label.str(), dev});
            }
        }
    }
    report.absorbing = report.violations.empty();
    return report;
}

}  // namespace dproc::quantum
