#include "dproc/reductions.hpp"

#include <cmath>
#include <sstream>

namespace dproc::reductions {

namespace {

using numerics::Complex;
using numerics::eig_hermitian;
using numerics::EigResult;
using numerics::pad_embed;
using numerics::truncate_top_left;
using quantum::Superoperator;
using quantum::validate_superoperator;

void require_sequence(const QmopInstance& s, const ActionSequence& seq) {
    for (std::size_t idx : seq.indices) {
        if (idx < 1 || idx > s.kraus.size()) {
            std::ostringstream os;
            os << "sequence index " << idx << " out of range 1.." << s.kraus.size();
            throw IndexOutOfRange(os.str());
        }
    }
}

// K_{i_n} ... K_{i_1}.
ComplexMatrix sequence_product(const QmopInstance& s, const ActionSequence& seq) {
    ComplexMatrix m = ComplexMatrix::identity(s.dim);
    for (std::size_t idx : seq.indices) m = s.kraus[idx - 1] * m;
    return m;
}

double frobenius_sq(const ComplexMatrix& m) {
    double sum = 0.0;
    for (const Complex& z : m.entries()) sum += std::norm(z);
    return sum;
}

bool product_is_null(const ComplexMatrix& m, const ToleranceConfig& tol) {
    return (m.adjoint() * m).max_abs() <= tol.eps_zero;
}

}  // namespace

std::vector<Violation> validate_qmop(const QmopInstance& s, const ToleranceConfig& tol) {
    std::vector<Violation> out;
    if (s.dim < 1) out.push_back({"dim at least 1", 0.0});
    if (s.kraus.empty()) {
        out.push_back({"at least one Kraus matrix", 0.0});
        return out;
    }
    for (const ComplexMatrix& k : s.kraus) {
        if (!k.square() || k.rows() != s.dim || !k.all_finite()) {
            out.push_back({"kraus shapes", 0.0});
            return out;
        }
    }
    const auto report = validate_superoperator(s.kraus, tol);
    if (!report.complete) {
        out.push_back({"kraus completeness", report.max_deviation});
    }
    return out;
}

GoalQomdp qmop_to_goal_qomdp(const QmopInstance& s, const ToleranceConfig& tol) {
    const auto violations = validate_qmop(s, tol);
    if (!violations.empty()) {
        throw InvalidKraus("qmop_to_goal_qomdp: input fails completeness (deviation " +
                           std::to_string(violations.back().deviation) + ")");
    }
    const std::size_t d = s.dim;
    std::vector<Superoperator> actions;
    actions.reserve(s.kraus.size());
    for (const ComplexMatrix& k : s.kraus) {
        const ComplexMatrix padded = pad_embed(k);
        ComplexMatrix z = ComplexMatrix::identity(d + 1);
        z -= padded.adjoint() * padded;
        const EigResult eig = eig_hermitian(z, tol);

        Superoperator action;
        action.dim = d + 1;
        action.kraus.reserve(d + 2);
        for (std::size_t j = 0; j <= d; ++j) {
            ComplexMatrix a(d + 1, d + 1);
            const double weight = eig.eigenvalues[j];
            if (weight >= tol.eps_structural) {
                const double root = std::sqrt(weight);
                for (std::size_t c = 0; c <= d; ++c) {
                    a.at(d, c) = root * std::conj(eig.eigenvectors.at(c, j));
                }
            }
            action.kraus.push_back(std::move(a));
        }
        action.kraus.push_back(padded);
        actions.push_back(std::move(action));
    }
    return GoalQomdp{d + 1, d + 2, std::move(actions), DensityMatrix::maximally_mixed(d + 1),
                     DensityMatrix::basis_state(d + 1, d)};
}

double nongoal_probability(const QmopInstance& s, const ActionSequence& seq) {
    require_sequence(s, seq);
    const ComplexMatrix m = sequence_product(s, seq);
    const double p = frobenius_sq(m) / static_cast<double>(s.dim + 1);
    if (p < 0.0) return 0.0;
    if (p > 1.0) return 1.0;
    return p;
}

bool qmop_sequence_is_null(const QmopInstance& s, const ActionSequence& seq,
                           const ToleranceConfig& tol) {
    if (seq.indices.empty()) {
        throw EmptySequence("qmop_sequence_is_null: empty sequence (its product is the identity)");
    }
    require_sequence(s, seq);
    return product_is_null(sequence_product(s, seq), tol);
}

namespace {

bool search_prefix(const QmopInstance& s, std::size_t max_len, const SearchOptions& options,
                   const ToleranceConfig& tol, const ComplexMatrix& product,
                   std::vector<std::size_t>& prefix, std::vector<std::size_t>& found) {
    if (!prefix.empty() && product_is_null(product, tol)) {
        found = prefix;
        return true;
    }
    if (prefix.size() == max_len) return false;
    if (options.rank_pruning && !prefix.empty()) {
        const EigResult eig = eig_hermitian(product.adjoint() * product, tol);
        if (eig.eigenvalues.front() > tol.eps_zero) return false;
    }
    for (std::size_t i = 1; i <= s.kraus.size(); ++i) {
        prefix.push_back(i);
        if (search_prefix(s, max_len, options, tol, s.kraus[i - 1] * product, prefix, found)) {
            return true;
        }
        prefix.pop_back();
    }
    return false;
}

}  // namespace

std::optional<ActionSequence> qmop_bounded_search(const QmopInstance& s, std::size_t max_len,
                                                  const SearchOptions& options,
                                                  const ToleranceConfig& tol) {
    if (max_len < 1) throw Error("qmop_bounded_search: max_len must be at least 1");
    std::vector<std::size_t> prefix;
    std::vector<std::size_t> found;
    if (search_prefix(s, max_len, options, tol, ComplexMatrix::identity(s.dim), prefix, found)) {
        return ActionSequence{std::move(found)};
    }
    return std::nullopt;
}

std::vector<DensityMatrix> policy_path(const QmopInstance& s, const ActionSequence& seq,
                                       const ToleranceConfig& tol) {
    require_sequence(s, seq);
    const double start_weight = 1.0 / static_cast<double>(s.dim + 1);
    std::vector<DensityMatrix> path;
    path.reserve(seq.indices.size());
    ComplexMatrix m = ComplexMatrix::identity(s.dim);
    for (std::size_t k = 0; k < seq.indices.size(); ++k) {
        m = s.kraus[seq.indices[k] - 1] * m;
        ComplexMatrix block = m * m.adjoint();
        const double trace = block.trace().real() * start_weight;
        if (trace <= tol.eps_zero) {
            std::ostringstream os;
            os << "non-goal branch extinguished at step " << k + 1;
            throw PathExtinguished(os.str(), k + 1);
        }
        block *= Complex(1.0 / block.trace().real(), 0.0);
        path.emplace_back(pad_embed(block), tol, false);
    }
    return path;
}

Qomdp embed_pomdp(const classical::Pomdp& p, const ToleranceConfig& tol) {
    std::vector<Superoperator> actions;
    actions.reserve(p.num_actions);
    double worst_deviation = 0.0;
    for (std::size_t a = 0; a < p.num_actions; ++a) {
        Superoperator action;
        action.dim = p.num_states;
        for (std::size_t o = 1; o <= p.num_obs; ++o) {
            const ComplexMatrix tau = classical::tau_matrix(p, a, o);
            ComplexMatrix k(p.num_states, p.num_states);
            for (std::size_t i = 0; i < p.num_states; ++i) {
                for (std::size_t j = 0; j < p.num_states; ++j) {
                    const double t = tau.at(i, j).real();
                    k.at(i, j) = t > 0.0 ? std::sqrt(t) : 0.0;
                }
            }
            action.kraus.push_back(std::move(k));
        }
        const auto report = validate_superoperator(action.kraus, tol);
        worst_deviation = std::max(worst_deviation, report.max_deviation);
        actions.push_back(std::move(action));
    }
    if (worst_deviation > tol.eps_structural) {
        std::ostringstream os;
        os << "square-root Kraus family misses completeness by " << worst_deviation;
        throw NotEmbeddable(os.str(), worst_deviation);
    }

    std::vector<ComplexMatrix> rewards;
    rewards.reserve(p.num_actions);
    for (std::size_t a = 0; a < p.num_actions; ++a) {
        ComplexMatrix r(p.num_states, p.num_states);
        for (std::size_t i = 0; i < p.num_states; ++i) r.at(i, i) = p.reward[i][a];
        rewards.push_back(std::move(r));
    }

    ComplexMatrix rho0(p.num_states, p.num_states);
    for (std::size_t i = 0; i < p.num_states; ++i) rho0.at(i, i) = p.b0.probs[i];

    return Qomdp{p.num_states,     p.num_obs, std::move(actions), std::move(rewards),
                 p.gamma,          DensityMatrix(std::move(rho0), tol, false)};
}

}  // namespace dproc::reductions
