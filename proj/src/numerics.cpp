#include "dproc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dproc::numerics {

std::optional<std::string> ToleranceConfig::check() const {
    if (!(eps_structural > 0.0) || !(eps_zero > 0.0) || !(eps_eig > 0.0)) {
        throw Error("ToleranceConfig: all tolerances must be strictly positive");
    }
    if (eps_eig > eps_structural || eps_structural > eps_zero) {
        std::ostringstream os;
        os << "ToleranceConfig: recommended ordering eps_eig <= eps_structural <= eps_zero "
              "does not hold (eps_eig="
           << eps_eig << ", eps_structural=" << eps_structural << ", eps_zero=" << eps_zero << ")";
        return os.str();
    }
    return std::nullopt;
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::unit(std::size_t n, std::size_t r, std::size_t c) {
    ComplexMatrix m(n, n);
    m.at(r, c) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out.at(c, r) = std::conj(at(r, c));
    return out;
}

Complex ComplexMatrix::trace() const {
    Complex t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += at(i, i);
    return t;
}

double ComplexMatrix::max_abs() const {
    double m = 0.0;
    for (const Complex& z : entries_) m = std::max(m, std::abs(z));
    return m;
}

bool ComplexMatrix::all_finite() const {
    for (const Complex& z : entries_) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
}

namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        std::ostringstream os;
        os << op << ": shapes " << a.rows() << "x" << a.cols() << " and " << b.rows() << "x"
           << b.cols() << " do not agree";
        throw DimensionMismatch(os.str());
    }
}

}  // namespace

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
    require_same_shape(*this, other, "matrix add");
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += other.entries_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
    require_same_shape(*this, other, "matrix subtract");
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= other.entries_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scalar) {
    for (Complex& z : entries_) z *= scalar;
    return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) {
        std::ostringstream os;
        os << "matrix multiply: " << a.rows() << "x" << a.cols() << " times " << b.rows() << "x"
           << b.cols();
        throw DimensionMismatch(os.str());
    }
    ComplexMatrix out(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Complex ark = a.at(r, k);
            if (ark == Complex(0.0, 0.0)) continue;
            for (std::size_t c = 0; c < b.cols(); ++c) out.at(r, c) += ark * b.at(k, c);
        }
    }
    return out;
}

ComplexMatrix operator*(Complex scalar, ComplexMatrix m) { return m *= scalar; }

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) m = std::max(m, std::abs(a.at(r, c) - b.at(r, c)));
    return m;
}

bool is_hermitian(const ComplexMatrix& m, double eps) {
    if (!m.square()) return false;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = r; c < m.cols(); ++c) {
            if (std::abs(m.at(r, c) - std::conj(m.at(c, r))) > eps) return false;
        }
    }
    return true;
}

namespace {

double off_diagonal_norm(const ComplexMatrix& m) {
    double sum = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (r == c) continue;
            sum += std::norm(m.at(r, c));
        }
    }
    return std::sqrt(sum);
}

constexpr int kMaxSweeps = 100;

}  // namespace

EigResult eig_hermitian(const ComplexMatrix& m, const ToleranceConfig& tol) {
    if (!m.square()) throw DimensionMismatch("eig_hermitian: matrix must be square");
    if (!is_hermitian(m, tol.eps_structural)) {
        throw NotHermitian("eig_hermitian: input is not Hermitian within eps_structural");
    }

    const std::size_t n = m.rows();
    ComplexMatrix a = m;
    // Force exact Hermitian symmetry so the rotations stay consistent.
    for (std::size_t r = 0; r < n; ++r) {
        a.at(r, r) = Complex(a.at(r, r).real(), 0.0);
        for (std::size_t c = r + 1; c < n; ++c) {
            Complex avg = 0.5 * (a.at(r, c) + std::conj(a.at(c, r)));
            a.at(r, c) = avg;
            a.at(c, r) = std::conj(avg);
        }
    }
    ComplexMatrix v = ComplexMatrix::identity(n);

    bool converged = n < 2;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const Complex apq = a.at(p, q);
                const double r = std::abs(apq);
                if (r < 1e-300) continue;
                const double app = a.at(p, p).real();
                const double aqq = a.at(q, q).real();

                // Unitary plane rotation that zeroes a_pq. The phase factor
                // reduces the 2x2 block to the real symmetric case.
                const Complex phase = apq / r;
                const double beta = (app - aqq) / (2.0 * r);
                // Smaller-magnitude root of t^2 - 2*beta*t - 1 = 0.
                double t;
                if (beta >= 0.0) {
                    t = -1.0 / (beta + std::sqrt(beta * beta + 1.0));
                } else {
                    t = 1.0 / (-beta + std::sqrt(beta * beta + 1.0));
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                const Complex upq = s * phase;             // U[p][q]
                const Complex uqp = -s * std::conj(phase); // U[q][p]

                // A <- U^dag A U, touching only rows/cols p and q.
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const Complex akp = a.at(k, p);
                    const Complex akq = a.at(k, q);
                    a.at(k, p) = c * akp + uqp * akq;
                    a.at(k, q) = upq * akp + c * akq;
                    a.at(p, k) = std::conj(a.at(k, p));
                    a.at(q, k) = std::conj(a.at(k, q));
                }
                const double new_pp = c * c * app + s * s * aqq - 2.0 * c * s * r;
                const double new_qq = s * s * app + c * c * aqq + 2.0 * c * s * r;
                a.at(p, p) = Complex(new_pp, 0.0);
                a.at(q, q) = Complex(new_qq, 0.0);
                a.at(p, q) = 0.0;
                a.at(q, p) = 0.0;

                // V <- V U.
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex vkp = v.at(k, p);
                    const Complex vkq = v.at(k, q);
                    v.at(k, p) = c * vkp + uqp * vkq;
                    v.at(k, q) = upq * vkp + c * vkq;
                }
            }
        }
        if (off_diagonal_norm(a) < tol.eps_eig) converged = true;
    }
    if (!converged) {
        throw NoConvergence("eig_hermitian: off-diagonal norm not below eps_eig after sweep cap");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return a.at(i, i).real() < a.at(j, j).real();
    });

    EigResult out;
    out.eigenvalues.resize(n);
    out.eigenvectors = ComplexMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.eigenvalues[j] = a.at(order[j], order[j]).real();
        for (std::size_t r = 0; r < n; ++r) out.eigenvectors.at(r, j) = v.at(r, order[j]);
    }
    return out;
}

bool is_psd_hermitian(const ComplexMatrix& m, const ToleranceConfig& tol) {
    if (!m.square()) throw DimensionMismatch("is_psd_hermitian: matrix must be square");
    if (!is_hermitian(m, tol.eps_structural)) return false;
    EigResult eig = eig_hermitian(m, tol);
    return eig.eigenvalues.front() >= -tol.eps_structural;
}

ComplexMatrix pad_embed(const ComplexMatrix& m) {
    if (!m.square()) throw DimensionMismatch("pad_embed: matrix must be square");
    const std::size_t d = m.rows();
    ComplexMatrix out(d + 1, d + 1);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) out.at(r, c) = m.at(r, c);
    return out;
}

ComplexMatrix truncate_top_left(const ComplexMatrix& m) {
    if (!m.square()) throw DimensionMismatch("truncate_top_left: matrix must be square");
    if (m.rows() < 2) throw DimensionTooSmall("truncate_top_left: input is 1x1");
    const std::size_t d = m.rows() - 1;
    ComplexMatrix out(d, d);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) out.at(r, c) = m.at(r, c);
    return out;
}

}  // namespace dproc::numerics
