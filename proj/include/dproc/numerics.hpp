#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dproc/errors.hpp"

namespace dproc::numerics {

using Complex = std::complex<double>;

// Tolerances used throughout the library. Comparisons are absolute; all
// model-derived matrix entries are bounded by 1 in magnitude.
struct ToleranceConfig {
    double eps_structural = 1e-9;  // invariant validation (Hermitian symmetry, completeness, row sums)
    double eps_zero = 1e-8;        // "is this trace/probability zero" decisions
    double eps_eig = 1e-12;        // eigensolver off-diagonal convergence

    // Throws Error if any tolerance is non-positive. Returns a warning string
    // when the recommended ordering eps_eig <= eps_structural <= eps_zero does
    // not hold, std::nullopt otherwise.
    std::optional<std::string> check() const;
};

// Dense complex matrix, row-major.
class ComplexMatrix {
  public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), entries_(rows * cols, Complex(0.0, 0.0)) {}

    static ComplexMatrix identity(std::size_t n);
    // n x n matrix with a single 1 at (r, c).
    static ComplexMatrix unit(std::size_t n, std::size_t r, std::size_t c);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_ && rows_ > 0; }

    Complex& at(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
    const Complex& at(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

    const std::vector<Complex>& entries() const { return entries_; }

    ComplexMatrix adjoint() const;
    Complex trace() const;
    double max_abs() const;
    bool all_finite() const;

    ComplexMatrix& operator+=(const ComplexMatrix& other);
    ComplexMatrix& operator-=(const ComplexMatrix& other);
    ComplexMatrix& operator*=(Complex scalar);

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> entries_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex scalar, ComplexMatrix m);

// max_{ij} |a_ij - b_ij|; throws DimensionMismatch on shape disagreement.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

bool is_hermitian(const ComplexMatrix& m, double eps);

struct EigResult {
    std::vector<double> eigenvalues;  // ascending
    ComplexMatrix eigenvectors;       // orthonormal columns, column j pairs with eigenvalues[j]
};

// Cyclic Jacobi eigendecomposition of a Hermitian matrix. The input must be
// Hermitian within tol.eps_structural; iteration stops once the off-diagonal
// Frobenius norm drops below tol.eps_eig (cap: 100 sweeps).
EigResult eig_hermitian(const ComplexMatrix& m, const ToleranceConfig& tol = {});

// True iff m is Hermitian within eps_structural and its smallest eigenvalue is
// >= -eps_structural. Non-Hermitian input returns false rather than throwing.
bool is_psd_hermitian(const ComplexMatrix& m, const ToleranceConfig& tol = {});

// (d+1)x(d+1) matrix with m in the top-left d x d block, zeros elsewhere.
ComplexMatrix pad_embed(const ComplexMatrix& m);

// Removes the last row and column; throws DimensionTooSmall on 1x1 input.
ComplexMatrix truncate_top_left(const ComplexMatrix& m);

}  // namespace dproc::numerics
