#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dproc/errors.hpp"
#include "dproc/numerics.hpp"
#include "dproc/rng.hpp"

namespace dproc::quantum {

using numerics::Complex;
using numerics::ComplexMatrix;
using numerics::ToleranceConfig;

// Hermitian, positive-semidefinite, trace-1 complex matrix: the quantum
// information state.
class DensityMatrix {
  public:
    // Validates on construction: square, finite entries, Hermitian, unit
    // trace, and (when check_psd) positive semidefiniteness, all within tol.
    // Throws ValidationError listing every violated invariant.  Dynamics
    // whose results are PSD by construction (conjugation of a PSD state)
    // pass check_psd = false to skip the eigendecomposition.
    explicit DensityMatrix(ComplexMatrix mat, const ToleranceConfig& tol = {},
                           bool check_psd = true);

    static DensityMatrix maximally_mixed(std::size_t dim);
    // Pure basis state |index><index| (0-based index).
    static DensityMatrix basis_state(std::size_t dim, std::size_t index);

    // Violations of the density-matrix invariants for a candidate matrix;
    // empty result means valid.
    static std::vector<Violation> check(const ComplexMatrix& mat, const ToleranceConfig& tol,
                                        bool check_psd = true);

    std::size_t dim() const { return mat_.rows(); }
    const ComplexMatrix& mat() const { return mat_; }

  private:
    ComplexMatrix mat_;
};

// Entrywise max-norm comparison.
bool approx_equal(const DensityMatrix& a, const DensityMatrix& b, double eps);

// A quantum action: ordered Kraus matrices, addressed by 1-based
// observation index.  Zero matrices are legal members.
struct Superoperator {
    std::size_t dim = 0;
    std::vector<ComplexMatrix> kraus;
};

struct CompletenessReport {
    bool complete = false;
    double max_deviation = 0.0;  // worst entry of |sum K_i^dag K_i - I|
    std::size_t worst_row = 0;   // 0-based location of the worst entry
    std::size_t worst_col = 0;
};

// Checks sum_i K_i^dag K_i = I within tol.eps_structural.  Throws
// DimensionMismatch if the matrices are not square or differ in shape.
CompletenessReport validate_superoperator(const std::vector<ComplexMatrix>& kraus,
                                          const ToleranceConfig& tol = {});

struct Qomdp {
    std::size_t dim = 0;
    std::size_t num_obs = 0;
    std::vector<Superoperator> actions;  // each with exactly num_obs Kraus matrices
    std::vector<ComplexMatrix> rewards;  // Hermitian operator R_a per action
    double gamma = 0.0;                  // discount, in [0, 1)
    DensityMatrix rho0;
};

struct GoalQomdp {
    std::size_t dim = 0;
    std::size_t num_obs = 0;
    std::vector<Superoperator> actions;
    DensityMatrix rho0;
    DensityMatrix rho_g;
};

// Full invariant sweep used by model loading; empty result means valid.
// validate_goal_qomdp includes the absorbing-goal property.
std::vector<Violation> validate_qomdp(const Qomdp& q, const ToleranceConfig& tol = {});
std::vector<Violation> validate_goal_qomdp(const GoalQomdp& q, const ToleranceConfig& tol = {});

// Tr(A_i rho A_i^dag) for 1-based Kraus index i, clamped to [0, 1].  Traces
// outside [-eps_structural, 1 + eps_structural] raise Error (corrupted
// model rather than roundoff).
double observation_prob(const DensityMatrix& rho, const Superoperator& action, std::size_t i,
                        const ToleranceConfig& tol = {});

// A_i rho A_i^dag / Tr(A_i rho A_i^dag) for 1-based Kraus index i.  Throws
// ZeroProbabilityBranch when the trace is <= eps_zero.
DensityMatrix evolve(const DensityMatrix& rho, const Superoperator& action, std::size_t i,
                     const ToleranceConfig& tol = {});

// Tr(rho R) for a Hermitian operator R; the vanishing imaginary part is
// discarded after a sanity check.
double reward(const DensityMatrix& rho, const ComplexMatrix& r_op,
              const ToleranceConfig& tol = {});

struct SampleStepResult {
    std::size_t observation;  // 1-based Kraus index
    DensityMatrix next;
    SplitRng rng;
};

// Draws an observation by inverse CDF over the Kraus order and returns the
// conditioned state.  Branch probabilities <= eps_zero are treated as zero
// (so the drawn branch can always be evolved); the raw probabilities must
// sum to 1 within eps_structural or Error is raised.
SampleStepResult sample_step(const DensityMatrix& rho, const Superoperator& action, SplitRng rng,
                             const ToleranceConfig& tol = {});

struct AbsorbingReport {
    bool absorbing = false;
    std::vector<Violation> violations;
};

// Verifies that every positive-probability branch out of rho_g lands back
// on rho_g (within eps_zero).
AbsorbingReport is_absorbing_goal(const GoalQomdp& q, const ToleranceConfig& tol = {});

}  // namespace dproc::quantum
