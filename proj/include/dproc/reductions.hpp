#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dproc/classical.hpp"
#include "dproc/errors.hpp"
#include "dproc/numerics.hpp"
#include "dproc/quantum.hpp"

namespace dproc::reductions {

using numerics::ComplexMatrix;
using numerics::ToleranceConfig;
using quantum::DensityMatrix;
using quantum::GoalQomdp;
using quantum::Qomdp;

// A superoperator probed for zero-probability measurement sequences.
struct QmopInstance {
    std::size_t dim = 0;               // d
    std::vector<ComplexMatrix> kraus;  // each d x d, sum K_i^dag K_i = I
};

std::vector<Violation> validate_qmop(const QmopInstance& s, const ToleranceConfig& tol = {});

// 1-based Kraus indices i_1..i_n, applied in order (i_1 first).
struct ActionSequence {
    std::vector<std::size_t> indices;
};

// Builds the goal QOMDP whose goal-reaching policies correspond to null
// measurement sequences of s.  Dimension d+1, d+2 observations per action:
// observation d+2 carries the embedded Kraus matrix K_i, observations
// 1..d+1 send everything to the goal state |d+1><d+1| with weights from the
// eigendecomposition of Z^i = I - (K_i + 0)^dag (K_i + 0).  The start state
// is maximally mixed, the goal is |d+1><d+1|.  Throws InvalidKraus if s
// fails completeness.
GoalQomdp qmop_to_goal_qomdp(const QmopInstance& s, const ToleranceConfig& tol = {});

// Tr(M (I_d/(d+1)) M^dag) for M = K_{i_n} ... K_{i_1}: the probability that
// following seq in the constructed goal QOMDP has not reached the goal
// after n steps.
double nongoal_probability(const QmopInstance& s, const ActionSequence& seq);

// True iff K_{i_1}^dag ... K_{i_n}^dag K_{i_n} ... K_{i_1} vanishes
// entrywise within eps_zero.  Throws EmptySequence for an empty sequence.
bool qmop_sequence_is_null(const QmopInstance& s, const ActionSequence& seq,
                           const ToleranceConfig& tol = {});

struct SearchOptions {
    // Skip subtrees whose prefix product has full rank (all eigenvalues of
    // M^dag M above eps_zero).  Never changes whether a null sequence is
    // found, because a null extension of a full-rank prefix contains a null
    // suffix that the search visits on its own; the returned witness may
    // differ from the lexicographically first one, so this is off by
    // default.
    bool rank_pruning = false;
};

// Lexicographically first null sequence of length <= max_len, if any.  A
// null prefix is reported immediately (extensions of a null sequence stay
// null).
std::optional<ActionSequence> qmop_bounded_search(const QmopInstance& s, std::size_t max_len,
                                                  const SearchOptions& options = {},
                                                  const ToleranceConfig& tol = {});

// States sigma_1..sigma_n of the unique surviving non-goal branch when
// following seq in the constructed goal QOMDP.  Throws PathExtinguished(k)
// when the branch dies at step k (1-based).
std::vector<DensityMatrix> policy_path(const QmopInstance& s, const ActionSequence& seq,
                                       const ToleranceConfig& tol = {});

// Quantum model reproducing a classical POMDP on diagonal states, with
// Kraus matrices (K^{ao})_{ij} = sqrt(tau^{ao}_{ij}).  Only POMDPs whose
// candidate families satisfy completeness embed this way (permutation-
// deterministic transitions do); otherwise NotEmbeddable reports the worst
// completeness deviation.
Qomdp embed_pomdp(const classical::Pomdp& p, const ToleranceConfig& tol = {});

}  // namespace dproc::reductions
