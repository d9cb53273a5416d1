#pragma once

// Planning and decision procedures: value iteration, finite-horizon policy
// evaluation and exhaustive policy-tree search for POMDPs and quantum
// observable models, support-level dynamics, and the two goal-reachability
// procedures (a decider for classical goal POMDPs, a bounded semi-decision
// procedure for quantum goal models).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "dproc/classical.hpp"
#include "dproc/quantum.hpp"
#include "dproc/reductions.hpp"
#include "dproc/rng.hpp"

namespace dproc::solvers {

using dproc::numerics::ToleranceConfig;

// Finite-horizon contingency plan: take `action`, then on observation o
// (1-based) continue with the child keyed o.  A node with no children ends
// the horizon; a node with children must cover every observation branch of
// positive probability.
struct PolicyTree {
    std::size_t action = 0;
    std::vector<std::pair<std::size_t, PolicyTree>> children;  // (observation, subtree)
};

std::size_t policy_tree_depth(const PolicyTree& tree);

// Maps each state index of some finite state set to an action index.
struct StationaryPolicy {
    std::vector<std::size_t> action_for_state;
};

// Bit-vector over hidden states: bit set iff the belief puts positive mass on
// that state.  The all-zero vector is not a valid support.
struct SupportState {
    std::vector<bool> bits;

    bool operator==(const SupportState& other) const { return bits == other.bits; }
    bool operator<(const SupportState& other) const { return bits < other.bits; }
};

// Support of a belief: bit i set iff probs[i] > 0 exactly (clamping during
// belief construction already maps roundoff negatives to exact zeros).
SupportState support_of(const classical::Belief& b);

enum class Decision { yes, no, unknown };

// Outcome of a reachability procedure.  A classical "yes" carries a policy
// over the discovered supports (witness indexes into `supports`); a quantum
// "yes" carries an action sequence with 1-based entries.  `bound_used` is the
// search depth that ran out on "unknown".
struct ReachabilityVerdict {
    Decision decided = Decision::unknown;
    std::optional<StationaryPolicy> witness;
    std::vector<SupportState> supports;
    std::optional<reductions::ActionSequence> sequence_witness;
    std::size_t bound_used = 0;
    std::size_t nodes_expanded = 0;
};

struct ValueIterationResult {
    std::vector<double> values;
    StationaryPolicy greedy;
    std::size_t sweeps = 0;
};

// Iterates the Bellman operator until the max-norm residual of the returned
// values is at most epsilon, then extracts the greedy policy with
// lowest-index tie-breaking.  Requires epsilon > 0 and gamma < 1.
ValueIterationResult value_iteration(const classical::Mdp& m, double epsilon);

// Finite-horizon value of a stationary policy: V(h) = R + gamma * T * V(h-1)
// with V(0) = 0, so horizon 1 is the immediate reward.
std::vector<double> mdp_policy_value(const classical::Mdp& m, const StationaryPolicy& pi,
                                     std::size_t horizon);

// Expected discounted reward of a policy tree by exact expectimax from the
// given start, skipping observation branches of probability <= eps_zero.
// Throws MissingChild when a node has children but a positive-probability
// branch has no subtree.
double evaluate_policy_tree(const classical::Pomdp& p, const classical::Belief& start,
                            const PolicyTree& tree, std::size_t max_depth = 64,
                            const ToleranceConfig& tol = {});
double evaluate_policy_tree(const classical::Pomdp& p, const PolicyTree& tree,
                            std::size_t max_depth = 64, const ToleranceConfig& tol = {});
double evaluate_policy_tree(const quantum::Qomdp& q, const quantum::DensityMatrix& start,
                            const PolicyTree& tree, std::size_t max_depth = 64,
                            const ToleranceConfig& tol = {});
double evaluate_policy_tree(const quantum::Qomdp& q, const PolicyTree& tree,
                            std::size_t max_depth = 64, const ToleranceConfig& tol = {});

struct BestPolicyResult {
    double value = 0.0;
    PolicyTree tree;
    std::size_t nodes_expanded = 0;
};

// Exact optimum over all depth-`horizon` policy trees by depth-first search
// (memory linear in depth), ties broken by the lowest action index at every
// node.  Throws BudgetExceeded when more than node_budget search nodes are
// expanded.
BestPolicyResult best_policy_value(const classical::Pomdp& p, const classical::Belief& start,
                                   std::size_t horizon, std::size_t node_budget = 1000000,
                                   const ToleranceConfig& tol = {});
BestPolicyResult best_policy_value(const classical::Pomdp& p, std::size_t horizon,
                                   std::size_t node_budget = 1000000,
                                   const ToleranceConfig& tol = {});
BestPolicyResult best_policy_value(const quantum::Qomdp& q, const quantum::DensityMatrix& start,
                                   std::size_t horizon, std::size_t node_budget = 1000000,
                                   const ToleranceConfig& tol = {});
BestPolicyResult best_policy_value(const quantum::Qomdp& q, std::size_t horizon,
                                   std::size_t node_budget = 1000000,
                                   const ToleranceConfig& tol = {});

// Whether some depth-`horizon` policy tree achieves at least v_threshold
// (minus eps_zero slack) from the model's start.
bool policy_exists(const classical::Pomdp& p, std::size_t horizon, double v_threshold,
                   std::size_t node_budget = 1000000, const ToleranceConfig& tol = {});
bool policy_exists(const quantum::Qomdp& q, std::size_t horizon, double v_threshold,
                   std::size_t node_budget = 1000000, const ToleranceConfig& tol = {});

// One step of the support-level dynamics: the support of the posterior after
// acting with a and observing o (1-based) from any belief supported on z.
// Returns nothing when the observation is infeasible from z.  Uses the
// support pattern of the one-step update matrix (entries > eps_structural).
std::optional<SupportState> support_update(const classical::GoalPomdp& p, const SupportState& z,
                                           std::size_t a, std::size_t o,
                                           const ToleranceConfig& tol = {});

// Decides goal reachability exactly: builds the reachable support states by
// breadth-first closure, then tests every stationary deterministic policy
// over them.  A policy is accepting when the goal support is reachable from
// the start support and no cycle among non-goal supports is reachable (the
// absorbing goal's self-loop does not count).  Always returns yes or no;
// throws StateBudgetExceeded if the closure grows past max_states.
ReachabilityVerdict decide_goal_reachability_pomdp(const classical::GoalPomdp& p,
                                                   std::size_t max_states = (1u << 20),
                                                   const ToleranceConfig& tol = {});

// Bounded semi-decision procedure for quantum goal reachability: searches
// action sequences of length <= depth whose every positive-probability branch
// collapses to the goal state (tracking at most one surviving non-goal
// branch).  Returns yes with the 1-based sequence witness, or unknown with
// bound_used = depth.  Never returns no: the unbounded problem admits no
// such answer.
ReachabilityVerdict decide_goal_reachability_qomdp_bounded(const quantum::GoalQomdp& q,
                                                           std::size_t depth,
                                                           const ToleranceConfig& tol = {});

struct EstimateResult {
    double probability = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;
};

// Monte Carlo estimate of the probability that the hidden state is the goal
// within `steps` steps, acting with the support-level policy lifted to
// beliefs (look up the current belief's support in `supports`).  Each trial
// draws its own generator from the master seed by trial index.
EstimateResult estimate_goal_probability(const classical::GoalPomdp& p,
                                         const std::vector<SupportState>& supports,
                                         const StationaryPolicy& policy, std::size_t steps,
                                         std::size_t trials, std::uint64_t seed,
                                         const ToleranceConfig& tol = {});

// Open-loop variant: drive hidden-state trajectories with a fixed action
// sequence (1-based entries), ignoring observations.
EstimateResult estimate_goal_probability(const classical::GoalPomdp& p,
                                         const reductions::ActionSequence& seq, std::size_t steps,
                                         std::size_t trials, std::uint64_t seed,
                                         const ToleranceConfig& tol = {});

// Same, for a quantum goal model driven by an action sequence (1-based
// entries; steps beyond the sequence leave the state unchanged).
EstimateResult estimate_goal_probability(const quantum::GoalQomdp& q,
                                         const reductions::ActionSequence& seq, std::size_t steps,
                                         std::size_t trials, std::uint64_t seed,
                                         const ToleranceConfig& tol = {});

}  // namespace dproc::solvers
