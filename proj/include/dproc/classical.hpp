#pragma once

#include <cstddef>
#include <vector>

#include "dproc/errors.hpp"
#include "dproc/numerics.hpp"
#include "dproc/rng.hpp"

namespace dproc::classical {

using numerics::ComplexMatrix;
using numerics::ToleranceConfig;

// Probability distribution over hidden states.
struct Belief {
    std::vector<double> probs;
};

// Entrywise max-norm comparison; beliefs of different lengths never compare
// equal.
bool approx_equal(const Belief& a, const Belief& b, double eps);

// Clamps roundoff negatives in [-eps_structural, 0) to zero and checks the
// entries sum to 1 within eps_structural; throws ValidationError otherwise.
Belief make_belief(std::vector<double> probs, const ToleranceConfig& tol = {});

struct Mdp {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::vector<std::vector<std::vector<double>>> transition;  // [s][a][s']
    std::vector<std::vector<double>> reward;                   // [s][a]
    double gamma = 0.0;
};

struct GoalMdp {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::vector<std::vector<std::vector<double>>> transition;  // [s][a][s']
    std::size_t goal = 0;
};

// Shared shape of a POMDP: everything except reward structure.  Belief and
// support operations need only this part, so they accept goal models too.
struct PomdpCore {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::size_t num_obs = 0;
    std::vector<std::vector<std::vector<double>>> transition;   // [s][a][s']
    std::vector<std::vector<std::vector<double>>> observation;  // [s'][a][o]
    Belief b0;
};

struct Pomdp : PomdpCore {
    std::vector<std::vector<double>> reward;  // [s][a]
    double gamma = 0.0;
};

struct GoalPomdp : PomdpCore {
    std::size_t goal = 0;  // 0-based; the goal observation is always the last index
};

std::vector<Violation> validate_mdp(const Mdp& m, const ToleranceConfig& tol = {});
std::vector<Violation> validate_goal_mdp(const GoalMdp& m, const ToleranceConfig& tol = {});
std::vector<Violation> validate_pomdp(const Pomdp& p, const ToleranceConfig& tol = {});
std::vector<Violation> validate_goal_pomdp(const GoalPomdp& p, const ToleranceConfig& tol = {});

// The |S| x |S| matrix with (tau^{ao})_{ij} = O(s_i, a, o) T(s_j, a, s_i),
// so that the unnormalized belief after action a and observation o is
// tau^{ao} b.  The observation index o is 1-based.
ComplexMatrix tau_matrix(const PomdpCore& p, std::size_t a, std::size_t o);

// Pr(o | b, a) = |tau^{ao} b|_1, clamped to [0, 1].  o is 1-based.
double belief_obs_prob(const PomdpCore& p, const Belief& b, std::size_t a, std::size_t o);

// tau^{ao} b / |tau^{ao} b|_1.  Throws ZeroProbabilityObservation when the
// norm is <= eps_zero.  o is 1-based.
Belief belief_update(const PomdpCore& p, const Belief& b, std::size_t a, std::size_t o,
                     const ToleranceConfig& tol = {});

// Sum of Pr(o | b, a) over observations whose posterior equals b_next
// within eps_zero.
double belief_transition_prob(const PomdpCore& p, const Belief& b, std::size_t a,
                              const Belief& b_next, const ToleranceConfig& tol = {});

// sum_i b_i R(s_i, a).
double belief_reward(const Pomdp& p, const Belief& b, std::size_t a);

struct PomdpStepResult {
    std::size_t next_state;   // 0-based hidden state
    std::size_t observation;  // 1-based
    SplitRng rng;
};

// Hidden-state transition then observation emission, both by inverse CDF in
// index order.
PomdpStepResult sample_pomdp_step(const PomdpCore& p, std::size_t hidden_state, std::size_t a,
                                  SplitRng rng);

// Numerical check that the point-mass belief on the goal is absorbing: from
// it, every action yields the goal observation with probability 1 and the
// posterior stays put (within eps_structural).
bool check_goal_belief_absorbing(const GoalPomdp& p, const ToleranceConfig& tol = {});

// Perfect-observation expansion: state s emits its own observation, the
// goal emits the extra final observation.  The start belief is a point mass
// on `start`.
GoalPomdp goal_mdp_to_goal_pomdp(const GoalMdp& m, std::size_t start);

}  // namespace dproc::classical
