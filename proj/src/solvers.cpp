#include "dproc/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <string>

#include "dproc/errors.hpp"

namespace dproc::solvers {

namespace {

using classical::Belief;
using classical::GoalPomdp;
using classical::Mdp;
using classical::Pomdp;
using quantum::DensityMatrix;
using quantum::GoalQomdp;
using quantum::Qomdp;
using reductions::ActionSequence;

void require_policy(const StationaryPolicy& pi, std::size_t num_states,
                    std::size_t num_actions) {
    if (pi.action_for_state.size() != num_states) {
        throw DimensionMismatch("policy covers " + std::to_string(pi.action_for_state.size()) +
                                " states, model has " + std::to_string(num_states));
    }
    for (std::size_t a : pi.action_for_state) {
        if (a >= num_actions) {
            throw IndexOutOfRange("policy action " + std::to_string(a) + " out of range");
        }
    }
}

const PolicyTree* find_child(const PolicyTree& tree, std::size_t observation) {
    for (const auto& [o, child] : tree.children) {
        if (o == observation) return &child;
    }
    return nullptr;
}

double eval_tree(const Pomdp& p, const Belief& b, const PolicyTree& tree,
                 const ToleranceConfig& tol) {
    if (tree.action >= p.num_actions) {
        throw IndexOutOfRange("tree action " + std::to_string(tree.action) + " out of range");
    }
    double value = classical::belief_reward(p, b, tree.action);
    if (tree.children.empty()) return value;
    double future = 0.0;
    for (std::size_t o = 1; o <= p.num_obs; ++o) {
        const double prob = classical::belief_obs_prob(p, b, tree.action, o);
        if (prob <= tol.eps_zero) continue;
        const PolicyTree* child = find_child(tree, o);
        if (child == nullptr) {
            throw MissingChild("no subtree for reachable observation " + std::to_string(o),
                               o);
        }
        const Belief next = classical::belief_update(p, b, tree.action, o, tol);
        future += prob * eval_tree(p, next, *child, tol);
    }
    return value + p.gamma * future;
}

double eval_tree(const Qomdp& q, const DensityMatrix& rho, const PolicyTree& tree,
                 const ToleranceConfig& tol) {
    if (tree.action >= q.actions.size()) {
        throw IndexOutOfRange("tree action " + std::to_string(tree.action) + " out of range");
    }
    double value = quantum::reward(rho, q.rewards[tree.action], tol);
    if (tree.children.empty()) return value;
    double future = 0.0;
    for (std::size_t o = 1; o <= q.num_obs; ++o) {
        const double prob = quantum::observation_prob(rho, q.actions[tree.action], o, tol);
        if (prob <= tol.eps_zero) continue;
        const PolicyTree* child = find_child(tree, o);
        if (child == nullptr) {
            throw MissingChild("no subtree for reachable observation " + std::to_string(o),
                               o);
        }
        const DensityMatrix next = quantum::evolve(rho, q.actions[tree.action], o, tol);
        future += prob * eval_tree(q, next, *child, tol);
    }
    return value + q.gamma * future;
}

void require_tree_depth(const PolicyTree& tree, std::size_t max_depth) {
    if (policy_tree_depth(tree) > max_depth) {
        throw Error("policy tree deeper than the configured cap of " +
                    std::to_string(max_depth));
    }
}

struct SearchBudget {
    std::size_t limit;
    std::size_t expanded = 0;

    void spend() {
        if (++expanded > limit) {
            throw BudgetExceeded("policy search expanded more than " + std::to_string(limit) +
                                     " nodes",
                                 expanded);
        }
    }
};

struct BestNode {
    double value = 0.0;
    PolicyTree tree;
};

BestNode best_tree(const Pomdp& p, const Belief& b, std::size_t horizon, SearchBudget& budget,
                   const ToleranceConfig& tol) {
    budget.spend();
    BestNode best;
    best.value = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < p.num_actions; ++a) {
        double value = classical::belief_reward(p, b, a);
        PolicyTree node{a, {}};
        if (horizon > 1) {
            double future = 0.0;
            for (std::size_t o = 1; o <= p.num_obs; ++o) {
                const double prob = classical::belief_obs_prob(p, b, a, o);
                if (prob <= tol.eps_zero) continue;
                const Belief next = classical::belief_update(p, b, a, o, tol);
                BestNode sub = best_tree(p, next, horizon - 1, budget, tol);
                future += prob * sub.value;
                node.children.emplace_back(o, std::move(sub.tree));
            }
            value += p.gamma * future;
        }
        if (value > best.value) {
            best.value = value;
            best.tree = std::move(node);
        }
    }
    return best;
}

BestNode best_tree(const Qomdp& q, const DensityMatrix& rho, std::size_t horizon,
                   SearchBudget& budget, const ToleranceConfig& tol) {
    budget.spend();
    BestNode best;
    best.value = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < q.actions.size(); ++a) {
        double value = quantum::reward(rho, q.rewards[a], tol);
        PolicyTree node{a, {}};
        if (horizon > 1) {
            double future = 0.0;
            for (std::size_t o = 1; o <= q.num_obs; ++o) {
                const double prob = quantum::observation_prob(rho, q.actions[a], o, tol);
                if (prob <= tol.eps_zero) continue;
                const DensityMatrix next = quantum::evolve(rho, q.actions[a], o, tol);
                BestNode sub = best_tree(q, next, horizon - 1, budget, tol);
                future += prob * sub.value;
                node.children.emplace_back(o, std::move(sub.tree));
            }
            value += q.gamma * future;
        }
        if (value > best.value) {
            best.value = value;
            best.tree = std::move(node);
        }
    }
    return best;
}

SupportState goal_support(std::size_t num_states, std::size_t goal) {
    SupportState z;
    z.bits.assign(num_states, false);
    z.bits[goal] = true;
    return z;
}

bool all_zero(const SupportState& z) {
    return std::none_of(z.bits.begin(), z.bits.end(), [](bool b) { return b; });
}

// Depth-first cycle detection over per-vertex successor lists, restricted to
// `alive` vertices.  The `sink` vertex is never entered or expanded.
bool has_cycle(const std::vector<std::vector<std::size_t>>& succ, const std::vector<bool>& alive,
               std::size_t sink) {
    enum class Color { white, gray, black };
    std::vector<Color> color(succ.size(), Color::white);
    std::vector<std::pair<std::size_t, std::size_t>> stack;  // (vertex, next edge)
    for (std::size_t start = 0; start < succ.size(); ++start) {
        if (!alive[start] || start == sink || color[start] != Color::white) continue;
        color[start] = Color::gray;
        stack.emplace_back(start, 0);
        while (!stack.empty()) {
            auto& [v, edge] = stack.back();
            if (edge < succ[v].size()) {
                const std::size_t w = succ[v][edge++];
                if (!alive[w] || w == sink) continue;
                if (color[w] == Color::gray) return true;
                if (color[w] == Color::white) {
                    color[w] = Color::gray;
                    stack.emplace_back(w, 0);
                }
            } else {
                color[v] = Color::black;
                stack.pop_back();
            }
        }
    }
    return false;
}

// Recursive sequence search behind the bounded quantum decider.  Tracks the
// single surviving non-goal branch; prunes action choices that split into two
// or more non-goal branches (such prefixes cannot be certified here).
bool bounded_goal_search(const GoalQomdp& q, const DensityMatrix& sigma, std::size_t depth_left,
                         std::vector<std::size_t>& seq, ReachabilityVerdict& verdict,
                         const ToleranceConfig& tol) {
    for (std::size_t a = 0; a < q.actions.size(); ++a) {
        ++verdict.nodes_expanded;
        std::vector<DensityMatrix> survivors;
        for (std::size_t o = 1; o <= q.num_obs; ++o) {
            const double prob = quantum::observation_prob(sigma, q.actions[a], o, tol);
            if (prob <= tol.eps_zero) continue;
            DensityMatrix next = quantum::evolve(sigma, q.actions[a], o, tol);
            if (!quantum::approx_equal(next, q.rho_g, tol.eps_zero)) {
                survivors.push_back(std::move(next));
            }
        }
        seq.push_back(a + 1);
        if (survivors.empty()) return true;
        if (survivors.size() == 1 && depth_left > 1 &&
            bounded_goal_search(q, survivors[0], depth_left - 1, seq, verdict, tol)) {
            return true;
        }
        seq.pop_back();
    }
    return false;
}

}  // namespace

std::size_t policy_tree_depth(const PolicyTree& tree) {
    std::size_t deepest = 0;
    for (const auto& [o, child] : tree.children) {
        (void)o;
        deepest = std::max(deepest, policy_tree_depth(child));
    }
    return deepest + 1;
}

SupportState support_of(const Belief& b) {
    SupportState z;
    z.bits.reserve(b.probs.size());
    for (double x : b.probs) z.bits.push_back(x > 0.0);
    return z;
}

ValueIterationResult value_iteration(const Mdp& m, double epsilon) {
    if (epsilon <= 0.0) throw Error("value_iteration requires epsilon > 0");
    if (m.gamma >= 1.0) throw Error("value_iteration requires gamma < 1");

    ValueIterationResult result;
    result.values.assign(m.num_states, 0.0);
    std::vector<double> next(m.num_states, 0.0);
    while (true) {
        double delta = 0.0;
        for (std::size_t s = 0; s < m.num_states; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < m.num_actions; ++a) {
                double value = m.reward[s][a];
                for (std::size_t t = 0; t < m.num_states; ++t) {
                    value += m.gamma * m.transition[s][a][t] * result.values[t];
                }
                best = std::max(best, value);
            }
            next[s] = best;
            delta = std::max(delta, std::abs(next[s] - result.values[s]));
        }
        result.values.swap(next);
        ++result.sweeps;
        // The Bellman operator contracts by gamma, so the residual of the new
        // values is at most gamma * delta.
        if (m.gamma * delta <= epsilon) break;
    }

    result.greedy.action_for_state.assign(m.num_states, 0);
    for (std::size_t s = 0; s < m.num_states; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < m.num_actions; ++a) {
            double value = m.reward[s][a];
            for (std::size_t t = 0; t < m.num_states; ++t) {
                value += m.gamma * m.transition[s][a][t] * result.values[t];
            }
            if (value > best) {
                best = value;
                result.greedy.action_for_state[s] = a;
            }
        }
    }
    return result;
}

std::vector<double> mdp_policy_value(const Mdp& m, const StationaryPolicy& pi,
                                     std::size_t horizon) {
    require_policy(pi, m.num_states, m.num_actions);
    std::vector<double> values(m.num_states, 0.0);
    std::vector<double> next(m.num_states, 0.0);
    for (std::size_t h = 0; h < horizon; ++h) {
        for (std::size_t s = 0; s < m.num_states; ++s) {
            const std::size_t a = pi.action_for_state[s];
            double value = m.reward[s][a];
            for (std::size_t t = 0; t < m.num_states; ++t) {
                value += m.gamma * m.transition[s][a][t] * values[t];
            }
            next[s] = value;
        }
        values.swap(next);
    }
    return values;
}

double evaluate_policy_tree(const Pomdp& p, const Belief& start, const PolicyTree& tree,
                            std::size_t max_depth, const ToleranceConfig& tol) {
    require_tree_depth(tree, max_depth);
    return eval_tree(p, start, tree, tol);
}

double evaluate_policy_tree(const Pomdp& p, const PolicyTree& tree, std::size_t max_depth,
                            const ToleranceConfig& tol) {
    return evaluate_policy_tree(p, p.b0, tree, max_depth, tol);
}

double evaluate_policy_tree(const Qomdp& q, const DensityMatrix& start, const PolicyTree& tree,
                            std::size_t max_depth, const ToleranceConfig& tol) {
    require_tree_depth(tree, max_depth);
    return eval_tree(q, start, tree, tol);
}

double evaluate_policy_tree(const Qomdp& q, const PolicyTree& tree, std::size_t max_depth,
                            const ToleranceConfig& tol) {
    return evaluate_policy_tree(q, q.rho0, tree, max_depth, tol);
}

BestPolicyResult best_policy_value(const Pomdp& p, const Belief& start, std::size_t horizon,
                                   std::size_t node_budget, const ToleranceConfig& tol) {
    if (horizon < 1) throw Error("best_policy_value requires horizon >= 1");
    SearchBudget budget{node_budget};
    BestNode best = best_tree(p, start, horizon, budget, tol);
    return BestPolicyResult{best.value, std::move(best.tree), budget.expanded};
}

BestPolicyResult best_policy_value(const Pomdp& p, std::size_t horizon, std::size_t node_budget,
                                   const ToleranceConfig& tol) {
    return best_policy_value(p, p.b0, horizon, node_budget, tol);
}

BestPolicyResult best_policy_value(const Qomdp& q, const DensityMatrix& start,
                                   std::size_t horizon, std::size_t node_budget,
                                   const ToleranceConfig& tol) {
    if (horizon < 1) throw Error("best_policy_value requires horizon >= 1");
    SearchBudget budget{node_budget};
    BestNode best = best_tree(q, start, horizon, budget, tol);
    return BestPolicyResult{best.value, std::move(best.tree), budget.expanded};
}

BestPolicyResult best_policy_value(const Qomdp& q, std::size_t horizon, std::size_t node_budget,
                                   const ToleranceConfig& tol) {
    return best_policy_value(q, q.rho0, horizon, node_budget, tol);
}

bool policy_exists(const Pomdp& p, std::size_t horizon, double v_threshold,
                   std::size_t node_budget, const ToleranceConfig& tol) {
    return best_policy_value(p, horizon, node_budget, tol).value >= v_threshold - tol.eps_zero;
}

bool policy_exists(const Qomdp& q, std::size_t horizon, double v_threshold,
                   std::size_t node_budget, const ToleranceConfig& tol) {
    return best_policy_value(q, horizon, node_budget, tol).value >= v_threshold - tol.eps_zero;
}

std::optional<SupportState> support_update(const GoalPomdp& p, const SupportState& z,
                                           std::size_t a, std::size_t o,
                                           const ToleranceConfig& tol) {
    if (z.bits.size() != p.num_states) {
        throw DimensionMismatch("support length " + std::to_string(z.bits.size()) +
                                " for a model with " + std::to_string(p.num_states) + " states");
    }
    if (all_zero(z)) throw Error("support_update requires a non-empty support");
    if (a >= p.num_actions) {
        throw IndexOutOfRange("action " + std::to_string(a) + " out of range");
    }
    if (o < 1 || o > p.num_obs) {
        throw IndexOutOfRange("observation " + std::to_string(o) + " out of range");
    }

    SupportState next;
    next.bits.assign(p.num_states, false);
    bool any = false;
    for (std::size_t i = 0; i < p.num_states; ++i) {
        const double obs = p.observation[i][a][o - 1];
        for (std::size_t j = 0; j < p.num_states; ++j) {
            if (!z.bits[j]) continue;
            if (obs * p.transition[j][a][i] > tol.eps_structural) {
                next.bits[i] = true;
                any = true;
                break;
            }
        }
    }
    if (!any) return std::nullopt;
    return next;
}

ReachabilityVerdict decide_goal_reachability_pomdp(const GoalPomdp& p, std::size_t max_states,
                                                   const ToleranceConfig& tol) {
    ReachabilityVerdict verdict;

    // Breadth-first closure of the support dynamics from the start support.
    std::map<SupportState, std::size_t> index;
    std::vector<std::vector<std::vector<std::size_t>>> succ;  // [support][action] -> successors
    std::deque<std::size_t> queue;

    const auto intern = [&](const SupportState& z) {
        const auto [it, inserted] = index.emplace(z, verdict.supports.size());
        if (inserted) {
            verdict.supports.push_back(z);
            if (verdict.supports.size() > max_states) {
                throw StateBudgetExceeded(
                    "support closure exceeded " + std::to_string(max_states) + " states",
                    verdict.supports.size());
            }
            queue.push_back(it->second);
        }
        return it->second;
    };

    const std::size_t start = intern(support_of(p.b0));
    const SupportState zg = goal_support(p.num_states, p.goal);
    while (!queue.empty()) {
        const std::size_t zi = queue.front();
        queue.pop_front();
        const SupportState z = verdict.supports[zi];
        succ.resize(verdict.supports.size());
        succ[zi].assign(p.num_actions, {});
        for (std::size_t a = 0; a < p.num_actions; ++a) {
            for (std::size_t o = 1; o <= p.num_obs; ++o) {
                const auto next = support_update(p, z, a, o, tol);
                if (!next) continue;
                const std::size_t ni = intern(*next);
                auto& edges = succ[zi][a];
                if (std::find(edges.begin(), edges.end(), ni) == edges.end()) {
                    edges.push_back(ni);
                }
            }
        }
    }
    succ.resize(verdict.supports.size());
    verdict.nodes_expanded = verdict.supports.size();

    const auto goal_it = index.find(zg);
    const std::size_t goal_index =
        goal_it == index.end() ? verdict.supports.size() : goal_it->second;

    // Try every stationary deterministic policy over the reachable supports.
    const std::size_t n = verdict.supports.size();
    std::vector<std::size_t> choice(n, 0);
    std::vector<std::vector<std::size_t>> policy_succ(n);
    std::vector<bool> reachable(n);
    while (true) {
        for (std::size_t zi = 0; zi < n; ++zi) policy_succ[zi] = succ[zi][choice[zi]];

        // Vertices reachable from the start; the goal support is a sink.
        std::fill(reachable.begin(), reachable.end(), false);
        std::deque<std::size_t> frontier{start};
        reachable[start] = true;
        while (!frontier.empty()) {
            const std::size_t v = frontier.front();
            frontier.pop_front();
            if (v == goal_index) continue;
            for (std::size_t w : policy_succ[v]) {
                if (!reachable[w]) {
                    reachable[w] = true;
                    frontier.push_back(w);
                }
            }
        }

        const bool goal_reached = goal_index < n && reachable[goal_index];
        if (goal_reached && !has_cycle(policy_succ, reachable, goal_index)) {
            verdict.decided = Decision::yes;
            verdict.witness = StationaryPolicy{choice};
            return verdict;
        }

        // Next policy (odometer over action choices, lowest index first).
        std::size_t pos = 0;
        while (pos < n && ++choice[pos] == p.num_actions) {
            choice[pos] = 0;
            ++pos;
        }
        if (pos == n) break;
    }

    verdict.decided = Decision::no;
    return verdict;
}

ReachabilityVerdict decide_goal_reachability_qomdp_bounded(const GoalQomdp& q, std::size_t depth,
                                                           const ToleranceConfig& tol) {
    if (depth < 1) throw Error("bounded decider requires depth >= 1");
    ReachabilityVerdict verdict;
    if (quantum::approx_equal(q.rho0, q.rho_g, tol.eps_zero)) {
        verdict.decided = Decision::yes;
        verdict.sequence_witness = ActionSequence{};
        return verdict;
    }
    std::vector<std::size_t> seq;
    if (bounded_goal_search(q, q.rho0, depth, seq, verdict, tol)) {
        verdict.decided = Decision::yes;
        verdict.sequence_witness = ActionSequence{std::move(seq)};
        return verdict;
    }
    verdict.decided = Decision::unknown;
    verdict.bound_used = depth;
    return verdict;
}

EstimateResult estimate_goal_probability(const GoalPomdp& p,
                                         const std::vector<SupportState>& supports,
                                         const StationaryPolicy& policy, std::size_t steps,
                                         std::size_t trials, std::uint64_t seed,
                                         const ToleranceConfig& tol) {
    if (trials < 1) throw Error("estimate_goal_probability requires trials >= 1");
    require_policy(policy, supports.size(), p.num_actions);
    std::map<SupportState, std::size_t> index;
    for (std::size_t i = 0; i < supports.size(); ++i) index.emplace(supports[i], i);

    const SplitRng master(seed);
    std::size_t successes = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        SplitRng rng = master.derive(t);
        std::size_t state = sample_categorical(p.b0.probs, rng);
        Belief belief = p.b0;
        bool reached = state == p.goal;
        for (std::size_t k = 0; k < steps && !reached; ++k) {
            const auto it = index.find(support_of(belief));
            if (it == index.end()) {
                throw Error("belief support not covered by the witness policy");
            }
            const std::size_t a = policy.action_for_state[it->second];
            auto step = classical::sample_pomdp_step(p, state, a, rng);
            rng = step.rng;
            state = step.next_state;
            belief = classical::belief_update(p, belief, a, step.observation, tol);
            reached = state == p.goal;
        }
        if (reached) ++successes;
    }

    EstimateResult result;
    result.trials = trials;
    result.probability = static_cast<double>(successes) / static_cast<double>(trials);
    result.std_error =
        std::sqrt(result.probability * (1.0 - result.probability) / static_cast<double>(trials));
    return result;
}

EstimateResult estimate_goal_probability(const GoalPomdp& p, const ActionSequence& seq,
                                         std::size_t steps, std::size_t trials,
                                         std::uint64_t seed, const ToleranceConfig&) {
    if (trials < 1) throw Error("estimate_goal_probability requires trials >= 1");
    for (std::size_t idx : seq.indices) {
        if (idx < 1 || idx > p.num_actions) {
            throw IndexOutOfRange("sequence index " + std::to_string(idx) + " out of range");
        }
    }

    const std::size_t horizon = std::min(steps, seq.indices.size());
    const SplitRng master(seed);
    std::size_t successes = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        SplitRng rng = master.derive(t);
        std::size_t state = sample_categorical(p.b0.probs, rng);
        bool reached = state == p.goal;
        for (std::size_t k = 0; k < horizon && !reached; ++k) {
            auto step = classical::sample_pomdp_step(p, state, seq.indices[k] - 1, rng);
            rng = step.rng;
            state = step.next_state;
            reached = state == p.goal;
        }
        if (reached) ++successes;
    }

    EstimateResult result;
    result.trials = trials;
    result.probability = static_cast<double>(successes) / static_cast<double>(trials);
    result.std_error =
        std::sqrt(result.probability * (1.0 - result.probability) / static_cast<double>(trials));
    return result;
}

EstimateResult estimate_goal_probability(const GoalQomdp& q, const ActionSequence& seq,
                                         std::size_t steps, std::size_t trials,
                                         std::uint64_t seed, const ToleranceConfig& tol) {
    if (trials < 1) throw Error("estimate_goal_probability requires trials >= 1");
    for (std::size_t idx : seq.indices) {
        if (idx < 1 || idx > q.actions.size()) {
            throw IndexOutOfRange("sequence index " + std::to_string(idx) + " out of range");
        }
    }

    const std::size_t horizon = std::min(steps, seq.indices.size());
    const SplitRng master(seed);
    std::size_t successes = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        SplitRng rng = master.derive(t);
        DensityMatrix rho = q.rho0;
        bool reached = quantum::approx_equal(rho, q.rho_g, tol.eps_zero);
        for (std::size_t k = 0; k < horizon && !reached; ++k) {
            auto step = quantum::sample_step(rho, q.actions[seq.indices[k] - 1], rng, tol);
            rng = step.rng;
            rho = step.next;
            reached = quantum::approx_equal(rho, q.rho_g, tol.eps_zero);
        }
        if (reached) ++successes;
    }

    EstimateResult result;
    result.trials = trials;
    result.probability = static_cast<double>(successes) / static_cast<double>(trials);
    result.std_error =
        std::sqrt(result.probability * (1.0 - result.probability) / static_cast<double>(trials));
    return result;
}

}  // namespace dproc::solvers
