#pragma once

// Shared helpers for the test suites: seeded random matrices, states, and
// model generators, plus small independent oracles.

#include <cstddef>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dproc/classical.hpp"
#include "dproc/numerics.hpp"
#include "dproc/rng.hpp"
#include "dproc/solvers.hpp"

namespace testsupport {

using dproc::SplitRng;
using dproc::numerics::Complex;
using dproc::numerics::ComplexMatrix;

// Entries i.i.d. complex standard normal (real and imaginary parts N(0, 1/2)).
inline ComplexMatrix random_matrix(SplitRng& rng, std::size_t rows, std::size_t cols) {
    ComplexMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            m.at(r, c) = Complex(rng.gaussian() * 0.7071067811865476,
                                 rng.gaussian() * 0.7071067811865476);
        }
    }
    return m;
}

inline ComplexMatrix random_hermitian(SplitRng& rng, std::size_t n) {
    ComplexMatrix a = random_matrix(rng, n, n);
    ComplexMatrix h = a.adjoint();
    h += a;
    h *= Complex(0.5, 0.0);
    return h;
}

// Random density matrix G G^dag / Tr(G G^dag): Hermitian, PSD, trace 1.
inline ComplexMatrix random_density(SplitRng& rng, std::size_t n) {
    ComplexMatrix g = random_matrix(rng, n, n);
    ComplexMatrix rho = g * g.adjoint();
    const double tr = rho.trace().real();
    rho *= Complex(1.0 / tr, 0.0);
    return rho;
}

// Orthonormalizes the columns of m in place (modified Gram-Schmidt, two
// passes). Throws if a column degenerates, which has probability zero for
// Gaussian input.
inline void orthonormalize_columns(ComplexMatrix& m) {
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    for (std::size_t j = 0; j < cols; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t i = 0; i < j; ++i) {
                Complex dot(0.0, 0.0);
                for (std::size_t r = 0; r < rows; ++r) dot += std::conj(m.at(r, i)) * m.at(r, j);
                for (std::size_t r = 0; r < rows; ++r) m.at(r, j) -= dot * m.at(r, i);
            }
        }
        double norm_sq = 0.0;
        for (std::size_t r = 0; r < rows; ++r) norm_sq += std::norm(m.at(r, j));
        if (norm_sq < 1e-16) throw std::runtime_error("orthonormalize_columns: degenerate column");
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (std::size_t r = 0; r < rows; ++r) m.at(r, j) *= inv;
    }
}

inline ComplexMatrix random_unitary(SplitRng& rng, std::size_t n) {
    ComplexMatrix u = random_matrix(rng, n, n);
    orthonormalize_columns(u);
    return u;
}

// num_kraus matrices of size dim x dim with sum K_i^dag K_i = I, built by
// orthonormalizing dim Gaussian columns of height num_kraus*dim and slicing
// them into stacked blocks.
inline std::vector<ComplexMatrix> random_kraus_set(SplitRng& rng, std::size_t dim,
                                                   std::size_t num_kraus) {
    ComplexMatrix tall = random_matrix(rng, num_kraus * dim, dim);
    orthonormalize_columns(tall);
    std::vector<ComplexMatrix> kraus(num_kraus, ComplexMatrix(dim, dim));
    for (std::size_t i = 0; i < num_kraus; ++i) {
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = 0; c < dim; ++c) {
                kraus[i].at(r, c) = tall.at(i * dim + r, c);
            }
        }
    }
    return kraus;
}

// Uniform point on the probability simplex (normalized exponentials).
inline std::vector<double> random_prob_row(SplitRng& rng, std::size_t n) {
    std::vector<double> row(n);
    double sum = 0.0;
    for (double& x : row) {
        x = -std::log(1.0 - rng.uniform01());
        sum += x;
    }
    for (double& x : row) x /= sum;
    return row;
}

inline dproc::classical::Pomdp random_pomdp(SplitRng& rng, std::size_t num_states,
                                            std::size_t num_actions, std::size_t num_obs) {
    dproc::classical::Pomdp p;
    p.num_states = num_states;
    p.num_actions = num_actions;
    p.num_obs = num_obs;
    p.transition.resize(num_states);
    p.observation.resize(num_states);
    p.reward.resize(num_states);
    for (std::size_t s = 0; s < num_states; ++s) {
        p.transition[s].resize(num_actions);
        p.observation[s].resize(num_actions);
        p.reward[s].resize(num_actions);
        for (std::size_t a = 0; a < num_actions; ++a) {
            p.transition[s][a] = random_prob_row(rng, num_states);
            p.observation[s][a] = random_prob_row(rng, num_obs);
            p.reward[s][a] = rng.gaussian();
        }
    }
    p.b0 = dproc::classical::Belief{random_prob_row(rng, num_states)};
    p.gamma = 0.9;
    return p;
}

// POMDP whose every action permutes the states deterministically; observation
// rows stay arbitrary. Such models always admit an exact quantum embedding.
inline dproc::classical::Pomdp random_permutation_pomdp(SplitRng& rng, std::size_t num_states,
                                                        std::size_t num_actions,
                                                        std::size_t num_obs) {
    dproc::classical::Pomdp p = random_pomdp(rng, num_states, num_actions, num_obs);
    for (std::size_t a = 0; a < num_actions; ++a) {
        std::vector<std::size_t> perm(num_states);
        for (std::size_t s = 0; s < num_states; ++s) perm[s] = s;
        for (std::size_t i = num_states; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
            std::swap(perm[i - 1], perm[j]);
        }
        for (std::size_t s = 0; s < num_states; ++s) {
            p.transition[s][a].assign(num_states, 0.0);
            p.transition[s][a][perm[s]] = 1.0;
        }
    }
    return p;
}

// Goal POMDP with the goal as the last state and the goal observation as the
// last observation; the start belief is spread over the non-goal states.
// num_obs counts all observations including the goal one, so num_obs >= 2
// unless num_states == 1.
inline dproc::classical::GoalPomdp random_goal_pomdp(SplitRng& rng, std::size_t num_states,
                                                     std::size_t num_actions,
                                                     std::size_t num_obs) {
    dproc::classical::GoalPomdp p;
    p.num_states = num_states;
    p.num_actions = num_actions;
    p.num_obs = num_obs;
    p.goal = num_states - 1;
    p.transition.resize(num_states);
    p.observation.resize(num_states);
    for (std::size_t s = 0; s < num_states; ++s) {
        p.transition[s].resize(num_actions);
        p.observation[s].resize(num_actions);
        for (std::size_t a = 0; a < num_actions; ++a) {
            if (s == p.goal) {
                p.transition[s][a].assign(num_states, 0.0);
                p.transition[s][a][p.goal] = 1.0;
                p.observation[s][a].assign(num_obs, 0.0);
                p.observation[s][a][num_obs - 1] = 1.0;
            } else {
                p.transition[s][a] = random_prob_row(rng, num_states);
                p.observation[s][a] = random_prob_row(rng, num_obs - 1);
                p.observation[s][a].push_back(0.0);
            }
        }
    }
    if (num_states == 1) {
        p.b0 = dproc::classical::Belief{{1.0}};
    } else {
        std::vector<double> b0 = random_prob_row(rng, num_states - 1);
        b0.push_back(0.0);
        p.b0 = dproc::classical::Belief{std::move(b0)};
    }
    return p;
}

// Goal POMDP with every probability row drawn from {point mass, half-half}:
// random members of the discrete decider test family.  The goal is the last
// state, the goal observation the last observation.
inline dproc::classical::GoalPomdp random_simple_goal_pomdp(SplitRng& rng,
                                                            std::size_t nongoal_states,
                                                            std::size_t num_actions,
                                                            std::size_t nongoal_obs) {
    const std::size_t num_states = nongoal_states + 1;
    const std::size_t num_obs = nongoal_obs + 1;
    const auto simple_row = [&rng](std::size_t len, std::size_t width) {
        std::vector<double> row(width, 0.0);
        const std::size_t t1 = static_cast<std::size_t>(rng.next_u64() % len);
        const std::size_t t2 = static_cast<std::size_t>(rng.next_u64() % len);
        if (t1 == t2) {
            row[t1] = 1.0;
        } else {
            row[t1] = 0.5;
            row[t2] = 0.5;
        }
        return row;
    };

    dproc::classical::GoalPomdp p;
    p.num_states = num_states;
    p.num_actions = num_actions;
    p.num_obs = num_obs;
    p.goal = num_states - 1;
    p.transition.resize(num_states);
    p.observation.resize(num_states);
    for (std::size_t s = 0; s < num_states; ++s) {
        p.transition[s].resize(num_actions);
        p.observation[s].resize(num_actions);
        for (std::size_t a = 0; a < num_actions; ++a) {
            if (s == p.goal) {
                p.transition[s][a].assign(num_states, 0.0);
                p.transition[s][a][p.goal] = 1.0;
                p.observation[s][a].assign(num_obs, 0.0);
                p.observation[s][a][num_obs - 1] = 1.0;
            } else {
                p.transition[s][a] = simple_row(num_states, num_states);
                p.observation[s][a] = simple_row(nongoal_obs, num_obs);
            }
        }
    }
    p.b0 = dproc::classical::Belief{simple_row(nongoal_states, num_states)};
    return p;
}

using SupportMemo = std::map<std::pair<std::vector<bool>, std::size_t>, bool>;

// AND-OR search over support states: true iff some adaptive support-level
// plan of the given depth reaches the goal support with certainty (for some
// action, every feasible observation branch succeeds).
inline bool support_tree_can_reach(const dproc::classical::GoalPomdp& p,
                                   const dproc::solvers::SupportState& z, std::size_t depth,
                                   SupportMemo& memo) {
    std::size_t set_bits = 0;
    for (bool bit : z.bits) set_bits += bit ? 1 : 0;
    if (set_bits == 1 && z.bits[p.goal]) return true;
    if (depth == 0) return false;
    const auto key = std::make_pair(z.bits, depth);
    const auto it = memo.find(key);
    if (it != memo.end()) return it->second;

    bool reachable = false;
    for (std::size_t a = 0; a < p.num_actions && !reachable; ++a) {
        bool all_branches = true;
        bool any_branch = false;
        for (std::size_t o = 1; o <= p.num_obs && all_branches; ++o) {
            const auto next = dproc::solvers::support_update(p, z, a, o);
            if (!next) continue;
            any_branch = true;
            all_branches = support_tree_can_reach(p, *next, depth - 1, memo);
        }
        reachable = any_branch && all_branches;
    }
    memo[key] = reachable;
    return reachable;
}

// Brute-force goal-reachability verdict from the start support, searching to
// depth 2^num_states (enough to visit every support state).
inline bool support_tree_oracle(const dproc::classical::GoalPomdp& p) {
    std::size_t depth = 1;
    for (std::size_t i = 0; i < p.num_states; ++i) depth *= 2;
    SupportMemo memo;
    return support_tree_can_reach(p, dproc::solvers::support_of(p.b0), depth, memo);
}

// Every full policy tree of exactly the given depth: all actions at the root,
// and for depth > 1 every combination of subtrees across all observations.
// Enumeration order is lexicographic with the root action as the primary key,
// so the first tree attaining a value maximum realizes lowest-index
// tie-breaking at every reachable node.
inline std::vector<dproc::solvers::PolicyTree> all_policy_trees(std::size_t num_actions,
                                                                std::size_t num_obs,
                                                                std::size_t depth) {
    std::vector<dproc::solvers::PolicyTree> trees;
    if (depth == 1) {
        for (std::size_t a = 0; a < num_actions; ++a) {
            trees.push_back(dproc::solvers::PolicyTree{a, {}});
        }
        return trees;
    }
    const auto subtrees = all_policy_trees(num_actions, num_obs, depth - 1);
    for (std::size_t a = 0; a < num_actions; ++a) {
        std::vector<std::size_t> pick(num_obs, 0);
        while (true) {
            dproc::solvers::PolicyTree tree{a, {}};
            for (std::size_t o = 1; o <= num_obs; ++o) {
                tree.children.emplace_back(o, subtrees[pick[o - 1]]);
            }
            trees.push_back(std::move(tree));
            std::size_t pos = num_obs;
            while (pos > 0 && ++pick[pos - 1] == subtrees.size()) {
                pick[pos - 1] = 0;
                --pos;
            }
            if (pos == 0) break;
        }
    }
    return trees;
}

}  // namespace testsupport
