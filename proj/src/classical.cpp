#include "dproc/classical.hpp"

#include <cmath>
#include <sstream>

namespace dproc::classical {

bool approx_equal(const Belief& a, const Belief& b, double eps) {
    if (a.probs.size() != b.probs.size()) return false;
    for (std::size_t i = 0; i < a.probs.size(); ++i) {
        if (std::abs(a.probs[i] - b.probs[i]) > eps) return false;
    }
    return true;
}

Belief make_belief(std::vector<double> probs, const ToleranceConfig& tol) {
    double sum = 0.0;
    for (double& p : probs) {
        if (!std::isfinite(p)) {
            throw ValidationError("belief has a non-finite entry", {{"belief finite", 0.0}});
        }
        if (p < 0.0) {
            if (p < -tol.eps_structural) {
                throw ValidationError("belief has a negative entry",
                                      {{"belief entry nonnegative", -p}});
            }
            p = 0.0;
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > tol.eps_structural) {
        throw ValidationError("belief does not sum to 1", {{"belief sums to 1", std::abs(sum - 1.0)}});
    }
    for (double& p : probs) p /= sum;
    return Belief{std::move(probs)};
}

namespace {

// Validates a [outer][num_actions][inner] tensor of probabilities whose rows
// must sum to 1.
void check_stochastic_tensor(const char* name,
                             const std::vector<std::vector<std::vector<double>>>& tensor,
                             std::size_t outer, std::size_t num_actions, std::size_t inner,
                             const ToleranceConfig& tol, std::vector<Violation>& out) {
    if (tensor.size() != outer) {
        out.push_back({std::string(name) + " shape", 0.0});
        return;
    }
    for (std::size_t s = 0; s < outer; ++s) {
        if (tensor[s].size() != num_actions) {
            out.push_back({std::string(name) + " shape", 0.0});
            return;
        }
        for (std::size_t a = 0; a < num_actions; ++a) {
            const std::vector<double>& row = tensor[s][a];
            if (row.size() != inner) {
                out.push_back({std::string(name) + " shape", 0.0});
                return;
            }
            double sum = 0.0;
            double worst_range = 0.0;
            bool finite = true;
            for (double v : row) {
                if (!std::isfinite(v)) finite = false;
                if (v < 0.0) worst_range = std::max(worst_range, -v);
                if (v > 1.0) worst_range = std::max(worst_range, v - 1.0);
                sum += v;
            }
            std::ostringstream where;
            where << " (s=" << s << ",a=" << a << ")";
            if (!finite) {
                out.push_back({std::string(name) + " finite" + where.str(), 0.0});
                continue;
            }
            if (worst_range > tol.eps_structural) {
                out.push_back({std::string(name) + " entry range" + where.str(), worst_range});
            }
            if (std::abs(sum - 1.0) > tol.eps_structural) {
                out.push_back({std::string(name) + " row stochastic" + where.str(),
                               std::abs(sum - 1.0)});
            }
        }
    }
}

void check_reward_table(const std::vector<std::vector<double>>& reward, std::size_t num_states,
                        std::size_t num_actions, std::vector<Violation>& out) {
    if (reward.size() != num_states) {
        out.push_back({"reward shape", 0.0});
        return;
    }
    for (const auto& row : reward) {
        if (row.size() != num_actions) {
            out.push_back({"reward shape", 0.0});
            return;
        }
        for (double v : row) {
            if (!std::isfinite(v)) {
                out.push_back({"reward finite", 0.0});
                return;
            }
        }
    }
}

void check_belief_field(const Belief& b, std::size_t num_states, const char* label,
                        const ToleranceConfig& tol, std::vector<Violation>& out) {
    if (b.probs.size() != num_states) {
        out.push_back({std::string(label) + " size", 0.0});
        return;
    }
    double sum = 0.0;
    for (double v : b.probs) {
        if (!std::isfinite(v)) {
            out.push_back({std::string(label) + " finite", 0.0});
            return;
        }
        if (v < -tol.eps_structural) {
            out.push_back({std::string(label) + " entry nonnegative", -v});
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > tol.eps_structural) {
        out.push_back({std::string(label) + " sums to 1", std::abs(sum - 1.0)});
    }
}

void check_counts(std::size_t num_states, std::size_t num_actions, std::vector<Violation>& out) {
    if (num_states < 1) out.push_back({"num_states at least 1", 0.0});
    if (num_actions < 1) out.push_back({"num_actions at least 1", 0.0});
}

void check_gamma(double gamma, std::vector<Violation>& out) {
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        out.push_back({"gamma in [0, 1)", gamma < 0.0 ? -gamma : gamma - 1.0});
    }
}

}  // namespace

std::vector<Violation> validate_mdp(const Mdp& m, const ToleranceConfig& tol) {
    std::vector<Violation> out;
    check_counts(m.num_states, m.num_actions, out);
    check_stochastic_tensor("transition", m.transition, m.num_states, m.num_actions, m.num_states,
                            tol, out);
    check_reward_table(m.reward, m.num_states, m.num_actions, out);
    check_gamma(m.gamma, out);
    return out;
}

std::vector<Violation> validate_goal_mdp(const GoalMdp& m, const ToleranceConfig& tol) {
    std::vector<Violation> out;
    check_counts(m.num_states, m.num_actions, out);
    check_stochastic_tensor("transition", m.transition, m.num_states, m.num_actions, m.num_states,
                            tol, out);
    if (m.goal >= m.num_states) {
        out.push_back({"goal index in range", 0.0});
        return out;
    }
    if (out.empty()) {
        for (std::size_t a = 0; a < m.num_actions; ++a) {
            const double dev = std::abs(m.transition[m.goal][a][m.goal] - 1.0);
            if (dev > tol.eps_structural) {
                std::ostringstream label;
                label << "goal absorbing (a=" << a << ")";
                out.push_back({label.str(), dev});
            }
        }
    }
    return out;
}

namespace {

void validate_core(const PomdpCore& p, const ToleranceConfig& tol, std::vector<Violation>& out) {
    check_counts(p.num_states, p.num_actions, out);
    if (p.num_obs < 1) out.push_back({"num_obs at least 1", 0.0});
    check_stochastic_tensor("transition", p.transition, p.num_states, p.num_actions, p.num_states,
                            tol, out);
    check_stochastic_tensor("observation", p.observation, p.num_states, p.num_actions, p.num_obs,
                            tol, out);
    check_belief_field(p.b0, p.num_states, "b0", tol, out);
}

}  // namespace

std::vector<Violation> validate_pomdp(const Pomdp& p, const ToleranceConfig& tol) {
    std::vector<Violation> out;
    validate_core(p, tol, out);
    check_reward_table(p.reward, p.num_states, p.num_actions, out);
    check_gamma(p.gamma, out);
    return out;
}

std::vector<Violation> validate_goal_pomdp(const GoalPomdp& p, const ToleranceConfig& tol) {
    std::vector<Violation> out;
    validate_core(p, tol, out);
    if (p.goal >= p.num_states) {
        out.push_back({"goal index in range", 0.0});
        return out;
    }
    if (!out.empty()) return out;
    for (std::size_t a = 0; a < p.num_actions; ++a) {
        const double trans_dev = std::abs(p.transition[p.goal][a][p.goal] - 1.0);
        if (trans_dev > tol.eps_structural) {
            std::ostringstream label;
            label << "goal absorbing (a=" << a << ")";
            out.push_back({label.str(), trans_dev});
        }
        const double obs_dev = std::abs(p.observation[p.goal][a][p.num_obs - 1] - 1.0);
        if (obs_dev > tol.eps_structural) {
            std::ostringstream label;
            label << "goal observation certain (a=" << a << ")";
            out.push_back({label.str(), obs_dev});
        }
        for (std::size_t s = 0; s < p.num_states; ++s) {
            if (s == p.goal) continue;
            const double leak = p.observation[s][a][p.num_obs - 1];
            if (leak > tol.eps_structural) {
                std::ostringstream label;
                label << "goal observation exclusive (s=" << s << ",a=" << a << ")";
                out.push_back({label.str(), leak});
            }
        }
    }
    return out;
}

namespace {

void require_action(const PomdpCore& p, std::size_t a) {
    if (a >= p.num_actions) {
        std::ostringstream os;
        os << "action index " << a << " out of range 0.." << p.num_actions - 1;
        throw IndexOutOfRange(os.str());
    }
}

void require_observation(const PomdpCore& p, std::size_t o) {
    if (o < 1 || o > p.num_obs) {
        std::ostringstream os;
        os << "observation index " << o << " out of range 1.." << p.num_obs;
        throw IndexOutOfRange(os.str());
    }
}

void require_state(const PomdpCore& p, std::size_t s) {
    if (s >= p.num_states) {
        std::ostringstream os;
        os << "state index " << s << " out of range 0.." << p.num_states - 1;
        throw IndexOutOfRange(os.str());
    }
}

// Unnormalized posterior tau^{ao} b.
std::vector<double> unnormalized_posterior(const PomdpCore& p, const Belief& b, std::size_t a,
                                           std::size_t o) {
    std::vector<double> v(p.num_states, 0.0);
    for (std::size_t i = 0; i < p.num_states; ++i) {
        double pushed = 0.0;
        for (std::size_t j = 0; j < p.num_states; ++j) {
            pushed += p.transition[j][a][i] * b.probs[j];
        }
        v[i] = p.observation[i][a][o - 1] * pushed;
    }
    return v;
}

}  // namespace

ComplexMatrix tau_matrix(const PomdpCore& p, std::size_t a, std::size_t o) {
    require_action(p, a);
    require_observation(p, o);
    ComplexMatrix tau(p.num_states, p.num_states);
    for (std::size_t i = 0; i < p.num_states; ++i) {
        for (std::size_t j = 0; j < p.num_states; ++j) {
            tau.at(i, j) = p.observation[i][a][o - 1] * p.transition[j][a][i];
        }
    }
    return tau;
}

double belief_obs_prob(const PomdpCore& p, const Belief& b, std::size_t a, std::size_t o) {
    require_action(p, a);
    require_observation(p, o);
    const std::vector<double> v = unnormalized_posterior(p, b, a, o);
    double sum = 0.0;
    for (double x : v) sum += x;
    if (sum < 0.0) return 0.0;
    if (sum > 1.0) return 1.0;
    return sum;
}

Belief belief_update(const PomdpCore& p, const Belief& b, std::size_t a, std::size_t o,
                     const ToleranceConfig& tol) {
    require_action(p, a);
    require_observation(p, o);
    std::vector<double> v = unnormalized_posterior(p, b, a, o);
    double norm = 0.0;
    for (double x : v) norm += x;
    if (norm <= tol.eps_zero) {
        std::ostringstream os;
        os << "observation " << o << " has probability " << norm << " <= eps_zero";
        throw ZeroProbabilityObservation(os.str());
    }
    for (double& x : v) x /= norm;
    return make_belief(std::move(v), tol);
}

double belief_transition_prob(const PomdpCore& p, const Belief& b, std::size_t a,
                              const Belief& b_next, const ToleranceConfig& tol) {
    require_action(p, a);
    double total = 0.0;
    for (std::size_t o = 1; o <= p.num_obs; ++o) {
        const double prob = belief_obs_prob(p, b, a, o);
        if (prob <= tol.eps_zero) continue;
        if (approx_equal(belief_update(p, b, a, o, tol), b_next, tol.eps_zero)) {
            total += prob;
        }
    }
    return total;
}

double belief_reward(const Pomdp& p, const Belief& b, std::size_t a) {
    require_action(p, a);
    double total = 0.0;
    for (std::size_t i = 0; i < p.num_states; ++i) total += b.probs[i] * p.reward[i][a];
    return total;
}

PomdpStepResult sample_pomdp_step(const PomdpCore& p, std::size_t hidden_state, std::size_t a,
                                  SplitRng rng) {
    require_state(p, hidden_state);
    require_action(p, a);
    const std::size_t next = sample_categorical(p.transition[hidden_state][a], rng);
    const std::size_t obs = sample_categorical(p.observation[next][a], rng);
    return PomdpStepResult{next, obs + 1, std::move(rng)};
}

bool check_goal_belief_absorbing(const GoalPomdp& p, const ToleranceConfig& tol) {
    std::vector<double> goal_probs(p.num_states, 0.0);
    goal_probs[p.goal] = 1.0;
    const Belief b_g{std::move(goal_probs)};
    for (std::size_t a = 0; a < p.num_actions; ++a) {
        const double prob = belief_obs_prob(p, b_g, a, p.num_obs);
        if (std::abs(prob - 1.0) > tol.eps_structural) return false;
        try {
            if (!approx_equal(belief_update(p, b_g, a, p.num_obs, tol), b_g,
                              tol.eps_structural)) {
                return false;
            }
        } catch (const Error&) {
            return false;
        }
    }
    return true;
}

GoalPomdp goal_mdp_to_goal_pomdp(const GoalMdp& m, std::size_t start) {
    if (start >= m.num_states) throw IndexOutOfRange("start state out of range");
    if (m.goal >= m.num_states) throw IndexOutOfRange("goal state out of range");
    GoalPomdp p;
    p.num_states = m.num_states;
    p.num_actions = m.num_actions;
    p.num_obs = m.num_states;
    p.transition = m.transition;
    // Observation slot per state: non-goal states take slots 0..|S|-2 in
    // state order, the goal takes the final slot.
    auto obs_slot = [&](std::size_t s) {
        if (s == m.goal) return m.num_states - 1;
        return s < m.goal ? s : s - 1;
    };
    p.observation.assign(m.num_states,
                         std::vector<std::vector<double>>(
                             m.num_actions, std::vector<double>(p.num_obs, 0.0)));
    for (std::size_t s = 0; s < m.num_states; ++s) {
        for (std::size_t a = 0; a < m.num_actions; ++a) {
            p.observation[s][a][obs_slot(s)] = 1.0;
        }
    }
    std::vector<double> b0(m.num_states, 0.0);
    b0[start] = 1.0;
    p.b0 = Belief{std::move(b0)};
    p.goal = m.goal;
    return p;
}

}  // namespace dproc::classical
