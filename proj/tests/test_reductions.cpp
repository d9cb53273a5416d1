#include "doctest.h"

#include <cmath>
#include <vector>

#include "dproc/classical.hpp"
#include "dproc/quantum.hpp"
#include "dproc/reductions.hpp"
#include "support.hpp"

using dproc::EmptySequence;
using dproc::IndexOutOfRange;
using dproc::InvalidKraus;
using dproc::NotEmbeddable;
using dproc::PathExtinguished;
using dproc::SplitRng;
using dproc::numerics::Complex;
using dproc::numerics::ComplexMatrix;
using dproc::numerics::max_abs_diff;
using dproc::numerics::ToleranceConfig;
using dproc::quantum::DensityMatrix;
using dproc::quantum::GoalQomdp;
using dproc::quantum::Superoperator;
using namespace dproc::reductions;

namespace {

// Two orthogonal projectors: the shortest null sequence is (1, 2).
QmopInstance projector_pair() {
    return QmopInstance{2, {ComplexMatrix::unit(2, 0, 0), ComplexMatrix::unit(2, 1, 1)}};
}

QmopInstance single_unitary() {
    ComplexMatrix x(2, 2);
    x.at(0, 1) = 1.0;
    x.at(1, 0) = 1.0;
    return QmopInstance{2, {x}};
}

QmopInstance scaled_identities() {
    ComplexMatrix half = ComplexMatrix::identity(2);
    half *= Complex(0.7071067811865476, 0.0);
    return QmopInstance{2, {half, half}};
}

QmopInstance random_instance(SplitRng& rng, std::size_t d, std::size_t num_kraus) {
    return QmopInstance{d, testsupport::random_kraus_set(rng, d, num_kraus)};
}

ComplexMatrix diag3(double a, double b, double c) {
    ComplexMatrix m(3, 3);
    m.at(0, 0) = a;
    m.at(1, 1) = b;
    m.at(2, 2) = c;
    return m;
}

}  // namespace

TEST_CASE("qmop validation") {
    CHECK(validate_qmop(projector_pair()).empty());
    CHECK(validate_qmop(single_unitary()).empty());
    CHECK(validate_qmop(scaled_identities()).empty());

    QmopInstance incomplete{2, {ComplexMatrix::unit(2, 0, 0)}};
    const auto violations = validate_qmop(incomplete);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].invariant == "kraus completeness");
    CHECK(violations[0].deviation == doctest::Approx(1.0));

    CHECK_THROWS_AS(qmop_to_goal_qomdp(incomplete), InvalidKraus);
}

TEST_CASE("goal model construction on the projector pair") {
    const GoalQomdp q = qmop_to_goal_qomdp(projector_pair());
    CHECK(q.dim == 3);
    CHECK(q.num_obs == 4);
    REQUIRE(q.actions.size() == 2);
    REQUIRE(q.actions[0].kraus.size() == 4);

    // The final Kraus matrix embeds the instance matrix.
    CHECK(max_abs_diff(q.actions[0].kraus[3], diag3(1.0, 0.0, 0.0)) < 1e-12);
    CHECK(max_abs_diff(q.actions[1].kraus[3], diag3(0.0, 1.0, 0.0)) < 1e-12);

    CHECK(max_abs_diff(q.rho0.mat(), diag3(1.0 / 3, 1.0 / 3, 1.0 / 3)) < 1e-12);
    CHECK(max_abs_diff(q.rho_g.mat(), diag3(0.0, 0.0, 1.0)) < 1e-12);

    // Weight matrix for action 1 is diag(0,1,1): one zero Kraus branch, two
    // unit-weight branches.
    ComplexMatrix weight_sum(3, 3);
    for (std::size_t j = 0; j < 3; ++j) {
        const ComplexMatrix& k = q.actions[0].kraus[j];
        weight_sum += k.adjoint() * k;
    }
    CHECK(max_abs_diff(weight_sum, diag3(0.0, 1.0, 1.0)) < 1e-10);
    CHECK(q.actions[0].kraus[0].max_abs() == 0.0);

    for (const Superoperator& action : q.actions) {
        CHECK(dproc::quantum::validate_superoperator(action.kraus).complete);
    }
    CHECK(dproc::quantum::is_absorbing_goal(q).absorbing);
    CHECK(dproc::quantum::validate_goal_qomdp(q).empty());
}

TEST_CASE("construction is valid on random instances") {
    SplitRng rng(12021);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t d = 2 + trial % 3;
        const std::size_t num_kraus = 2 + trial % 2;
        const GoalQomdp q = qmop_to_goal_qomdp(random_instance(rng, d, num_kraus));
        CHECK(q.dim == d + 1);
        CHECK(q.num_obs == d + 2);
        for (const Superoperator& action : q.actions) {
            CHECK(dproc::quantum::validate_superoperator(action.kraus).complete);
        }
        CHECK(dproc::quantum::is_absorbing_goal(q).absorbing);
    }
}

TEST_CASE("every early observation lands on the goal state") {
    SplitRng rng(33033);
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t d = 2 + trial % 3;
        const GoalQomdp q = qmop_to_goal_qomdp(random_instance(rng, d, 2));
        const DensityMatrix rho(testsupport::random_density(rng, d + 1));
        for (const Superoperator& action : q.actions) {
            for (std::size_t j = 1; j <= d + 1; ++j) {
                if (dproc::quantum::observation_prob(rho, action, j) <= 1e-8) continue;
                const DensityMatrix next = dproc::quantum::evolve(rho, action, j);
                CHECK(dproc::quantum::approx_equal(next, q.rho_g, 1e-8));
            }
        }
    }
}

TEST_CASE("at most one non-goal successor at every step") {
    SplitRng rng(91);
    const QmopInstance s = random_instance(rng, 3, 2);
    const GoalQomdp q = qmop_to_goal_qomdp(s);
    ToleranceConfig tol;

    // Walk every action choice three levels deep, tracking the single
    // surviving non-goal state.
    std::vector<DensityMatrix> frontier = {q.rho0};
    for (int depth = 0; depth < 3; ++depth) {
        std::vector<DensityMatrix> next_frontier;
        for (const DensityMatrix& state : frontier) {
            for (const Superoperator& action : q.actions) {
                std::vector<DensityMatrix> nongoal;
                for (std::size_t j = 1; j <= q.num_obs; ++j) {
                    if (dproc::quantum::observation_prob(state, action, j) <= tol.eps_zero) {
                        continue;
                    }
                    const DensityMatrix branch = dproc::quantum::evolve(state, action, j);
                    if (!dproc::quantum::approx_equal(branch, q.rho_g, tol.eps_zero)) {
                        nongoal.push_back(branch);
                    }
                }
                CHECK(nongoal.size() <= 1);
                for (DensityMatrix& state_next : nongoal) {
                    next_frontier.push_back(std::move(state_next));
                }
            }
        }
        frontier = std::move(next_frontier);
    }
}

TEST_CASE("non-goal probability on hand-computed instances") {
    const QmopInstance s = projector_pair();
    CHECK(nongoal_probability(s, {{1, 2}}) == doctest::Approx(0.0));
    CHECK(nongoal_probability(s, {{1, 1}}) == doctest::Approx(1.0 / 3.0));
    CHECK(nongoal_probability(s, {{2, 2}}) == doctest::Approx(1.0 / 3.0));

    const QmopInstance unitary = single_unitary();
    CHECK(nongoal_probability(unitary, {{1}}) == doctest::Approx(2.0 / 3.0));
    CHECK(nongoal_probability(unitary, {{1, 1}}) == doctest::Approx(2.0 / 3.0));
    CHECK(nongoal_probability(unitary, {{1, 1, 1}}) == doctest::Approx(2.0 / 3.0));

    CHECK_THROWS_AS(nongoal_probability(s, {{3}}), IndexOutOfRange);
}

TEST_CASE("null sequence detection") {
    const QmopInstance s = projector_pair();
    CHECK(qmop_sequence_is_null(s, {{1, 2}}));
    CHECK(qmop_sequence_is_null(s, {{2, 1}}));
    CHECK(!qmop_sequence_is_null(s, {{1, 1}}));
    CHECK(!qmop_sequence_is_null(single_unitary(), {{1, 1, 1, 1}}));
    CHECK_THROWS_AS(qmop_sequence_is_null(s, {{}}), EmptySequence);
}

TEST_CASE("null detection matches vanishing non-goal probability") {
    SplitRng rng(2222);
    for (int trial = 0; trial < 6; ++trial) {
        const QmopInstance s = random_instance(rng, 2, 2);
        for (std::size_t a = 1; a <= 2; ++a) {
            for (std::size_t b = 1; b <= 2; ++b) {
                const ActionSequence seq{{a, b}};
                CHECK(qmop_sequence_is_null(s, seq) == (nongoal_probability(s, seq) <= 1e-8));
            }
        }
    }
    const QmopInstance s = projector_pair();
    CHECK(qmop_sequence_is_null(s, {{1, 2}}) == (nongoal_probability(s, {{1, 2}}) <= 1e-8));
}

TEST_CASE("bounded search finds the first null sequence") {
    const auto found = qmop_bounded_search(projector_pair(), 2);
    REQUIRE(found.has_value());
    CHECK(found->indices == std::vector<std::size_t>{1, 2});

    CHECK(!qmop_bounded_search(projector_pair(), 1).has_value());
    CHECK(!qmop_bounded_search(single_unitary(), 6).has_value());
    CHECK(!qmop_bounded_search(scaled_identities(), 5).has_value());
}

TEST_CASE("rank pruning preserves the search verdict") {
    SearchOptions pruned;
    pruned.rank_pruning = true;

    const auto found = qmop_bounded_search(projector_pair(), 2, pruned);
    REQUIRE(found.has_value());
    CHECK(found->indices == std::vector<std::size_t>{1, 2});
    CHECK(!qmop_bounded_search(single_unitary(), 6, pruned).has_value());

    SplitRng rng(5150);
    for (int trial = 0; trial < 6; ++trial) {
        const QmopInstance s = random_instance(rng, 2, 2);
        CHECK(qmop_bounded_search(s, 3).has_value() ==
              qmop_bounded_search(s, 3, pruned).has_value());
    }
}

TEST_CASE("policy path states on hand-computed instances") {
    const auto path = policy_path(projector_pair(), {{1}});
    REQUIRE(path.size() == 1);
    CHECK(max_abs_diff(path[0].mat(), diag3(1.0, 0.0, 0.0)) < 1e-12);

    const auto unitary_path = policy_path(single_unitary(), {{1, 1}});
    REQUIRE(unitary_path.size() == 2);
    CHECK(max_abs_diff(unitary_path[1].mat(), diag3(0.5, 0.5, 0.0)) < 1e-12);

    try {
        policy_path(projector_pair(), {{1, 2}});
        FAIL("expected PathExtinguished");
    } catch (const PathExtinguished& e) {
        CHECK(e.step == 2);
    }
}

TEST_CASE("policy path matches stepwise evolution") {
    SplitRng rng(640);
    for (int trial = 0; trial < 6; ++trial) {
        const std::size_t d = 2 + trial % 2;
        const QmopInstance s = random_instance(rng, d, 2);
        const GoalQomdp q = qmop_to_goal_qomdp(s);
        // A few short sequences; skip those whose branch dies.
        const std::vector<std::vector<std::size_t>> sequences = {
            {1}, {2}, {1, 1}, {1, 2}, {2, 1, 1}, {1, 2, 1, 2}};
        for (const auto& indices : sequences) {
            std::vector<DensityMatrix> path;
            try {
                path = policy_path(s, ActionSequence{indices});
            } catch (const PathExtinguished&) {
                continue;
            }
            DensityMatrix state = q.rho0;
            for (std::size_t k = 0; k < indices.size(); ++k) {
                state = dproc::quantum::evolve(state, q.actions[indices[k] - 1], q.num_obs);
                CHECK(dproc::quantum::approx_equal(state, path[k], 1e-8));
            }
        }
    }
}

TEST_CASE("non-goal probability equals the stepwise branch product") {
    SplitRng rng(808);
    ToleranceConfig tol;
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t d = 2 + trial % 3;
        const QmopInstance s = random_instance(rng, d, 2);
        const GoalQomdp q = qmop_to_goal_qomdp(s);
        const std::vector<std::vector<std::size_t>> sequences = {
            {1}, {2}, {1, 2}, {2, 2}, {1, 1, 2}, {2, 1, 2, 1}};
        for (const auto& indices : sequences) {
            DensityMatrix state = q.rho0;
            double stepwise = 1.0;
            for (std::size_t idx : indices) {
                const Superoperator& action = q.actions[idx - 1];
                const double p = dproc::quantum::observation_prob(state, action, q.num_obs);
                stepwise *= p;
                if (p <= tol.eps_zero) {
                    stepwise = 0.0;
                    break;
                }
                state = dproc::quantum::evolve(state, action, q.num_obs);
            }
            CHECK(std::abs(stepwise - nongoal_probability(s, ActionSequence{indices})) < 1e-8);
        }
    }
}

TEST_CASE("simulated non-goal frequency matches the trace formula") {
    const QmopInstance s = projector_pair();
    const GoalQomdp q = qmop_to_goal_qomdp(s);
    const std::vector<std::size_t> indices = {1, 1};

    SplitRng rng(424242);
    const int trials = 20000;
    int nongoal = 0;
    for (int t = 0; t < trials; ++t) {
        DensityMatrix state = q.rho0;
        for (std::size_t idx : indices) {
            auto result = dproc::quantum::sample_step(state, q.actions[idx - 1], rng);
            rng = result.rng;
            state = result.next;
        }
        if (!dproc::quantum::approx_equal(state, q.rho_g, 1e-8)) ++nongoal;
    }
    const double expected = nongoal_probability(s, ActionSequence{indices});
    CHECK(expected == doctest::Approx(1.0 / 3.0));
    const double sigma = std::sqrt(expected * (1.0 - expected) * trials);
    CHECK(std::abs(nongoal - expected * trials) < 3.0 * sigma);

    // A null sequence reaches the goal in every single trial.
    int reached = 0;
    const std::vector<std::size_t> null_seq = {1, 2};
    for (int t = 0; t < 2000; ++t) {
        DensityMatrix state = q.rho0;
        for (std::size_t idx : null_seq) {
            auto result = dproc::quantum::sample_step(state, q.actions[idx - 1], rng);
            rng = result.rng;
            state = result.next;
        }
        if (dproc::quantum::approx_equal(state, q.rho_g, 1e-8)) ++reached;
    }
    CHECK(reached == 2000);
}

TEST_CASE("classical models embed when transitions are permutations") {
    // Identity transitions with per-state observations.
    dproc::classical::Pomdp p;
    p.num_states = 2;
    p.num_actions = 1;
    p.num_obs = 2;
    p.transition = {{{1.0, 0.0}}, {{0.0, 1.0}}};
    p.observation = {{{1.0, 0.0}}, {{0.0, 1.0}}};
    p.reward = {{2.0}, {4.0}};
    p.b0 = dproc::classical::Belief{{0.5, 0.5}};
    p.gamma = 0.9;

    const dproc::quantum::Qomdp q = embed_pomdp(p);
    CHECK(q.dim == 2);
    CHECK(q.num_obs == 2);
    CHECK(dproc::quantum::validate_qomdp(q).empty());
    CHECK(q.rho0.mat().at(0, 0).real() == doctest::Approx(0.5));

    // Diagonal dynamics reproduce the belief update exactly.
    CHECK(dproc::quantum::observation_prob(q.rho0, q.actions[0], 1) == doctest::Approx(0.5));
    const DensityMatrix next = dproc::quantum::evolve(q.rho0, q.actions[0], 1);
    CHECK(next.mat().at(0, 0).real() == doctest::Approx(1.0));
    CHECK(next.mat().at(1, 1).real() == doctest::Approx(0.0));
    CHECK(dproc::quantum::reward(q.rho0, q.rewards[0]) == doctest::Approx(3.0));
}

TEST_CASE("swap transitions with uninformative observations embed") {
    dproc::classical::Pomdp p;
    p.num_states = 2;
    p.num_actions = 1;
    p.num_obs = 2;
    p.transition = {{{0.0, 1.0}}, {{1.0, 0.0}}};
    p.observation = {{{0.5, 0.5}}, {{0.5, 0.5}}};
    p.reward = {{0.0}, {0.0}};
    p.b0 = dproc::classical::Belief{{0.3, 0.7}};
    p.gamma = 0.9;

    const dproc::quantum::Qomdp q = embed_pomdp(p);
    for (std::size_t o = 1; o <= 2; ++o) {
        CHECK(dproc::quantum::observation_prob(q.rho0, q.actions[0], o) == doctest::Approx(0.5));
    }
    const DensityMatrix next = dproc::quantum::evolve(q.rho0, q.actions[0], 1);
    CHECK(next.mat().at(0, 0).real() == doctest::Approx(0.7));
    CHECK(next.mat().at(1, 1).real() == doctest::Approx(0.3));
}

TEST_CASE("merging transitions are not embeddable") {
    // Both states move deterministically to state 0: columns of the
    // square-root family overlap and completeness fails with residual 1.
    dproc::classical::Pomdp p;
    p.num_states = 2;
    p.num_actions = 1;
    p.num_obs = 1;
    p.transition = {{{1.0, 0.0}}, {{1.0, 0.0}}};
    p.observation = {{{1.0}}, {{1.0}}};
    p.reward = {{0.0}, {0.0}};
    p.b0 = dproc::classical::Belief{{0.5, 0.5}};
    p.gamma = 0.9;

    try {
        embed_pomdp(p);
        FAIL("expected NotEmbeddable");
    } catch (const NotEmbeddable& e) {
        CHECK(e.deviation == doctest::Approx(1.0));
    }
}

TEST_CASE("embedded models track classical trajectories") {
    SplitRng rng(6464);
    for (int trial = 0; trial < 5; ++trial) {
        const dproc::classical::Pomdp p = testsupport::random_permutation_pomdp(rng, 3, 2, 3);
        const dproc::quantum::Qomdp q = embed_pomdp(p);

        dproc::classical::Belief b = p.b0;
        DensityMatrix rho = q.rho0;
        for (int step = 0; step < 6; ++step) {
            const std::size_t a = step % p.num_actions;
            CHECK(std::abs(dproc::classical::belief_reward(p, b, a) -
                           dproc::quantum::reward(rho, q.rewards[a])) < 1e-10);
            std::size_t chosen = 0;
            for (std::size_t o = 1; o <= p.num_obs; ++o) {
                const double classical_prob = dproc::classical::belief_obs_prob(p, b, a, o);
                const double quantum_prob = dproc::quantum::observation_prob(rho, q.actions[a], o);
                CHECK(std::abs(classical_prob - quantum_prob) < 1e-10);
                if (chosen == 0 && classical_prob > 0.1) chosen = o;
            }
            if (chosen == 0) break;
            b = dproc::classical::belief_update(p, b, a, chosen);
            rho = dproc::quantum::evolve(rho, q.actions[a], chosen);
            for (std::size_t i = 0; i < p.num_states; ++i) {
                CHECK(std::abs(rho.mat().at(i, i).real() - b.probs[i]) < 1e-10);
            }
        }
    }
}
