#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "aoi/analytic.hpp"
#include "aoi/mdp.hpp"
#include "aoi/model.hpp"
#include "aoi/scenarios.hpp"
#include "aoi/sim.hpp"

using aoi::PolicyHandle;
using aoi::PolicyKind;
using aoi::SystemSpec;
using aoi::SystemState;

namespace {

PolicyHandle random_policy() { return {}; }

PolicyHandle myopic_policy() {
    PolicyHandle h;
    h.kind = PolicyKind::myopic;
    return h;
}

struct Solved {
    aoi::StateSpace space;
    aoi::PolicyTable policy;
    Solved(const SystemSpec& spec, int q) : space(spec, q) {
        auto [table, pol] = aoi::relative_value_iteration(space, {});
        REQUIRE(table.converged);
        policy = std::move(pol);
    }
    PolicyHandle handle() const {
        PolicyHandle h;
        h.kind = PolicyKind::optimal;
        h.space = &space;
        h.policy = &policy;
        return h;
    }
};

}  // namespace

TEST_CASE("identical inputs give bit-identical episode statistics") {
    SystemSpec spec = aoi::scenario_toy('b', 0.6, 0.4);
    auto a = aoi::run_episode(spec, random_policy(), 5000, 500, 42);
    auto b = aoi::run_episode(spec, random_policy(), 5000, 500, 42);
    CHECK(a.mean_aoi_overall == b.mean_aoi_overall);
    CHECK(a.mean_aoi_per_source == b.mean_aoi_per_source);
    auto c = aoi::run_episode(spec, random_policy(), 5000, 500, 43);
    CHECK(a.mean_aoi_overall != c.mean_aoi_overall);
}

TEST_CASE("certain observation pins the mean AoI at exactly one") {
    SystemSpec spec;
    spec.num_sensors = 1;
    spec.channel = Eigen::VectorXd::Ones(1);
    aoi::SourceSpec s;
    s.num_states = 1;
    s.transition = Eigen::MatrixXd::Ones(1, 1);
    s.obs_prob = Eigen::MatrixXd::Ones(1, 1);
    spec.sources.push_back(s);
    auto stats = aoi::run_episode(spec, random_policy(), 2000, 100, 7);
    CHECK(stats.mean_aoi_overall == 1.0);
}

TEST_CASE("simulated random policy matches the closed form on small scenarios") {
    auto specs = {aoi::scenario_toy('a', 0.5),
                  aoi::scenario_toy('b', 0.6, 0.4),
                  aoi::scenario_toy('c', 0.3, 0.2),
                  aoi::scenario_small_factory(0.4, 1.0)};
    int seed = 100;
    for (const auto& spec : specs) {
        double analytic = aoi::random_policy_aoi(spec).overall;
        auto agg = aoi::replicate(spec, random_policy(), 100000, 10000, 10, seed++);
        CHECK(std::abs(agg.mean - analytic) / analytic <= 0.02);
    }
}

TEST_CASE("policy ordering: optimal <= myopic <= random up to noise") {
    SystemSpec spec = aoi::scenario_toy('b', 0.6, 0.4);
    Solved solved(spec, 30);
    auto opt = aoi::replicate(spec, solved.handle(), 100000, 10000, 10, 1);
    auto myo = aoi::replicate(spec, myopic_policy(), 100000, 10000, 10, 2);
    auto rnd = aoi::replicate(spec, random_policy(), 100000, 10000, 10, 3);
    auto leq = [](const aoi::ReplicateStats& a, const aoi::ReplicateStats& b) {
        return a.mean <= b.mean + 3.0 * std::hypot(a.std_error, b.std_error);
    };
    CHECK(leq(opt, myo));
    CHECK(leq(myo, rnd));
    CHECK(opt.mean < rnd.mean);  // the gap itself is large on this instance
}

TEST_CASE("replicate: singleton aggregation and seed stability") {
    SystemSpec spec = aoi::scenario_toy('a', 0.5);
    auto one = aoi::replicate(spec, random_policy(), 20000, 1000, 1, 11);
    REQUIRE(one.runs.size() == 1);
    CHECK(one.mean == one.runs[0].mean_aoi_overall);
    CHECK(one.std_error == 0.0);

    auto a = aoi::replicate(spec, random_policy(), 50000, 5000, 10, 1234);
    auto b = aoi::replicate(spec, random_policy(), 50000, 5000, 10, 5678);
    CHECK(std::abs(a.mean - b.mean) <= 3.0 * std::hypot(a.std_error, b.std_error));
}

TEST_CASE("standard error shrinks roughly as one over sqrt of the horizon") {
    SystemSpec spec = aoi::scenario_toy('a', 0.5);
    auto short_t = aoi::replicate(spec, random_policy(), 20000, 2000, 40, 21);
    auto long_t = aoi::replicate(spec, random_policy(), 40000, 2000, 40, 22);
    double ratio = long_t.std_error / short_t.std_error;
    CHECK(ratio >= 0.6);
    CHECK(ratio <= 0.85);
}

TEST_CASE("burn-in insensitivity of the optimal-policy estimate") {
    SystemSpec spec = aoi::scenario_toy('a', 0.5);
    Solved solved(spec, 30);
    auto a = aoi::replicate(spec, solved.handle(), 100000, 10000, 10, 5);
    auto b = aoi::replicate(spec, solved.handle(), 100000, 20000, 10, 5);
    CHECK(std::abs(a.mean - b.mean) <= 3.0 * std::hypot(a.std_error, b.std_error));
}

TEST_CASE("myopic map equals its closed-form rule on the stateless toy") {
    SystemSpec spec = aoi::scenario_toy('a', 0.35);
    const double p = 0.35;
    auto grid = aoi::policy_map(
        spec, [&](const SystemState& st) { return aoi::myopic_action(spec, st); }, {1, 1}, 1, 20);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            int d1 = i + 1, d2 = j + 1;
            bool broad = (1 - p) * (d1 + d2) > p * std::max(d1, d2);
            if (broad)
                CHECK(grid[i][j] == 3);
            else
                CHECK(grid[i][j] != 3);
        }
}

TEST_CASE("optimal and myopic maps coincide at p = 0.9") {
    SystemSpec spec = aoi::scenario_toy('a', 0.9);
    Solved solved(spec, 40);
    auto opt = aoi::policy_map(
        spec,
        [&](const SystemState& st) { return solved.policy.action[solved.space.encode(st)]; },
        {1, 1}, 1, 20);
    auto myo = aoi::policy_map(
        spec, [&](const SystemState& st) { return aoi::myopic_action(spec, st); }, {1, 1}, 1, 20);
    CHECK(opt == myo);
}

TEST_CASE("symmetric ties go to the lowest sensor") {
    SystemSpec spec = aoi::scenario_toy('a', 0.8);
    for (int d = 1; d <= 20; ++d) {
        int a = aoi::myopic_action(spec, {{1, 1}, {d, d}});
        CHECK(a != 2);  // sensor 2 never beats the tie with sensor 1
    }
}

TEST_CASE("motivating round reproduces the published myopic trace") {
    auto [spec, init] = aoi::scenario_motivating();
    aoi::EpisodeTrace trace;
    aoi::EpisodeOptions opts;
    opts.initial = init;
    opts.trace = &trace;
    aoi::run_episode(spec, myopic_policy(), 6, 0, 1, opts);
    REQUIRE(trace.slots.size() == 6);
    // Sensor order is (C4, C1, C2): published decisions C1,C4,C4,C4,C1,C1.
    std::vector<std::vector<int>> aoi_rows{{1, 1, 4}, {1, 2, 5}, {2, 3, 1},
                                           {3, 1, 2}, {1, 2, 3}, {1, 1, 4}};
    std::vector<int> actions{2, 1, 1, 1, 2, 2};
    int total = 0;
    for (int t = 0; t < 6; ++t) {
        CHECK(trace.slots[t].aoi == aoi_rows[t]);
        CHECK(trace.slots[t].action == actions[t]);
        for (int v : trace.slots[t].aoi) total += v;
    }
    CHECK(total == 38);
}

TEST_CASE("custom partial policies see beliefs but never the true state") {
    SystemSpec spec = aoi::scenario_small_factory(0.25, 0.6);
    int calls = 0;
    PolicyHandle h;
    h.kind = PolicyKind::ml;
    h.observability = aoi::Observability::undetectable;
    h.custom_partial = [&](const aoi::PartialInfo& info) {
        ++calls;
        CHECK(info.spec != nullptr);
        CHECK(info.aoi_belief != nullptr);
        CHECK(info.known_aoi == nullptr);     // AoI hidden in this mode
        CHECK(info.state_belief == nullptr);  // states folded into p_hat
        return 1;
    };
    aoi::run_episode(spec, h, 50, 0, 3);
    CHECK(calls == 50);
}

TEST_CASE("incompatible policy and observability combinations are rejected") {
    SystemSpec spec = aoi::scenario_toy('b', 0.6, 0.4);
    PolicyHandle bad_myopic = myopic_policy();
    bad_myopic.observability = aoi::Observability::detectable;
    CHECK_THROWS_AS(aoi::run_episode(spec, bad_myopic, 10, 0, 1), std::invalid_argument);
    PolicyHandle bad_ml;
    bad_ml.kind = PolicyKind::ml;
    bad_ml.observability = aoi::Observability::full;
    CHECK_THROWS_AS(aoi::run_episode(spec, bad_ml, 10, 0, 1), std::invalid_argument);
}

TEST_CASE("stateless equivalent collapses sources to effective probabilities") {
    SystemSpec spec = aoi::scenario_toy('b', 0.6, 0.4);
    SystemSpec red = aoi::stateless_equivalent(spec);
    Eigen::MatrixXd p_hat = aoi::effective_obs_probs(spec);
    REQUIRE(red.num_sources() == 2);
    for (int k = 0; k < 2; ++k) {
        CHECK(red.sources[k].num_states == 1);
        for (int n = 0; n < spec.num_sensors; ++n)
            CHECK(red.sources[k].obs_prob(n, 0) == doctest::Approx(p_hat(n, k)).epsilon(1e-14));
    }
}
