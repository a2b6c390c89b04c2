#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "aoi/analytic.hpp"
#include "aoi/model.hpp"
#include "aoi/scenarios.hpp"

using aoi::SourceSpec;
using aoi::SystemSpec;

namespace {

SystemSpec single_stateless(double p, double q) {
    SystemSpec spec;
    spec.num_sensors = 1;
    spec.channel = Eigen::VectorXd::Constant(1, q);
    SourceSpec s;
    s.num_states = 1;
    s.transition = Eigen::MatrixXd::Ones(1, 1);
    s.obs_prob = Eigen::MatrixXd::Constant(1, 1, p);
    spec.sources.push_back(std::move(s));
    return spec;
}

}  // namespace

TEST_CASE("success/fail matrices: certain observation") {
    SystemSpec spec = single_stateless(1.0, 1.0);
    auto m = aoi::success_fail_matrices(spec, 0);
    CHECK(m.p_k(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.r_succ(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.r_fail(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("success/fail matrices: mean observation probability and exact split") {
    SystemSpec toy = aoi::scenario_toy('a', 0.3);
    auto m = aoi::success_fail_matrices(toy, 0);
    // (p + 0 + (1-p)) / 3 independent of p.
    CHECK(m.p_k(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    SystemSpec fac = aoi::scenario_small_factory(0.4, 0.7);
    auto f = aoi::success_fail_matrices(fac, 1);
    Eigen::MatrixXd sum = f.r_succ + f.r_fail;
    CHECK((sum - fac.sources[1].transition).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(f.r_succ.minCoeff() >= 0.0);
    CHECK(f.r_fail.minCoeff() >= 0.0);
}

TEST_CASE("closed form vs truncated-chain oracle") {
    auto specs = {aoi::scenario_toy('a', 0.35),
                  aoi::scenario_toy('b', 0.6, 0.4),
                  aoi::scenario_toy('c', 0.3, 0.2),
                  aoi::scenario_small_factory(0.1, 0.8),
                  aoi::scenario_small_factory(0.4, 0.8)};
    for (const auto& spec : specs) {
        auto closed = aoi::random_policy_aoi(spec);
        for (int k = 0; k < spec.num_sources(); ++k) {
            auto oracle = aoi::truncated_chain_aoi(spec, k, 10000);
            CHECK(std::abs(closed.per_source(k) - oracle.mean_aoi) <= 1e-6);
        }
    }
}

TEST_CASE("stateless shortcut: hand values and closed-form agreement") {
    CHECK(aoi::random_policy_aoi_stateless(single_stateless(0.5, 1.0)) ==
          doctest::Approx(2.0).epsilon(1e-12));
    SystemSpec toy = aoi::scenario_toy('a', 0.7);
    CHECK(aoi::random_policy_aoi_stateless(toy) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(std::abs(aoi::random_policy_aoi_stateless(toy) - aoi::random_policy_aoi(toy).overall) <=
          1e-9);
}

TEST_CASE("stateless shortcut scales inversely with the channel quality") {
    SystemSpec spec = single_stateless(0.4, 0.5);
    double base = aoi::random_policy_aoi_stateless(spec);
    spec.channel *= 1.5;
    CHECK(aoi::random_policy_aoi_stateless(spec) == doctest::Approx(base / 1.5).epsilon(1e-12));
}

TEST_CASE("truncated chain: deterministic reset sits at AoI 1") {
    for (int q : {2, 10, 100})
        CHECK(aoi::truncated_chain_aoi(single_stateless(1.0, 1.0), 0, q).mean_aoi ==
              doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("truncated chain: geometric inter-reset time") {
    double v = aoi::truncated_chain_aoi(single_stateless(0.5, 1.0), 0, 50).mean_aoi;
    CHECK(v == doctest::Approx(2.0).epsilon(1e-10));
    // The truncation deficit (Q+1)/2^Q is below solver precision at Q = 50,
    // so only closeness is asserted, not strict one-sidedness.
    CHECK(aoi::truncated_chain_aoi(single_stateless(0.5, 1.0), 0, 8).mean_aoi < 2.0);
}

TEST_CASE("truncated chain: monotone in Q, converging to the closed form") {
    SystemSpec spec = aoi::scenario_toy('b', 0.6, 0.4);
    double closed = aoi::random_policy_aoi(spec).per_source(0);
    double prev = 0.0;
    for (int q : {10, 100, 1000, 10000}) {
        double v = aoi::truncated_chain_aoi(spec, 0, q).mean_aoi;
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(std::abs(prev - closed) <= 1e-6);
}

TEST_CASE("closed-form blocks match the sparse-solve stationary blocks") {
    SystemSpec spec = aoi::scenario_small_factory(0.25, 0.6);
    auto solved = aoi::truncated_chain_aoi(spec, 0, 200);
    for (int q = 1; q <= 20; ++q) {
        Eigen::VectorXd block = aoi::truncated_chain_block(spec, 0, q);
        CHECK((block - solved.blocks[q - 1]).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("failure matrix norm decays below one") {
    for (const auto& spec : {aoi::scenario_toy('c', 0.3, 0.2),
                             aoi::scenario_small_factory(0.1, 0.5),
                             aoi::scenario_large_factory(0.3, 0.05)}) {
        for (int k = 0; k < spec.num_sources(); ++k)
            CHECK(aoi::fail_matrix_contracts(aoi::success_fail_matrices(spec, k)));
    }
}
