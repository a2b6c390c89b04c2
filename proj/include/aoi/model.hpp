#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "aoi/rng.hpp"

namespace aoi {

// A monitored source: finite Markov chain plus per-sensor observation
// probabilities that depend on the source state.
struct SourceSpec {
    int num_states = 0;
    Eigen::MatrixXd transition;  // num_states x num_states, row-stochastic
    Eigen::MatrixXd obs_prob;    // num_sensors x num_states, entries in [0,1]
};

struct SystemSpec {
    int num_sensors = 0;
    Eigen::VectorXd channel;  // delivery probability q_n per sensor
    std::vector<SourceSpec> sources;

    int num_sources() const { return static_cast<int>(sources.size()); }

    // Observation probability of source k (0-based) by sensor a (1-based)
    // when the source is in state s (1-based).
    double obs(int a, int k, int s) const { return sources[k].obs_prob(a - 1, s - 1); }
};

// Joint system state at the destination: per-source state and per-source AoI.
// Both are 1-based, AoI is always >= 1 in stored states.
struct SystemState {
    std::vector<int> source_states;
    std::vector<int> aoi;

    bool operator==(const SystemState&) const = default;
};

struct StepOutcome {
    SystemState next_state;
    bool channel_ok = false;
    std::vector<char> observed;  // per-source observation indicator
};

// Returns every violated model invariant (empty list = valid). Checks row
// stochasticity, probability ranges, irreducibility/aperiodicity of each
// chain, and the reachability assumption sum_n sum_s q_n p > 0.
std::vector<std::string> validate(const SystemSpec& spec);

// Solves beta R = beta with the normalization constraint.
Eigen::VectorXd stationary_distribution(const SourceSpec& source);

// One-step expected cost of action a (1-based) in the given state: the
// expected mean AoI in the following slot.
double cost(const SystemSpec& spec, const SystemState& state, int a);

// Samples one slot: shared channel Bernoulli(q_a), then conditionally
// independent per-source detections from the pre-transition source states,
// AoI reset/increment, then source state transitions. trunc_q > 0 saturates
// the AoI at trunc_q.
StepOutcome step(const SystemSpec& spec, const SystemState& state, int a, Rng& rng,
                 int trunc_q = 0);

// Full one-step kernel with the AoI truncated at trunc_q. Enumerates the
// shared-channel factorization; throws if the support exceeds support_cap.
std::vector<std::pair<SystemState, double>> transition_distribution(
    const SystemSpec& spec, const SystemState& state, int a, int trunc_q,
    std::size_t support_cap = 1u << 20);

// Capacity constraint C: expands every sensor into binom(K, C) virtual
// sensors, one per C-subset of sources.
SystemSpec expand_capacity_constraint(const SystemSpec& spec, int capacity,
                                      std::size_t sensor_cap = 100000);

}  // namespace aoi
