#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "aoi/mdp.hpp"
#include "aoi/model.hpp"
#include "aoi/pomdp.hpp"

namespace aoi {

enum class PolicyKind { random, myopic, optimal, ml, qmdp };

enum class Observability { full, detectable, detectable_reveal, undetectable };

// Per-slot view handed to custom partial-information policies. Deliberately
// excludes the true source states: this interface is the only way a partial
// policy receives information from the harness.
struct PartialInfo {
    const SystemSpec* spec = nullptr;           // reduced spec in undetectable mode
    const std::vector<int>* known_aoi = nullptr;  // null when the AoI is hidden
    const StateBelief* state_belief = nullptr;    // detectable modes only
    const AoIBelief* aoi_belief = nullptr;        // undetectable mode only
    const ObservationRecord* last_obs = nullptr;  // null on the first slot
};

struct PolicyHandle {
    PolicyKind kind = PolicyKind::random;
    Observability observability = Observability::full;
    // Value-table backing for optimal / value-based ML and Q-MDP. In
    // undetectable mode the space/q must be built on stateless_equivalent().
    const StateSpace* space = nullptr;
    const PolicyTable* policy = nullptr;     // optimal only
    const std::vector<double>* q = nullptr;  // ml/qmdp; null = myopic variant
    std::optional<int> qmdp_samples;         // Monte-Carlo Q-MDP; nullopt = exact
    int belief_aoi_bins = 512;               // AoI-belief truncation (undetectable)
    // Overrides kind for partial observability modes.
    std::function<int(const PartialInfo&)> custom_partial;
};

struct EpisodeStats {
    double mean_aoi_overall = 0.0;
    Eigen::VectorXd mean_aoi_per_source;
    long slots_counted = 0;
    long burn_in_discarded = 0;
    std::uint64_t seed = 0;
};

struct SlotRecord {
    std::vector<int> aoi;  // pre-decision AoI vector
    int action = 0;        // 1-based sensor
};

struct EpisodeTrace {
    std::vector<SlotRecord> slots;
};

struct EpisodeOptions {
    // Default initialization draws source states from the stationary
    // distributions and sets every AoI to 1.
    std::optional<SystemState> initial;
    EpisodeTrace* trace = nullptr;
};

// Replaces every source by a single-state chain whose observation column is
// the stationarity-weighted probability p_hat; the state space used by
// undetectable value-based policies.
SystemSpec stateless_equivalent(const SystemSpec& spec);

EpisodeStats run_episode(const SystemSpec& spec, const PolicyHandle& policy, long slots,
                         long burn_in, std::uint64_t seed, const EpisodeOptions& opts = {});

struct ReplicateStats {
    double mean = 0.0;
    double std_error = 0.0;  // across replications; 0 for a single run
    std::vector<EpisodeStats> runs;
};

ReplicateStats replicate(const SystemSpec& spec, const PolicyHandle& policy, long slots,
                         long burn_in, int runs, std::uint64_t master_seed,
                         const EpisodeOptions& opts = {});

// Action grid over (aoi1, aoi2) in [aoi_min, aoi_max]^2 at fixed source
// states; grid[i][j] is the action at aoi1 = aoi_min + i, aoi2 = aoi_min + j.
std::vector<std::vector<int>> policy_map(const SystemSpec& spec,
                                         const std::function<int(const SystemState&)>& act,
                                         const std::vector<int>& source_states, int aoi_min,
                                         int aoi_max);

}  // namespace aoi
