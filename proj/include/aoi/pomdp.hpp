#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "aoi/mdp.hpp"
#include "aoi/model.hpp"
#include "aoi/rng.hpp"

namespace aoi {

// Per-source posterior over source states (detectable case).
struct StateBelief {
    std::vector<Eigen::VectorXd> per_source;
};

// Per-source distribution over the truncated AoI {1..Q}; the Q bin absorbs
// the tail mass (undetectable case).
struct AoIBelief {
    std::vector<Eigen::VectorXd> per_source;
};

struct ObservationRecord {
    bool channel_ok = false;
    std::vector<char> observed;
    int action = 1;  // 1-based sensor index
    // True states of observed sources (1-based, 0 = absent), used only by
    // the state-reveal variant.
    std::vector<int> true_states_of_observed;
};

StateBelief uniform_state_belief(const SystemSpec& spec);
StateBelief stationary_state_belief(const SystemSpec& spec);

// Bayes correction from the (q, zeta) observation followed by prediction
// through each source chain. With reveal = true and zeta_k = 1, the posterior
// collapses to the recorded true state before prediction.
StateBelief update_state_belief(const SystemSpec& spec, const StateBelief& belief,
                                const ObservationRecord& obs, bool reveal = false);

// Stationarity-weighted observation probabilities p_hat (N x K).
Eigen::MatrixXd effective_obs_probs(const SystemSpec& spec);

// Shift-and-reset update of the AoI belief under action a; mass at the top
// bin accumulates.
AoIBelief update_aoi_belief(const SystemSpec& spec, const AoIBelief& belief, int a,
                            const Eigen::MatrixXd& p_hat);

// Mixed known/believed state description. For every source, a known
// component is used when set (>= 1); otherwise the corresponding belief
// factor must be present.
struct BeliefFactors {
    std::vector<int> known_states;  // 0 = use state_belief factor
    std::vector<int> known_aoi;     // 0 = use aoi_belief factor
    const StateBelief* state_belief = nullptr;
    const AoIBelief* aoi_belief = nullptr;
};

// Belief-expected one-step cost, computed by factorization (no joint
// enumeration).
double expected_cost(const SystemSpec& spec, const BeliefFactors& factors, int a);

// Precomputed state-action values over a truncated state space, shared by
// the ML and Q-MDP policies. Absent (nullptr) value tables give the myopic
// variants.
struct QTableRef {
    const StateSpace* space = nullptr;
    const std::vector<double>* q = nullptr;  // index * num_actions + (a-1)
};

// Acts on the componentwise most likely state (ties to the lowest index).
// With tie_rng set, exactly-tied action values are broken uniformly at
// random instead of to the lowest index; belief collapse can make every
// action indifferent, and a deterministic break would fixate on one sensor.
int ml_action(const SystemSpec& spec, const BeliefFactors& factors, const QTableRef* table,
              Rng* tie_rng = nullptr);

struct QmdpSampled {
    int count = 1024;
    Rng* rng = nullptr;
};

// Minimizes the belief-expected state-action value. Exact mode iterates the
// product support of the unknown factors; sampled mode Monte-Carlo averages.
int qmdp_action(const SystemSpec& spec, const BeliefFactors& factors, const QTableRef* table,
                std::optional<QmdpSampled> sampled = std::nullopt,
                std::size_t support_cap = 1u << 20, Rng* tie_rng = nullptr);

// Belief-expected value of a single action (exposed for estimator tests).
double qmdp_objective(const SystemSpec& spec, const BeliefFactors& factors,
                      const QTableRef* table, int a,
                      std::optional<QmdpSampled> sampled = std::nullopt,
                      std::size_t support_cap = 1u << 20);

}  // namespace aoi
