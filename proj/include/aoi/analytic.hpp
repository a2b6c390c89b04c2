#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "aoi/model.hpp"

namespace aoi {

// Success/failure split of a source chain under uniform random scheduling:
// r_succ + r_fail = R exactly, and p_k holds the per-state mean observation
// probability (1/N) sum_n q_n p_nk.
struct SourceAoIMatrices {
    Eigen::VectorXd p_k;
    Eigen::MatrixXd r_succ;
    Eigen::MatrixXd r_fail;
};

struct RandomPolicyAoI {
    Eigen::VectorXd per_source;
    double overall = 0.0;
};

SourceAoIMatrices success_fail_matrices(const SystemSpec& spec, int k);

// Closed-form long-run average AoI of the uniform random policy:
// beta r_succ (I - r_fail)^-2 1, evaluated via two linear solves.
RandomPolicyAoI random_policy_aoi(const SystemSpec& spec);

// Single-state shortcut: (N/K) sum_k 1 / (sum_n q_n p_nk).
double random_policy_aoi_stateless(const SystemSpec& spec);

struct TruncatedChainResult {
    double mean_aoi = 0.0;
    // Stationary blocks phi^(q) from the sparse solve, for q = 1..Q.
    std::vector<Eigen::VectorXd> blocks;
};

// Independent oracle: stationary distribution of the Q-truncated joint
// (state, AoI) chain of source k under random scheduling, solved as a sparse
// linear system.
TruncatedChainResult truncated_chain_aoi(const SystemSpec& spec, int k, int trunc_q,
                                         std::size_t size_cap = 2'000'000);

// Closed-form block phi^(q) = beta r_succ r_fail^(q-1).
Eigen::VectorXd truncated_chain_block(const SystemSpec& spec, int k, int q);

// Norm-decay certificate that the spectral radius of r_fail is < 1:
// ||r_fail^m||_inf < 1 for some m <= max_power.
bool fail_matrix_contracts(const SourceAoIMatrices& m, int max_power = 64);

}  // namespace aoi
