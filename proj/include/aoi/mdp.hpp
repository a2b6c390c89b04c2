#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "aoi/model.hpp"

namespace aoi {

// Enumerated Q-truncated state space with a bijective mixed-radix codec:
// source states form the high digits, AoIs the low digits. Also owns the
// precomputed joint source-state transition matrix and the per-action
// reset-pattern branches used by the Bellman sweeps.
class StateSpace {
public:
    StateSpace(SystemSpec spec, int trunc_q);

    const SystemSpec& spec() const { return spec_; }
    int trunc_q() const { return trunc_q_; }
    int num_sources() const { return spec_.num_sources(); }
    int num_actions() const { return spec_.num_sensors; }
    std::size_t total_states() const { return total_states_; }
    std::size_t joint_source_states() const { return s_joint_; }
    std::size_t aoi_states() const { return aoi_count_; }

    std::size_t encode(const SystemState& state) const;
    SystemState decode(std::size_t index) const;

    // Default reference state: all sources in state 1, all AoIs at Q.
    std::size_t default_reference() const { return aoi_count_ - 1; }

    // One Jacobi sweep: out[i] = min_a { C(i,a) + alpha * E_damped[h|i,a] }
    // where E_damped = (1-damping)*h[i] + damping*E[h|i,a]. damping < 1 is
    // the aperiodicity transformation (gain and greedy actions preserved).
    void sweep(const std::vector<double>& h, std::vector<double>& out, double alpha,
               double damping) const;

    // State-action values C + (1-damping)*h + damping*E[h], flattened as
    // index * num_actions + (a-1).
    std::vector<double> q_values(const std::vector<double>& h, double damping = 1.0) const;

    // Expected one-step cost of action a (1-based) at an encoded state.
    double cost_at(std::size_t index, int a) const;

private:
    friend struct SweepAccess;
    SystemSpec spec_;
    int trunc_q_;
    std::size_t s_joint_ = 1;
    std::size_t aoi_count_ = 1;
    std::size_t total_states_ = 1;
    std::vector<std::size_t> aoi_pow_;            // Q^(K-1-k)
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> joint_transition_;
    struct Branch {
        double prob;
        std::uint32_t reset_mask;
    };
    // branches_[a * s_joint + sigma]
    std::vector<std::vector<Branch>> branches_;
    // pq_[(a * s_joint + sigma) * K + k] = p_ak^(s_k) * q_a
    std::vector<double> pq_;
};

struct ValueTable {
    std::vector<double> h;
    double gain = 0.0;
    std::size_t reference_state = 0;
    long iterations = 0;
    double span_lower = 0.0;
    double span_upper = 0.0;
    bool converged = false;
};

struct PolicyTable {
    std::vector<int> action;  // 1-based sensor per enumerated state
};

struct BellmanResult {
    std::vector<double> h_out;
    double lambda = 0.0;
    double delta_lower = 0.0;
    double delta_upper = 0.0;
};

// One relative-value-iteration loop body: computes lambda at the reference
// state, the normalized next table (h_out(ref) = 0), and the span deltas of
// the pre-subtraction backup against h_in.
BellmanResult bellman_backup(const StateSpace& space, const std::vector<double>& h_in,
                             std::size_t reference, double damping = 1.0);

struct RviTraceRow {
    long iteration = 0;
    double delta_lower = 0.0;
    double delta_upper = 0.0;
    double lambda = 0.0;
};

struct RviOptions {
    double epsilon = 1e-6;
    long max_iters = 100000;
    double damping = 1.0;
    std::optional<SystemState> reference;       // defaults to (all 1, all Q)
    std::vector<RviTraceRow>* trace = nullptr;  // per-iteration convergence log
};

std::pair<ValueTable, PolicyTable> relative_value_iteration(const StateSpace& space,
                                                            const RviOptions& opts = {});

// Greedy policy from a value table; ties break to the lowest sensor index.
PolicyTable greedy_policy(const StateSpace& space, const std::vector<double>& h,
                          double damping = 1.0);

// argmin_a C(state, a), ties to the lowest sensor index.
int myopic_action(const SystemSpec& spec, const SystemState& state);

struct MonotonicityReport {
    bool ok = true;
    // Violating (state index, source) pair when ok is false.
    std::size_t state_index = 0;
    int source = 0;
};

// Checks that a table is nondecreasing in each source's AoI.
MonotonicityReport check_monotone(const StateSpace& space, const std::vector<double>& table,
                                  double tol = 1e-9);

// Runs discounted value iteration from V = 0 and checks monotonicity of the
// resulting table in every AoI coordinate.
MonotonicityReport verify_monotonicity(const StateSpace& space, double alpha, int sweeps,
                                       double tol = 1e-9);

}  // namespace aoi
