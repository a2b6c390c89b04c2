#include "aoi/model.hpp"

#include <Eigen/LU>
#include <numeric>
#include <stdexcept>

namespace aoi {

namespace {

constexpr double kStochasticTol = 1e-12;

// Strong connectivity of the support graph via forward/backward reachability.
bool is_irreducible(const Eigen::MatrixXd& r) {
    const int n = static_cast<int>(r.rows());
    auto reach = [&](bool transpose) {
        std::vector<char> seen(n, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n; ++v) {
                double w = transpose ? r(v, u) : r(u, v);
                if (w > 0.0 && !seen[v]) {
                    seen[v] = 1;
                    stack.push_back(v);
                }
            }
        }
        return seen;
    };
    auto fwd = reach(false);
    auto bwd = reach(true);
    for (int v = 0; v < n; ++v) {
        if (!fwd[v] || !bwd[v]) return false;
    }
    return true;
}

// Aperiodicity of an irreducible chain: gcd over edges (u,v) of
// depth(u) + 1 - depth(v), with BFS depths from state 0.
bool is_aperiodic(const Eigen::MatrixXd& r) {
    const int n = static_cast<int>(r.rows());
    std::vector<int> depth(n, -1);
    std::vector<int> queue{0};
    depth[0] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        int u = queue[head];
        for (int v = 0; v < n; ++v) {
            if (r(u, v) > 0.0 && depth[v] < 0) {
                depth[v] = depth[u] + 1;
                queue.push_back(v);
            }
        }
    }
    int g = 0;
    for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
            if (r(u, v) > 0.0) g = std::gcd(g, std::abs(depth[u] + 1 - depth[v]));
        }
    }
    return g == 1;
}

void check_state(const SystemSpec& spec, const SystemState& state) {
    const int k = spec.num_sources();
    if (static_cast<int>(state.source_states.size()) != k ||
        static_cast<int>(state.aoi.size()) != k) {
        throw std::invalid_argument("state dimension does not match spec");
    }
    for (int i = 0; i < k; ++i) {
        if (state.source_states[i] < 1 || state.source_states[i] > spec.sources[i].num_states)
            throw std::invalid_argument("source state out of range");
        if (state.aoi[i] < 1) throw std::invalid_argument("aoi must be >= 1");
    }
}

void check_action(const SystemSpec& spec, int a) {
    if (a < 1 || a > spec.num_sensors) throw std::out_of_range("action out of range");
}

}  // namespace

std::vector<std::string> validate(const SystemSpec& spec) {
    std::vector<std::string> out;
    if (spec.num_sensors < 1) out.push_back("sensors.count: must be >= 1");
    if (spec.sources.empty()) out.push_back("sources: must contain at least one source");
    if (spec.channel.size() != spec.num_sensors)
        out.push_back("sensors.channel: length does not match sensors.count");
    for (int n = 0; n < spec.channel.size(); ++n) {
        if (spec.channel(n) < 0.0 || spec.channel(n) > 1.0)
            out.push_back("sensors.channel[" + std::to_string(n) + "]: not in [0,1]");
    }
    for (int k = 0; k < spec.num_sources(); ++k) {
        const auto& src = spec.sources[k];
        const std::string base = "sources[" + std::to_string(k) + "]";
        if (src.num_states < 1) {
            out.push_back(base + ".num_states: must be >= 1");
            continue;
        }
        if (src.transition.rows() != src.num_states || src.transition.cols() != src.num_states) {
            out.push_back(base + ".transition: shape mismatch");
            continue;
        }
        bool rows_ok = true;
        for (int i = 0; i < src.num_states; ++i) {
            double sum = src.transition.row(i).sum();
            if (std::abs(sum - 1.0) > kStochasticTol) {
                out.push_back(base + ".transition[" + std::to_string(i) + "]: row sums to " +
                              std::to_string(sum));
                rows_ok = false;
            }
            for (int j = 0; j < src.num_states; ++j) {
                if (src.transition(i, j) < 0.0 || src.transition(i, j) > 1.0) {
                    out.push_back(base + ".transition[" + std::to_string(i) + "][" +
                                  std::to_string(j) + "]: not in [0,1]");
                    rows_ok = false;
                }
            }
        }
        if (rows_ok && !is_irreducible(src.transition))
            out.push_back(base + ".transition: not irreducible");
        else if (rows_ok && !is_aperiodic(src.transition))
            out.push_back(base + ".transition: not aperiodic");
        if (src.obs_prob.rows() != spec.num_sensors || src.obs_prob.cols() != src.num_states) {
            out.push_back(base + ".obs_prob: shape mismatch");
            continue;
        }
        double reach = 0.0;
        for (int n = 0; n < spec.num_sensors; ++n) {
            for (int s = 0; s < src.num_states; ++s) {
                double p = src.obs_prob(n, s);
                if (p < 0.0 || p > 1.0)
                    out.push_back(base + ".obs_prob[" + std::to_string(n) + "][" +
                                  std::to_string(s) + "]: not in [0,1]");
                reach += spec.channel.size() > n ? spec.channel(n) * p : 0.0;
            }
        }
        if (reach <= 0.0) out.push_back(base + ": unobservable (sum_n sum_s q_n p = 0)");
    }
    return out;
}

Eigen::VectorXd stationary_distribution(const SourceSpec& source) {
    const int n = source.num_states;
    // (R^T - I) beta = 0 with the last equation replaced by sum(beta) = 1.
    Eigen::MatrixXd a = source.transition.transpose() - Eigen::MatrixXd::Identity(n, n);
    a.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) throw std::runtime_error("singular chain");
    Eigen::VectorXd beta = lu.solve(rhs);
    double residual = (beta.transpose() * source.transition - beta.transpose()).cwiseAbs().maxCoeff();
    if (residual > 1e-10) throw std::runtime_error("singular chain");
    return beta;
}

double cost(const SystemSpec& spec, const SystemState& state, int a) {
    check_state(spec, state);
    check_action(spec, a);
    const int k = spec.num_sources();
    const double qa = spec.channel(a - 1);
    double mean_aoi = 0.0;
    double cleared = 0.0;
    for (int i = 0; i < k; ++i) {
        mean_aoi += state.aoi[i];
        cleared += spec.obs(a, i, state.source_states[i]) * qa * state.aoi[i];
    }
    return mean_aoi / k + 1.0 - cleared / k;
}

StepOutcome step(const SystemSpec& spec, const SystemState& state, int a, Rng& rng,
                 int trunc_q) {
    check_state(spec, state);
    check_action(spec, a);
    const int k = spec.num_sources();
    StepOutcome out;
    out.observed.assign(k, 0);
    out.channel_ok = rng.bernoulli(spec.channel(a - 1));
    out.next_state.source_states.resize(k);
    out.next_state.aoi.resize(k);
    for (int i = 0; i < k; ++i) {
        // Detection indicators use the pre-transition source state.
        if (out.channel_ok && rng.bernoulli(spec.obs(a, i, state.source_states[i])))
            out.observed[i] = 1;
        int next_aoi = out.observed[i] ? 1 : state.aoi[i] + 1;
        if (trunc_q > 0 && next_aoi > trunc_q) next_aoi = trunc_q;
        out.next_state.aoi[i] = next_aoi;
        const auto& row = spec.sources[i].transition.row(state.source_states[i] - 1);
        out.next_state.source_states[i] = rng.categorical(row) + 1;
    }
    return out;
}

std::vector<std::pair<SystemState, double>> transition_distribution(
    const SystemSpec& spec, const SystemState& state, int a, int trunc_q,
    std::size_t support_cap) {
    check_state(spec, state);
    check_action(spec, a);
    if (trunc_q < 1) throw std::invalid_argument("truncation bound required");
    const int k = spec.num_sources();
    const double qa = spec.channel(a - 1);

    // Reset-pattern branches: channel failure (no resets) plus, on success,
    // every subset of detections weighted by prod p^z (1-p)^(1-z).
    struct Branch {
        std::vector<char> reset;
        double prob;
    };
    std::vector<Branch> branches;
    if (qa < 1.0) branches.push_back({std::vector<char>(k, 0), 1.0 - qa});
    if (qa > 0.0) {
        std::vector<Branch> subsets{{std::vector<char>(k, 0), qa}};
        for (int i = 0; i < k; ++i) {
            double p = spec.obs(a, i, state.source_states[i]);
            std::vector<Branch> next;
            next.reserve(subsets.size() * 2);
            for (const auto& b : subsets) {
                if (p < 1.0) {
                    auto nb = b;
                    nb.prob *= (1.0 - p);
                    next.push_back(std::move(nb));
                }
                if (p > 0.0) {
                    auto nb = b;
                    nb.reset[i] = 1;
                    nb.prob *= p;
                    next.push_back(std::move(nb));
                }
            }
            subsets = std::move(next);
        }
        for (auto& b : subsets) branches.push_back(std::move(b));
    }

    std::vector<std::pair<SystemState, double>> out;
    for (const auto& branch : branches) {
        std::vector<std::pair<SystemState, double>> partial;
        SystemState base;
        base.aoi.resize(k);
        for (int i = 0; i < k; ++i)
            base.aoi[i] = branch.reset[i] ? 1 : std::min(trunc_q, state.aoi[i] + 1);
        partial.push_back({base, branch.prob});
        // Product over per-source transition rows.
        for (int i = 0; i < k; ++i) {
            const auto& row = spec.sources[i].transition.row(state.source_states[i] - 1);
            std::vector<std::pair<SystemState, double>> next;
            for (const auto& [st, pr] : partial) {
                for (int j = 0; j < spec.sources[i].num_states; ++j) {
                    if (row(j) <= 0.0) continue;
                    auto ns = st;
                    ns.source_states.push_back(j + 1);
                    next.push_back({std::move(ns), pr * row(j)});
                }
            }
            partial = std::move(next);
            if (partial.size() + out.size() > support_cap)
                throw std::runtime_error("support too large");
        }
        out.insert(out.end(), partial.begin(), partial.end());
    }
    return out;
}

SystemSpec expand_capacity_constraint(const SystemSpec& spec, int capacity,
                                      std::size_t sensor_cap) {
    const int k = spec.num_sources();
    if (capacity < 1 || capacity > k) throw std::invalid_argument("capacity out of range");

    // All C-subsets of {0..K-1} in lexicographic order.
    std::vector<std::vector<int>> subsets;
    std::vector<int> idx(capacity);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        subsets.push_back(idx);
        int i = capacity - 1;
        while (i >= 0 && idx[i] == k - capacity + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < capacity; ++j) idx[j] = idx[j - 1] + 1;
    }
    const std::size_t total = static_cast<std::size_t>(spec.num_sensors) * subsets.size();
    if (total > sensor_cap) throw std::runtime_error("virtual sensor count exceeds cap");

    SystemSpec out;
    out.num_sensors = static_cast<int>(total);
    out.channel.resize(out.num_sensors);
    out.sources.resize(k);
    for (int i = 0; i < k; ++i) {
        out.sources[i].num_states = spec.sources[i].num_states;
        out.sources[i].transition = spec.sources[i].transition;
        out.sources[i].obs_prob =
            Eigen::MatrixXd::Zero(out.num_sensors, spec.sources[i].num_states);
    }
    int row = 0;
    for (int n = 0; n < spec.num_sensors; ++n) {
        for (const auto& subset : subsets) {
            out.channel(row) = spec.channel(n);
            for (int i : subset)
                out.sources[i].obs_prob.row(row) = spec.sources[i].obs_prob.row(n);
            ++row;
        }
    }
    return out;
}

}  // namespace aoi
