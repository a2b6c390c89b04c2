#include "aoi/pomdp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace aoi {

namespace {

int argmax_lowest(const Eigen::VectorXd& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = i;
    return best;
}

}  // namespace

StateBelief uniform_state_belief(const SystemSpec& spec) {
    StateBelief b;
    for (const auto& src : spec.sources)
        b.per_source.push_back(Eigen::VectorXd::Constant(src.num_states, 1.0 / src.num_states));
    return b;
}

StateBelief stationary_state_belief(const SystemSpec& spec) {
    StateBelief b;
    for (const auto& src : spec.sources) b.per_source.push_back(stationary_distribution(src));
    return b;
}

StateBelief update_state_belief(const SystemSpec& spec, const StateBelief& belief,
                                const ObservationRecord& obs, bool reveal) {
    const int k = spec.num_sources();
    const int a = obs.action;
    const double qa = spec.channel(a - 1);
    StateBelief out;
    out.per_source.resize(k);
    for (int i = 0; i < k; ++i) {
        const auto& src = spec.sources[i];
        Eigen::VectorXd posterior(src.num_states);
        if (reveal && obs.observed[i]) {
            int true_state = obs.true_states_of_observed[i];
            posterior.setZero();
            posterior(true_state - 1) = 1.0;
        } else {
            for (int s = 0; s < src.num_states; ++s) {
                double p = src.obs_prob(a - 1, s);
                double like = obs.channel_ok
                                  ? qa * (obs.observed[i] ? p : 1.0 - p)
                                  : 1.0 - qa;
                posterior(s) = like * belief.per_source[i](s);
            }
            double norm = posterior.sum();
            if (norm < 1e-300) throw std::runtime_error("zero-likelihood observation");
            posterior /= norm;
        }
        out.per_source[i] = src.transition.transpose() * posterior;
    }
    return out;
}

Eigen::MatrixXd effective_obs_probs(const SystemSpec& spec) {
    const int k = spec.num_sources();
    Eigen::MatrixXd p_hat(spec.num_sensors, k);
    for (int i = 0; i < k; ++i) {
        Eigen::VectorXd beta = stationary_distribution(spec.sources[i]);
        p_hat.col(i) = spec.sources[i].obs_prob * beta;
    }
    return p_hat;
}

AoIBelief update_aoi_belief(const SystemSpec& spec, const AoIBelief& belief, int a,
                            const Eigen::MatrixXd& p_hat) {
    const int k = spec.num_sources();
    const double qa = spec.channel(a - 1);
    AoIBelief out;
    out.per_source.resize(k);
    for (int i = 0; i < k; ++i) {
        const auto& b = belief.per_source[i];
        const int q = static_cast<int>(b.size());
        const double reset = qa * p_hat(a - 1, i);
        Eigen::VectorXd nb(q);
        nb(0) = reset;
        for (int d = 1; d < q; ++d) nb(d) = b(d - 1) * (1.0 - reset);
        nb(q - 1) += b(q - 1) * (1.0 - reset);  // top bin absorbs the tail
        out.per_source[i] = std::move(nb);
    }
    return out;
}

namespace {

struct Moments {
    double exp_pq;   // q_a * E[p_ak^(s_k)]
    double exp_aoi;  // E[Delta_k]
};

Moments source_moments(const SystemSpec& spec, const BeliefFactors& f, int i, int a) {
    const auto& src = spec.sources[i];
    const double qa = spec.channel(a - 1);
    Moments m{};
    if (f.known_states[i] >= 1) {
        m.exp_pq = qa * src.obs_prob(a - 1, f.known_states[i] - 1);
    } else {
        if (!f.state_belief) throw std::invalid_argument("missing state belief factor");
        m.exp_pq = qa * src.obs_prob.row(a - 1).dot(f.state_belief->per_source[i]);
    }
    if (f.known_aoi[i] >= 1) {
        m.exp_aoi = f.known_aoi[i];
    } else {
        if (!f.aoi_belief) throw std::invalid_argument("missing aoi belief factor");
        const auto& b = f.aoi_belief->per_source[i];
        m.exp_aoi = 0.0;
        for (int d = 0; d < b.size(); ++d) m.exp_aoi += (d + 1) * b(d);
    }
    return m;
}

}  // namespace

double expected_cost(const SystemSpec& spec, const BeliefFactors& factors, int a) {
    const int k = spec.num_sources();
    if (static_cast<int>(factors.known_states.size()) != k ||
        static_cast<int>(factors.known_aoi.size()) != k)
        throw std::invalid_argument("belief factor dimension mismatch");
    double mean = 0.0, cleared = 0.0;
    for (int i = 0; i < k; ++i) {
        auto m = source_moments(spec, factors, i, a);
        mean += m.exp_aoi;
        cleared += m.exp_pq * m.exp_aoi;
    }
    return (mean - cleared) / k + 1.0;
}

namespace {

SystemState ml_state(const SystemSpec& spec, const BeliefFactors& f) {
    const int k = spec.num_sources();
    SystemState st;
    st.source_states.resize(k);
    st.aoi.resize(k);
    for (int i = 0; i < k; ++i) {
        st.source_states[i] = f.known_states[i] >= 1
                                  ? f.known_states[i]
                                  : argmax_lowest(f.state_belief->per_source[i]) + 1;
        st.aoi[i] = f.known_aoi[i] >= 1 ? f.known_aoi[i]
                                        : argmax_lowest(f.aoi_belief->per_source[i]) + 1;
    }
    return st;
}

std::size_t encode_clamped(const StateSpace& space, SystemState st) {
    for (auto& d : st.aoi) d = std::min(d, space.trunc_q());
    return space.encode(st);
}

// Evaluates one full state against the table (or myopically).
double state_value(const SystemSpec& spec, const QTableRef* table, const SystemState& st,
                   int a) {
    if (table && table->q) {
        std::size_t idx = encode_clamped(*table->space, st);
        return (*table->q)[idx * spec.num_sensors + (a - 1)];
    }
    return cost(spec, st, a);
}

template <typename Visit>
void enumerate_support(const SystemSpec& spec, const BeliefFactors& f, std::size_t support_cap,
                       Visit&& visit) {
    const int k = spec.num_sources();
    std::size_t support = 1;
    for (int i = 0; i < k; ++i) {
        if (f.known_states[i] < 1) support *= spec.sources[i].num_states;
        if (f.known_aoi[i] < 1) support *= f.aoi_belief->per_source[i].size();
        if (support > support_cap) throw std::runtime_error("support too large");
    }
    SystemState st;
    st.source_states.assign(k, 0);
    st.aoi.assign(k, 0);
    // Depth-first product over 2K slots (state then AoI per source).
    auto rec = [&](auto&& self, int slot, double w) -> void {
        if (w == 0.0) return;
        if (slot == 2 * k) {
            visit(st, w);
            return;
        }
        int i = slot / 2;
        if (slot % 2 == 0) {
            if (f.known_states[i] >= 1) {
                st.source_states[i] = f.known_states[i];
                self(self, slot + 1, w);
            } else {
                const auto& b = f.state_belief->per_source[i];
                for (int s = 0; s < b.size(); ++s) {
                    st.source_states[i] = s + 1;
                    self(self, slot + 1, w * b(s));
                }
            }
        } else {
            if (f.known_aoi[i] >= 1) {
                st.aoi[i] = f.known_aoi[i];
                self(self, slot + 1, w);
            } else {
                const auto& b = f.aoi_belief->per_source[i];
                for (int d = 0; d < b.size(); ++d) {
                    st.aoi[i] = d + 1;
                    self(self, slot + 1, w * b(d));
                }
            }
        }
    };
    rec(rec, 0, 1.0);
}

// argmin; with rng set, values within a small relative tolerance of the
// minimum count as tied and are broken uniformly. Theoretically indifferent
// actions differ by solver round-off (~1 ulp), so exact comparison would
// deterministically fixate on one sensor.
int argmin_action(const std::vector<double>& obj, Rng* tie_rng) {
    int best = 0;
    for (int a = 1; a < static_cast<int>(obj.size()); ++a)
        if (obj[a] < obj[best]) best = a;
    if (tie_rng) {
        const double tol = 1e-9 * (1.0 + std::abs(obj[best]));
        std::vector<int> ties;
        for (int a = 0; a < static_cast<int>(obj.size()); ++a)
            if (obj[a] <= obj[best] + tol) ties.push_back(a);
        if (ties.size() > 1) best = ties[tie_rng->below(ties.size())];
    }
    return best + 1;
}

SystemState sample_state(const SystemSpec& spec, const BeliefFactors& f, Rng& rng) {
    const int k = spec.num_sources();
    SystemState st;
    st.source_states.resize(k);
    st.aoi.resize(k);
    for (int i = 0; i < k; ++i) {
        st.source_states[i] = f.known_states[i] >= 1
                                  ? f.known_states[i]
                                  : rng.categorical(f.state_belief->per_source[i]) + 1;
        st.aoi[i] = f.known_aoi[i] >= 1 ? f.known_aoi[i]
                                        : rng.categorical(f.aoi_belief->per_source[i]) + 1;
    }
    return st;
}

}  // namespace

int ml_action(const SystemSpec& spec, const BeliefFactors& factors, const QTableRef* table,
              Rng* tie_rng) {
    SystemState st = ml_state(spec, factors);
    std::vector<double> obj(spec.num_sensors);
    for (int a = 1; a <= spec.num_sensors; ++a) obj[a - 1] = state_value(spec, table, st, a);
    return argmin_action(obj, tie_rng);
}

double qmdp_objective(const SystemSpec& spec, const BeliefFactors& factors,
                      const QTableRef* table, int a, std::optional<QmdpSampled> sampled,
                      std::size_t support_cap) {
    // Without a value table the objective is the belief-expected one-step
    // cost, which factorizes exactly (the belief is a product measure), so
    // enumeration and sampling are never needed.
    if (!sampled && !(table && table->q)) return expected_cost(spec, factors, a);
    if (sampled) {
        if (sampled->count < 1 || !sampled->rng)
            throw std::invalid_argument("sampled mode requires count >= 1 and an rng");
        double acc = 0.0;
        for (int i = 0; i < sampled->count; ++i)
            acc += state_value(spec, table, sample_state(spec, factors, *sampled->rng), a);
        return acc / sampled->count;
    }
    double acc = 0.0;
    enumerate_support(spec, factors, support_cap, [&](const SystemState& st, double w) {
        acc += w * state_value(spec, table, st, a);
    });
    return acc;
}

int qmdp_action(const SystemSpec& spec, const BeliefFactors& factors, const QTableRef* table,
                std::optional<QmdpSampled> sampled, std::size_t support_cap, Rng* tie_rng) {
    const int n = spec.num_sensors;
    const int k = spec.num_sources();
    std::vector<double> obj(n, 0.0);
    if (!sampled && !(table && table->q)) {
        // Myopic shortcut: the AoI expectation is action-independent, so it
        // is hoisted out of the action loop (belief supports can be long).
        std::vector<double> exp_aoi(k);
        double mean = 0.0;
        for (int i = 0; i < k; ++i) {
            if (factors.known_aoi[i] >= 1) {
                exp_aoi[i] = factors.known_aoi[i];
            } else {
                if (!factors.aoi_belief) throw std::invalid_argument("missing aoi belief factor");
                const auto& b = factors.aoi_belief->per_source[i];
                exp_aoi[i] = 0.0;
                for (int d = 0; d < b.size(); ++d) exp_aoi[i] += (d + 1) * b(d);
            }
            mean += exp_aoi[i];
        }
        for (int a = 1; a <= n; ++a) {
            const double qa = spec.channel(a - 1);
            double cleared = 0.0;
            for (int i = 0; i < k; ++i) {
                const auto& src = spec.sources[i];
                double pq;
                if (factors.known_states[i] >= 1) {
                    pq = qa * src.obs_prob(a - 1, factors.known_states[i] - 1);
                } else {
                    if (!factors.state_belief)
                        throw std::invalid_argument("missing state belief factor");
                    pq = qa * src.obs_prob.row(a - 1).dot(factors.state_belief->per_source[i]);
                }
                cleared += pq * exp_aoi[i];
            }
            obj[a - 1] = (mean - cleared) / k + 1.0;
        }
    } else if (sampled) {
        if (sampled->count < 1 || !sampled->rng)
            throw std::invalid_argument("sampled mode requires count >= 1 and an rng");
        // Common samples across actions keep the argmin deterministic.
        for (int i = 0; i < sampled->count; ++i) {
            SystemState st = sample_state(spec, factors, *sampled->rng);
            for (int a = 1; a <= n; ++a) obj[a - 1] += state_value(spec, table, st, a);
        }
    } else {
        enumerate_support(spec, factors, support_cap, [&](const SystemState& st, double w) {
            for (int a = 1; a <= n; ++a) obj[a - 1] += w * state_value(spec, table, st, a);
        });
    }
    return argmin_action(obj, tie_rng);
}

}  // namespace aoi
