#include "aoi/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "aoi/kernels.hpp"

namespace aoi {

namespace {

using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajorMat>;

}  // namespace

StateSpace::StateSpace(SystemSpec spec, int trunc_q)
    : spec_(std::move(spec)), trunc_q_(trunc_q) {
    if (trunc_q_ < 1) throw std::invalid_argument("trunc_q must be >= 1");
    const int k = spec_.num_sources();
    const int n = spec_.num_sensors;
    for (const auto& src : spec_.sources) s_joint_ *= src.num_states;
    for (int i = 0; i < k; ++i) aoi_count_ *= trunc_q_;
    total_states_ = s_joint_ * aoi_count_;

    aoi_pow_.assign(k, 1);
    for (int i = k - 2; i >= 0; --i) aoi_pow_[i] = aoi_pow_[i + 1] * trunc_q_;

    // Joint source transition matrix over the mixed-radix sigma index.
    joint_transition_ = RowMajorMat::Ones(s_joint_, s_joint_);
    std::vector<std::size_t> spow(k, 1);
    for (int i = k - 2; i >= 0; --i) spow[i] = spow[i + 1] * spec_.sources[i + 1].num_states;
    for (std::size_t from = 0; from < s_joint_; ++from) {
        for (std::size_t to = 0; to < s_joint_; ++to) {
            double p = 1.0;
            for (int i = 0; i < k; ++i) {
                int si = static_cast<int>(from / spow[i]) % spec_.sources[i].num_states;
                int sj = static_cast<int>(to / spow[i]) % spec_.sources[i].num_states;
                p *= spec_.sources[i].transition(si, sj);
            }
            joint_transition_(from, to) = p;
        }
    }

    // Reset-pattern branches and detection weights per (action, sigma).
    branches_.resize(static_cast<std::size_t>(n) * s_joint_);
    pq_.assign(static_cast<std::size_t>(n) * s_joint_ * k, 0.0);
    for (int a = 0; a < n; ++a) {
        const double qa = spec_.channel(a);
        for (std::size_t sigma = 0; sigma < s_joint_; ++sigma) {
            std::map<std::uint32_t, double> by_mask;
            if (qa < 1.0) by_mask[0] += 1.0 - qa;
            std::vector<std::pair<std::uint32_t, double>> partial{{0u, qa}};
            for (int i = 0; i < k; ++i) {
                int si = static_cast<int>(sigma / spow[i]) % spec_.sources[i].num_states;
                double p = spec_.sources[i].obs_prob(a, si);
                pq_[(static_cast<std::size_t>(a) * s_joint_ + sigma) * k + i] = p * qa;
                if (p <= 0.0 || qa <= 0.0) continue;
                std::vector<std::pair<std::uint32_t, double>> next;
                next.reserve(partial.size() * 2);
                for (auto [mask, w] : partial) {
                    if (p < 1.0) next.emplace_back(mask, w * (1.0 - p));
                    next.emplace_back(mask | (1u << i), w * p);
                }
                partial = std::move(next);
            }
            if (qa > 0.0)
                for (auto [mask, w] : partial) by_mask[mask] += w;
            auto& out = branches_[static_cast<std::size_t>(a) * s_joint_ + sigma];
            out.reserve(by_mask.size());
            for (auto [mask, w] : by_mask) out.push_back({w, mask});
        }
    }
}

std::size_t StateSpace::encode(const SystemState& state) const {
    const int k = spec_.num_sources();
    std::size_t sigma = 0;
    for (int i = 0; i < k; ++i) sigma = sigma * spec_.sources[i].num_states + (state.source_states[i] - 1);
    std::size_t aoi = 0;
    for (int i = 0; i < k; ++i) {
        if (state.aoi[i] < 1 || state.aoi[i] > trunc_q_)
            throw std::out_of_range("aoi outside truncated range");
        aoi = aoi * trunc_q_ + (state.aoi[i] - 1);
    }
    return sigma * aoi_count_ + aoi;
}

SystemState StateSpace::decode(std::size_t index) const {
    const int k = spec_.num_sources();
    SystemState st;
    st.source_states.resize(k);
    st.aoi.resize(k);
    std::size_t aoi = index % aoi_count_;
    std::size_t sigma = index / aoi_count_;
    for (int i = k - 1; i >= 0; --i) {
        st.aoi[i] = static_cast<int>(aoi % trunc_q_) + 1;
        aoi /= trunc_q_;
        st.source_states[i] = static_cast<int>(sigma % spec_.sources[i].num_states) + 1;
        sigma /= spec_.sources[i].num_states;
    }
    return st;
}

double StateSpace::cost_at(std::size_t index, int a) const {
    const int k = spec_.num_sources();
    auto st = decode(index);
    std::size_t sigma = index / aoi_count_;
    const double* pq = &pq_[(static_cast<std::size_t>(a - 1) * s_joint_ + sigma) * k];
    double mean = 0.0, cleared = 0.0;
    for (int i = 0; i < k; ++i) {
        mean += st.aoi[i];
        cleared += pq[i] * st.aoi[i];
    }
    return (mean - cleared) / k + 1.0;
}

void StateSpace::sweep(const std::vector<double>& h, std::vector<double>& out, double alpha,
                       double damping) const {
    const int k = spec_.num_sources();
    const int n = spec_.num_sensors;
    out.resize(total_states_);

    ConstMap hm(h.data(), s_joint_, aoi_count_);
    RowMajorMat g = joint_transition_ * hm;  // expected next h given next AoI index

    std::vector<int> digits(k, 0);          // AoI - 1 per source
    std::vector<std::size_t> inc(k);        // increment-clamped contribution per source
    for (std::size_t sigma = 0; sigma < s_joint_; ++sigma) {
        const double* grow = g.data() + sigma * aoi_count_;
        std::fill(digits.begin(), digits.end(), 0);
        for (std::size_t aoi = 0; aoi < aoi_count_; ++aoi) {
            std::size_t idx = sigma * aoi_count_ + aoi;
            std::size_t inc_all = 0;
            double aoi_sum = 0.0;
            for (int i = 0; i < k; ++i) {
                inc[i] = static_cast<std::size_t>(std::min(digits[i] + 1, trunc_q_ - 1)) *
                         aoi_pow_[i];
                inc_all += inc[i];
                aoi_sum += digits[i] + 1;
            }
            double best = std::numeric_limits<double>::infinity();
            for (int a = 0; a < n; ++a) {
                const double* pq = &pq_[(static_cast<std::size_t>(a) * s_joint_ + sigma) * k];
                double cleared = 0.0;
                for (int i = 0; i < k; ++i) cleared += pq[i] * (digits[i] + 1);
                double c = (aoi_sum - cleared) / k + 1.0;
                double ev = 0.0;
                for (const auto& b : branches_[static_cast<std::size_t>(a) * s_joint_ + sigma]) {
                    std::size_t next = inc_all;
                    std::uint32_t mask = b.reset_mask;
                    while (mask) {
                        int i = std::countr_zero(mask);
                        next -= inc[i];
                        mask &= mask - 1;
                    }
                    ev += b.prob * grow[next];
                }
                double val = c + alpha * ((1.0 - damping) * h[idx] + damping * ev);
                if (val < best) best = val;
            }
            out[idx] = best;
            // Odometer increment of the AoI digits.
            for (int i = k - 1; i >= 0; --i) {
                if (++digits[i] < trunc_q_) break;
                digits[i] = 0;
            }
        }
    }
}

std::vector<double> StateSpace::q_values(const std::vector<double>& h, double damping) const {
    const int k = spec_.num_sources();
    const int n = spec_.num_sensors;
    std::vector<double> q(total_states_ * n);

    ConstMap hm(h.data(), s_joint_, aoi_count_);
    RowMajorMat g = joint_transition_ * hm;

    std::vector<int> digits(k, 0);
    std::vector<std::size_t> inc(k);
    for (std::size_t sigma = 0; sigma < s_joint_; ++sigma) {
        const double* grow = g.data() + sigma * aoi_count_;
        std::fill(digits.begin(), digits.end(), 0);
        for (std::size_t aoi = 0; aoi < aoi_count_; ++aoi) {
            std::size_t idx = sigma * aoi_count_ + aoi;
            std::size_t inc_all = 0;
            double aoi_sum = 0.0;
            for (int i = 0; i < k; ++i) {
                inc[i] = static_cast<std::size_t>(std::min(digits[i] + 1, trunc_q_ - 1)) *
                         aoi_pow_[i];
                inc_all += inc[i];
                aoi_sum += digits[i] + 1;
            }
            for (int a = 0; a < n; ++a) {
                const double* pq = &pq_[(static_cast<std::size_t>(a) * s_joint_ + sigma) * k];
                double cleared = 0.0;
                for (int i = 0; i < k; ++i) cleared += pq[i] * (digits[i] + 1);
                double c = (aoi_sum - cleared) / k + 1.0;
                double ev = 0.0;
                for (const auto& b : branches_[static_cast<std::size_t>(a) * s_joint_ + sigma]) {
                    std::size_t next = inc_all;
                    std::uint32_t mask = b.reset_mask;
                    while (mask) {
                        int i = std::countr_zero(mask);
                        next -= inc[i];
                        mask &= mask - 1;
                    }
                    ev += b.prob * grow[next];
                }
                q[idx * n + a] = c + (1.0 - damping) * h[idx] + damping * ev;
            }
            for (int i = k - 1; i >= 0; --i) {
                if (++digits[i] < trunc_q_) break;
                digits[i] = 0;
            }
        }
    }
    return q;
}

BellmanResult bellman_backup(const StateSpace& space, const std::vector<double>& h_in,
                             std::size_t reference, double damping) {
    if (h_in.size() != space.total_states())
        throw std::invalid_argument("value table size mismatch");
    BellmanResult r;
    space.sweep(h_in, r.h_out, 1.0, damping);
    auto span = kern::diff_minmax(r.h_out.data(), h_in.data(), h_in.size());
    r.delta_lower = span.min;
    r.delta_upper = span.max;
    r.lambda = r.h_out[reference];
    kern::sub_scalar(r.h_out.data(), r.lambda, r.h_out.size());
    return r;
}

std::pair<ValueTable, PolicyTable> relative_value_iteration(const StateSpace& space,
                                                            const RviOptions& opts) {
    std::size_t ref = opts.reference ? space.encode(*opts.reference) : space.default_reference();
    ValueTable vt;
    vt.reference_state = ref;
    vt.h.assign(space.total_states(), 0.0);
    double lo_prev = -std::numeric_limits<double>::infinity();
    double hi_prev = std::numeric_limits<double>::infinity();
    constexpr double kBracketSlack = 1e-9;
    for (long it = 0; it < opts.max_iters; ++it) {
        auto r = bellman_backup(space, vt.h, ref, opts.damping);
        if (r.delta_lower < lo_prev - kBracketSlack || r.delta_upper > hi_prev + kBracketSlack)
            throw std::logic_error("span bracket not monotone");
        lo_prev = std::max(lo_prev, r.delta_lower);
        hi_prev = std::min(hi_prev, r.delta_upper);
        if (opts.trace)
            opts.trace->push_back({it + 1, r.delta_lower, r.delta_upper, r.lambda});
        vt.h = std::move(r.h_out);
        vt.span_lower = r.delta_lower;
        vt.span_upper = r.delta_upper;
        vt.iterations = it + 1;
        if (r.delta_upper - r.delta_lower < opts.epsilon) {
            vt.converged = true;
            break;
        }
    }
    vt.gain = 0.5 * (vt.span_upper + vt.span_lower);
    auto policy = greedy_policy(space, vt.h, opts.damping);
    return {std::move(vt), std::move(policy)};
}

PolicyTable greedy_policy(const StateSpace& space, const std::vector<double>& h,
                          double damping) {
    auto q = space.q_values(h, damping);
    const int n = space.num_actions();
    PolicyTable pt;
    pt.action.resize(space.total_states());
    for (std::size_t i = 0; i < space.total_states(); ++i) {
        int best = 0;
        for (int a = 1; a < n; ++a)
            if (q[i * n + a] < q[i * n + best]) best = a;
        pt.action[i] = best + 1;
    }
    return pt;
}

int myopic_action(const SystemSpec& spec, const SystemState& state) {
    int best = 1;
    double best_cost = cost(spec, state, 1);
    for (int a = 2; a <= spec.num_sensors; ++a) {
        double c = cost(spec, state, a);
        if (c < best_cost) {
            best_cost = c;
            best = a;
        }
    }
    return best;
}

MonotonicityReport check_monotone(const StateSpace& space, const std::vector<double>& table,
                                  double tol) {
    const int k = space.num_sources();
    const int q = space.trunc_q();
    std::vector<std::size_t> pow(k, 1);
    for (int i = k - 2; i >= 0; --i) pow[i] = pow[i + 1] * q;
    for (std::size_t idx = 0; idx < space.total_states(); ++idx) {
        auto st = space.decode(idx);
        for (int i = 0; i < k; ++i) {
            if (st.aoi[i] >= q) continue;
            if (table[idx + pow[i]] < table[idx] - tol) return {false, idx, i};
        }
    }
    return {};
}

MonotonicityReport verify_monotonicity(const StateSpace& space, double alpha, int sweeps,
                                       double tol) {
    std::vector<double> v(space.total_states(), 0.0), next;
    for (int i = 0; i < sweeps; ++i) {
        space.sweep(v, next, alpha, 1.0);
        std::swap(v, next);
    }
    return check_monotone(space, v, tol);
}

}  // namespace aoi
