#include "aoi/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aoi {

namespace {

bool partial_mode(Observability o) { return o != Observability::full; }

void check_compat(const PolicyHandle& policy) {
    switch (policy.kind) {
        case PolicyKind::random:
            break;
        case PolicyKind::myopic:
            if (partial_mode(policy.observability))
                throw std::invalid_argument("myopic policy requires full observability");
            break;
        case PolicyKind::optimal:
            if (partial_mode(policy.observability))
                throw std::invalid_argument("optimal policy requires full observability");
            if (!policy.space || !policy.policy)
                throw std::invalid_argument("optimal policy requires a state space and table");
            break;
        case PolicyKind::ml:
        case PolicyKind::qmdp:
            if (!partial_mode(policy.observability))
                throw std::invalid_argument("belief policies require partial observability");
            if (policy.q && !policy.space)
                throw std::invalid_argument("value table requires its state space");
            break;
    }
    if (policy.custom_partial && !partial_mode(policy.observability))
        throw std::invalid_argument("custom partial policy requires partial observability");
}

std::size_t encode_clamped(const StateSpace& space, SystemState st) {
    for (auto& d : st.aoi) d = std::min(d, space.trunc_q());
    return space.encode(st);
}

}  // namespace

SystemSpec stateless_equivalent(const SystemSpec& spec) {
    Eigen::MatrixXd p_hat = effective_obs_probs(spec);
    SystemSpec out;
    out.num_sensors = spec.num_sensors;
    out.channel = spec.channel;
    for (int i = 0; i < spec.num_sources(); ++i) {
        SourceSpec s;
        s.num_states = 1;
        s.transition = Eigen::MatrixXd::Ones(1, 1);
        s.obs_prob = p_hat.col(i);
        out.sources.push_back(std::move(s));
    }
    return out;
}

EpisodeStats run_episode(const SystemSpec& spec, const PolicyHandle& policy, long slots,
                         long burn_in, std::uint64_t seed, const EpisodeOptions& opts) {
    if (burn_in < 0 || burn_in >= slots) throw std::invalid_argument("require 0 <= burn_in < slots");
    check_compat(policy);
    const int k = spec.num_sources();
    const int n = spec.num_sensors;

    Rng root(seed);
    Rng proc = root.child(0);
    Rng pol = root.child(1);
    Rng init_rng = root.child(2);

    SystemState state;
    if (opts.initial) {
        state = *opts.initial;
        if (static_cast<int>(state.source_states.size()) != k ||
            static_cast<int>(state.aoi.size()) != k)
            throw std::invalid_argument("initial state dimension mismatch");
    } else {
        state.source_states.resize(k);
        state.aoi.assign(k, 1);
        for (int i = 0; i < k; ++i)
            state.source_states[i] = init_rng.categorical(stationary_distribution(spec.sources[i])) + 1;
    }

    const bool undetectable = policy.observability == Observability::undetectable;
    const bool detectable = policy.observability == Observability::detectable ||
                            policy.observability == Observability::detectable_reveal;
    const bool reveal = policy.observability == Observability::detectable_reveal;

    // Belief machinery (only the pieces the mode needs).
    SystemSpec reduced;
    Eigen::MatrixXd p_hat;
    StateBelief state_belief;
    AoIBelief aoi_belief;
    if (detectable) state_belief = stationary_state_belief(spec);
    if (undetectable) {
        reduced = stateless_equivalent(spec);
        p_hat = effective_obs_probs(spec);
        // A value table cannot distinguish AoIs beyond its truncation, so
        // align the belief support with it; the top bin absorbs the tail.
        int bins = policy.q ? policy.space->trunc_q() : std::max(policy.belief_aoi_bins, 1);
        aoi_belief.per_source.assign(k, Eigen::VectorXd::Unit(bins, 0));
    }
    const SystemSpec& policy_spec = undetectable ? reduced : spec;
    QTableRef table{policy.space, policy.q};
    const QTableRef* table_ptr = policy.q ? &table : nullptr;

    ObservationRecord last_obs;
    bool have_obs = false;
    std::vector<int> known_all_one(k, 1);
    std::vector<int> known_zero(k, 0);

    auto choose = [&](const SystemState& st) -> int {
        if (policy.custom_partial) {
            PartialInfo info;
            info.spec = &policy_spec;
            info.known_aoi = detectable ? &st.aoi : nullptr;
            info.state_belief = detectable ? &state_belief : nullptr;
            info.aoi_belief = undetectable ? &aoi_belief : nullptr;
            info.last_obs = have_obs ? &last_obs : nullptr;
            return policy.custom_partial(info);
        }
        switch (policy.kind) {
            case PolicyKind::random:
                return static_cast<int>(pol.below(n)) + 1;
            case PolicyKind::myopic:
                return myopic_action(spec, st);
            case PolicyKind::optimal:
                return policy.policy->action[encode_clamped(*policy.space, st)];
            case PolicyKind::ml:
            case PolicyKind::qmdp: {
                BeliefFactors f;
                if (detectable) {
                    f.known_states = known_zero;
                    f.known_aoi = st.aoi;
                    f.state_belief = &state_belief;
                } else {
                    f.known_states = known_all_one;
                    f.known_aoi = known_zero;
                    f.aoi_belief = &aoi_belief;
                }
                if (policy.kind == PolicyKind::ml)
                    return ml_action(policy_spec, f, table_ptr, &pol);
                std::optional<QmdpSampled> sampled;
                if (policy.qmdp_samples) sampled = QmdpSampled{*policy.qmdp_samples, &pol};
                return qmdp_action(policy_spec, f, table_ptr, sampled, 1u << 20, &pol);
            }
        }
        throw std::logic_error("unreachable");
    };

    Eigen::VectorXd accum = Eigen::VectorXd::Zero(k);
    long counted = 0;
    for (long t = 1; t <= slots; ++t) {
        int a = choose(state);
        if (opts.trace) opts.trace->slots.push_back({state.aoi, a});
        if (t > burn_in) {
            for (int i = 0; i < k; ++i) accum(i) += state.aoi[i];
            ++counted;
        }
        std::vector<int> pre_states = state.source_states;
        StepOutcome out = step(spec, state, a, proc);
        if (detectable) {
            last_obs.channel_ok = out.channel_ok;
            last_obs.observed = out.observed;
            last_obs.action = a;
            last_obs.true_states_of_observed.assign(k, 0);
            if (reveal)
                for (int i = 0; i < k; ++i)
                    if (out.observed[i]) last_obs.true_states_of_observed[i] = pre_states[i];
            have_obs = true;
            state_belief = update_state_belief(spec, state_belief, last_obs, reveal);
        } else if (undetectable) {
            aoi_belief = update_aoi_belief(reduced, aoi_belief, a, p_hat);
        }
        state = std::move(out.next_state);
    }

    EpisodeStats stats;
    stats.mean_aoi_per_source = accum / static_cast<double>(counted);
    stats.mean_aoi_overall = stats.mean_aoi_per_source.mean();
    stats.slots_counted = counted;
    stats.burn_in_discarded = burn_in;
    stats.seed = seed;
    return stats;
}

ReplicateStats replicate(const SystemSpec& spec, const PolicyHandle& policy, long slots,
                         long burn_in, int runs, std::uint64_t master_seed,
                         const EpisodeOptions& opts) {
    if (runs < 1) throw std::invalid_argument("runs must be >= 1");
    Rng master(master_seed);
    ReplicateStats agg;
    agg.runs.reserve(runs);
    for (int i = 0; i < runs; ++i)
        agg.runs.push_back(run_episode(spec, policy, slots, burn_in, master.child(i).seed(), opts));
    for (const auto& r : agg.runs) agg.mean += r.mean_aoi_overall;
    agg.mean /= runs;
    if (runs > 1) {
        double ss = 0.0;
        for (const auto& r : agg.runs) {
            double d = r.mean_aoi_overall - agg.mean;
            ss += d * d;
        }
        agg.std_error = std::sqrt(ss / (runs - 1)) / std::sqrt(static_cast<double>(runs));
    }
    return agg;
}

std::vector<std::vector<int>> policy_map(const SystemSpec& spec,
                                         const std::function<int(const SystemState&)>& act,
                                         const std::vector<int>& source_states, int aoi_min,
                                         int aoi_max) {
    if (spec.num_sources() != 2) throw std::invalid_argument("policy_map requires K = 2");
    if (aoi_min < 1 || aoi_max < aoi_min) throw std::invalid_argument("bad aoi range");
    const int m = aoi_max - aoi_min + 1;
    std::vector<std::vector<int>> grid(m, std::vector<int>(m, 0));
    SystemState st;
    st.source_states = source_states;
    st.aoi = {0, 0};
    for (int i = 0; i < m; ++i) {
        st.aoi[0] = aoi_min + i;
        for (int j = 0; j < m; ++j) {
            st.aoi[1] = aoi_min + j;
            grid[i][j] = act(st);
        }
    }
    return grid;
}

}  // namespace aoi
