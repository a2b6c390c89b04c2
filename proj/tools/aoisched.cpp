// Command-line front end: scenario ingestion, policy solving/simulation, and
// CSV emission. Exit codes: 0 success, 2 usage/config error, 3 numerical
// failure.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "aoi/analytic.hpp"
#include "aoi/csv.hpp"
#include "aoi/mdp.hpp"
#include "aoi/model.hpp"
#include "aoi/pomdp.hpp"
#include "aoi/scenarios.hpp"
#include "aoi/sim.hpp"

namespace {

constexpr const char* kVersion = "aoi-toolkit 0.1.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string scenario;
    std::string spec_file;
    double p = 0.5;
    double alpha = 0.1;
    double gamma = 0.5;
    std::string output;
    std::string out_dir;
    std::uint64_t seed = 1;
    long slots = 100000;
    long burn_in = 10000;
    bool no_burn_in = false;
    bool deterministic_init = false;
    int runs = 10;
    int trunc_q = 30;
    double epsilon = 1e-6;
    double damping = 1.0;
    double discount = 0.0;  // > 0: discounted VI instead of average-cost RVI
    int vi_sweeps = 300;
    int qmdp_samples = 0;  // 0 = exact
    std::vector<std::string> policies;
    std::string trace_file;
    // sweep
    std::string param;
    std::vector<double> values;
    // policy-map
    std::vector<int> map_states;
    int aoi_min = 1;
    int aoi_max = 20;
};

aoi::SystemSpec load_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("unreadable spec file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("spec file parse error: " + std::string(e.what()));
    }
    aoi::SystemSpec spec;
    try {
        spec.num_sensors = j.at("sensors").at("count").get<int>();
        auto q = j.at("sensors").at("channel").get<std::vector<double>>();
        spec.channel = Eigen::Map<Eigen::VectorXd>(q.data(), q.size());
        for (const auto& src : j.at("sources")) {
            auto rows = src.at("transition").get<std::vector<std::vector<double>>>();
            auto obs = src.at("obs_prob").get<std::vector<std::vector<double>>>();
            aoi::SourceSpec s;
            s.num_states = static_cast<int>(rows.size());
            s.transition.resize(s.num_states, s.num_states);
            for (int r = 0; r < s.num_states; ++r) {
                if (static_cast<int>(rows[r].size()) != s.num_states)
                    throw ConfigError("sources[i].transition: row " + std::to_string(r) +
                                      " is not square");
                for (int c = 0; c < s.num_states; ++c) s.transition(r, c) = rows[r][c];
            }
            if (static_cast<int>(obs.size()) != spec.num_sensors)
                throw ConfigError("sources[i].obs_prob: expected sensors.count rows");
            s.obs_prob.resize(spec.num_sensors, s.num_states);
            for (int n = 0; n < spec.num_sensors; ++n) {
                if (static_cast<int>(obs[n].size()) != s.num_states)
                    throw ConfigError("sources[i].obs_prob: row width != num states");
                for (int c = 0; c < s.num_states; ++c) s.obs_prob(n, c) = obs[n][c];
            }
            spec.sources.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("spec file field error: " + std::string(e.what()));
    }
    return spec;
}

struct Scenario {
    aoi::SystemSpec spec;
    std::optional<aoi::SystemState> deterministic_init;
    bool skip_validation = false;  // deliberately periodic built-in
};

Scenario build_scenario(const Options& o) {
    Scenario sc;
    if (!o.spec_file.empty()) {
        sc.spec = load_spec_file(o.spec_file);
    } else if (o.scenario == "toy-a") {
        sc.spec = aoi::scenario_toy('a', o.p);
    } else if (o.scenario == "toy-b") {
        sc.spec = aoi::scenario_toy('b', o.p, o.alpha);
    } else if (o.scenario == "toy-c") {
        sc.spec = aoi::scenario_toy('c', o.p, o.alpha);
    } else if (o.scenario == "small-factory") {
        sc.spec = aoi::scenario_small_factory(o.alpha, o.p);
    } else if (o.scenario == "large-factory") {
        sc.spec = aoi::scenario_large_factory(o.gamma, o.alpha);
    } else if (o.scenario == "motivating") {
        auto [spec, init] = aoi::scenario_motivating();
        sc.spec = std::move(spec);
        sc.deterministic_init = std::move(init);
        sc.skip_validation = true;  // deterministic ring is periodic by design
    } else if (o.scenario.empty()) {
        throw ConfigError("missing --scenario or --spec-file");
    } else {
        throw ConfigError("unknown scenario: " + o.scenario);
    }
    if (!sc.skip_validation) {
        auto violations = aoi::validate(sc.spec);
        if (!violations.empty()) {
            std::string msg = "invalid model:";
            for (const auto& v : violations) msg += "\n  " + v;
            throw ConfigError(msg);
        }
    }
    return sc;
}

std::string output_path(const Options& o, const std::string& fallback) {
    std::string dir = o.out_dir;
    if (dir.empty()) {
        if (const char* env = std::getenv("AOI_OUT_DIR")) dir = env;
        else dir = ".";
    }
    std::string file = o.output.empty() ? fallback : o.output;
    if (file.find('/') != std::string::npos) return file;
    return (std::filesystem::path(dir) / file).string();
}

std::string provenance(const Options& o, const std::string& cmd) {
    std::ostringstream s;
    s << kVersion << " | cmd=" << cmd;
    if (!o.scenario.empty()) s << " scenario=" << o.scenario;
    if (!o.spec_file.empty()) s << " spec_file=" << o.spec_file;
    s << " p=" << o.p << " alpha=" << o.alpha << " gamma=" << o.gamma << " seed=" << o.seed
      << " Q=" << o.trunc_q << " epsilon=" << o.epsilon << " damping=" << o.damping
      << " slots=" << o.slots << " burn_in=" << (o.no_burn_in ? 0 : o.burn_in)
      << " runs=" << o.runs;
    return s.str();
}

// Value tables and state spaces owned on behalf of a PolicyHandle.
struct BuiltPolicy {
    std::string name;
    aoi::PolicyHandle handle;
    std::unique_ptr<aoi::SystemSpec> reduced;
    std::unique_ptr<aoi::StateSpace> space;
    std::unique_ptr<aoi::PolicyTable> policy;
    std::unique_ptr<std::vector<double>> q;
};

constexpr std::size_t kMaxExactStates = 2u << 20;  // exact-solve size cap

std::unique_ptr<aoi::StateSpace> make_space(const aoi::SystemSpec& spec, int trunc_q) {
    double total = 1.0;
    for (const auto& s : spec.sources) total *= s.num_states;
    for (int i = 0; i < spec.num_sources(); ++i) total *= trunc_q;
    if (total > static_cast<double>(kMaxExactStates))
        throw ConfigError("state space too large for exact solving (" +
                          aoi::CsvWriter::num(total) + " states; cap " +
                          std::to_string(kMaxExactStates) + "); use myopic belief policies");
    return std::make_unique<aoi::StateSpace>(spec, trunc_q);
}

std::vector<double> solve_values(const aoi::StateSpace& space, const Options& o,
                                 aoi::ValueTable* table_out = nullptr,
                                 aoi::PolicyTable* policy_out = nullptr,
                                 std::vector<aoi::RviTraceRow>* trace = nullptr) {
    if (o.discount > 0.0) {
        if (o.discount >= 1.0) throw ConfigError("--discount must be in (0,1)");
        // Discounted VI handles periodic/multichain models where the
        // average-cost span bracket cannot close.
        std::vector<double> h(space.total_states(), 0.0), next;
        for (int i = 0; i < o.vi_sweeps; ++i) {
            space.sweep(h, next, o.discount, 1.0);
            if (trace) {
                double lo = std::numeric_limits<double>::infinity(), hi = -lo;
                for (std::size_t s = 0; s < h.size(); ++s) {
                    double d = next[s] - h[s];
                    lo = std::min(lo, d);
                    hi = std::max(hi, d);
                }
                trace->push_back({i + 1, lo, hi, 0.5 * (lo + hi)});
            }
            std::swap(h, next);
        }
        // Scaling by the discount makes the undamped greedy backup
        // c + E[discount * h], i.e. the discounted greedy policy.
        for (auto& v : h) v *= o.discount;
        if (policy_out) *policy_out = aoi::greedy_policy(space, h, 1.0);
        if (table_out) {
            table_out->h = h;
            table_out->iterations = o.vi_sweeps;
            table_out->converged = true;
        }
        return h;
    }
    aoi::RviOptions opts;
    opts.epsilon = o.epsilon;
    opts.damping = o.damping;
    opts.trace = trace;
    auto [table, policy] = aoi::relative_value_iteration(space, opts);
    if (!table.converged)
        throw NumericError("relative value iteration did not converge within iteration cap");
    if (table_out) *table_out = table;
    if (policy_out) *policy_out = std::move(policy);
    return std::move(table.h);
}

BuiltPolicy build_policy(const std::string& name, const aoi::SystemSpec& spec,
                         const Options& o) {
    BuiltPolicy b;
    b.name = name;
    auto& h = b.handle;
    if (name == "random") {
        h.kind = aoi::PolicyKind::random;
        return b;
    }
    if (name == "myopic") {
        h.kind = aoi::PolicyKind::myopic;
        return b;
    }
    if (name == "optimal") {
        h.kind = aoi::PolicyKind::optimal;
        b.space = make_space(spec, o.trunc_q);
        b.policy = std::make_unique<aoi::PolicyTable>();
        solve_values(*b.space, o, nullptr, b.policy.get());
        h.space = b.space.get();
        h.policy = b.policy.get();
        return b;
    }

    // Belief policy grammar: (ml|qmdp)-(detect|reveal|undetect)[-myopic]
    std::string rest = name;
    bool myopic_variant = false;
    if (rest.size() > 7 && rest.substr(rest.size() - 7) == "-myopic") {
        myopic_variant = true;
        rest = rest.substr(0, rest.size() - 7);
    }
    std::string kind, mode;
    if (auto dash = rest.find('-'); dash != std::string::npos) {
        kind = rest.substr(0, dash);
        mode = rest.substr(dash + 1);
    }
    if ((kind != "ml" && kind != "qmdp") ||
        (mode != "detect" && mode != "reveal" && mode != "undetect"))
        throw ConfigError("unknown policy: " + name);
    h.kind = kind == "ml" ? aoi::PolicyKind::ml : aoi::PolicyKind::qmdp;
    h.observability = mode == "detect"    ? aoi::Observability::detectable
                      : mode == "reveal"  ? aoi::Observability::detectable_reveal
                                          : aoi::Observability::undetectable;
    if (h.kind == aoi::PolicyKind::qmdp && o.qmdp_samples > 0)
        h.qmdp_samples = o.qmdp_samples;
    if (!myopic_variant) {
        const aoi::SystemSpec* base = &spec;
        if (h.observability == aoi::Observability::undetectable) {
            b.reduced = std::make_unique<aoi::SystemSpec>(aoi::stateless_equivalent(spec));
            base = b.reduced.get();
        }
        b.space = make_space(*base, o.trunc_q);
        b.q = std::make_unique<std::vector<double>>();
        auto hvals = solve_values(*b.space, o);
        *b.q = b.space->q_values(hvals, o.damping);
        h.space = b.space.get();
        h.q = b.q.get();
    }
    return b;
}

int cmd_analyze(const Options& o) {
    Scenario sc = build_scenario(o);
    aoi::RandomPolicyAoI res = aoi::random_policy_aoi(sc.spec);
    aoi::CsvWriter csv(output_path(o, "analyze.csv"), provenance(o, "analyze"),
                       {"source", "mean_aoi"});
    for (int i = 0; i < res.per_source.size(); ++i)
        csv.row({std::to_string(i + 1), aoi::CsvWriter::num(res.per_source(i))});
    csv.row({"overall", aoi::CsvWriter::num(res.overall)});
    return 0;
}

int cmd_solve(const Options& o) {
    Scenario sc = build_scenario(o);
    auto space = make_space(sc.spec, o.trunc_q);
    aoi::ValueTable table;
    aoi::PolicyTable policy;
    std::vector<aoi::RviTraceRow> conv;
    solve_values(*space, o, &table, &policy, &conv);
    {
        aoi::CsvWriter csv(output_path(o, "solve.csv"), provenance(o, "solve"),
                           {"iteration", "delta_lower", "delta_upper", "lambda"});
        for (const auto& r : conv)
            csv.row({std::to_string(r.iteration), aoi::CsvWriter::num(r.delta_lower),
                     aoi::CsvWriter::num(r.delta_upper), aoi::CsvWriter::num(r.lambda)});
    }
    {
        const int k = sc.spec.num_sources();
        std::vector<std::string> cols{"state"};
        for (int i = 0; i < k; ++i) cols.push_back("source" + std::to_string(i + 1));
        for (int i = 0; i < k; ++i) cols.push_back("aoi" + std::to_string(i + 1));
        cols.push_back("action");
        aoi::CsvWriter csv(output_path(o, "policy.csv"), provenance(o, "solve"), cols);
        for (std::size_t idx = 0; idx < space->total_states(); ++idx) {
            aoi::SystemState st = space->decode(idx);
            std::vector<std::string> row{std::to_string(idx)};
            for (int s : st.source_states) row.push_back(std::to_string(s));
            for (int d : st.aoi) row.push_back(std::to_string(d));
            row.push_back(std::to_string(policy.action[idx]));
            csv.row(row);
        }
    }
    std::printf("gain=%s span=[%s,%s] iterations=%ld states=%zu\n",
                aoi::CsvWriter::num(table.gain).c_str(),
                aoi::CsvWriter::num(table.span_lower).c_str(),
                aoi::CsvWriter::num(table.span_upper).c_str(), table.iterations,
                space->total_states());
    return 0;
}

void simulate_policies(const Options& o, const Scenario& sc, aoi::CsvWriter& csv,
                       double param_value, bool with_param) {
    if (o.policies.empty()) throw ConfigError("empty policy list (--policy)");
    long burn_in = o.no_burn_in ? 0 : o.burn_in;
    if (burn_in >= o.slots) throw ConfigError("burn-in must be smaller than --slots");
    aoi::EpisodeOptions eopts;
    if (o.deterministic_init) {
        if (!sc.deterministic_init)
            throw ConfigError("--deterministic-init is only available for scenario motivating");
        eopts.initial = sc.deterministic_init;
    }
    for (const auto& name : o.policies) {
        BuiltPolicy bp = build_policy(name, sc.spec, o);
        aoi::EpisodeTrace trace;
        if (!o.trace_file.empty()) {
            if (o.runs != 1) throw ConfigError("--trace requires --runs 1");
            eopts.trace = &trace;
        }
        aoi::ReplicateStats agg =
            aoi::replicate(sc.spec, bp.handle, o.slots, burn_in, o.runs, o.seed, eopts);
        std::vector<std::string> cells;
        if (with_param) cells.push_back(aoi::CsvWriter::num(param_value));
        cells.push_back(name);
        cells.push_back(aoi::CsvWriter::num(agg.mean));
        cells.push_back(aoi::CsvWriter::num(agg.std_error));
        csv.row(cells);
        if (eopts.trace) {
            const int k = sc.spec.num_sources();
            std::vector<std::string> cols{"slot"};
            for (int i = 1; i <= k; ++i) cols.push_back("aoi_" + std::to_string(i));
            cols.push_back("action");
            aoi::CsvWriter tcsv(output_path(o, o.trace_file), provenance(o, "trace"), cols);
            for (std::size_t t = 0; t < trace.slots.size(); ++t) {
                std::vector<std::string> row{std::to_string(t + 1)};
                for (int d : trace.slots[t].aoi) row.push_back(std::to_string(d));
                row.push_back(std::to_string(trace.slots[t].action));
                tcsv.row(row);
            }
        }
    }
}

int cmd_simulate(const Options& o) {
    Scenario sc = build_scenario(o);
    aoi::CsvWriter csv(output_path(o, "simulate.csv"), provenance(o, "simulate"),
                       {"policy", "mean_aoi", "std_error"});
    simulate_policies(o, sc, csv, 0.0, false);
    return 0;
}

int cmd_sweep(const Options& o) {
    if (o.values.empty()) throw ConfigError("empty sweep grid (--values)");
    if (o.param != "p" && o.param != "alpha" && o.param != "gamma")
        throw ConfigError("--param must be p, alpha, or gamma");
    if (o.policies.empty()) throw ConfigError("empty policy list (--policy)");
    aoi::CsvWriter csv(output_path(o, "sweep.csv"), provenance(o, "sweep"),
                       {o.param, "policy", "mean_aoi", "std_error"});
    for (double v : o.values) {
        Options point = o;
        if (o.param == "p") point.p = v;
        else if (o.param == "alpha") point.alpha = v;
        else point.gamma = v;
        Scenario sc = build_scenario(point);
        simulate_policies(point, sc, csv, v, true);
    }
    return 0;
}

int cmd_policy_map(const Options& o) {
    Scenario sc = build_scenario(o);
    if (sc.spec.num_sources() != 2) throw ConfigError("policy-map requires a 2-source scenario");
    std::vector<int> states = o.map_states;
    if (states.empty()) states.assign(2, sc.spec.sources[0].num_states);  // observable corner
    if (static_cast<int>(states.size()) != 2) throw ConfigError("--states needs 2 entries");
    Options solve_opts = o;
    solve_opts.trunc_q = std::max(o.trunc_q, o.aoi_max);
    std::function<int(const aoi::SystemState&)> act;
    BuiltPolicy bp;
    if (o.policies.size() != 1) throw ConfigError("policy-map takes exactly one --policy");
    const std::string& name = o.policies[0];
    if (name == "myopic") {
        act = [&](const aoi::SystemState& st) { return aoi::myopic_action(sc.spec, st); };
    } else if (name == "optimal") {
        bp = build_policy("optimal", sc.spec, solve_opts);
        act = [&](const aoi::SystemState& st) {
            return bp.policy->action[bp.space->encode(st)];
        };
    } else {
        throw ConfigError("policy-map supports policies myopic and optimal");
    }
    aoi::CsvWriter csv(output_path(o, "policy_map.csv"), provenance(o, "policy-map"),
                       {"aoi_1", "aoi_2", "action"});
    auto grid = aoi::policy_map(sc.spec, act, states, o.aoi_min, o.aoi_max);
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j < grid[i].size(); ++j)
            csv.row({std::to_string(o.aoi_min + static_cast<int>(i)),
                     std::to_string(o.aoi_min + static_cast<int>(j)),
                     std::to_string(grid[i][j])});
    return 0;
}

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--scenario", o.scenario,
                    "Built-in scenario: toy-a, toy-b, toy-c, small-factory, large-factory, "
                    "motivating");
    cmd->add_option("--spec-file", o.spec_file, "JSON model description");
    cmd->add_option("--p", o.p, "Observation probability parameter");
    cmd->add_option("--alpha", o.alpha, "Source mobility parameter");
    cmd->add_option("--gamma", o.gamma, "Sensor degradation factor");
    cmd->add_option("--output", o.output, "Output CSV file name");
    cmd->add_option("--out-dir", o.out_dir, "Output directory (default $AOI_OUT_DIR or .)");
    cmd->add_option("--seed", o.seed, "Master random seed");
}

void add_solver(CLI::App* cmd, Options& o) {
    cmd->add_option("--Q", o.trunc_q, "AoI truncation for exact solving");
    cmd->add_option("--epsilon", o.epsilon, "Value-iteration span tolerance");
    cmd->add_option("--damping", o.damping, "Aperiodicity damping in (0,1]");
    cmd->add_option("--discount", o.discount,
                    "Use discounted VI with this factor (0 = average-cost RVI)");
    cmd->add_option("--sweeps", o.vi_sweeps, "Discounted-VI sweep count");
}

void add_sim(CLI::App* cmd, Options& o) {
    cmd->add_option("--policy", o.policies,
                    "Policies: random, myopic, optimal, (ml|qmdp)-(detect|reveal|undetect)"
                    "[-myopic]");
    cmd->add_option("--slots", o.slots, "Simulated slots per run");
    cmd->add_option("--burn-in", o.burn_in, "Discarded initial slots");
    cmd->add_flag("--no-burn-in", o.no_burn_in, "Count every slot");
    cmd->add_option("--runs", o.runs, "Replications");
    cmd->add_option("--qmdp-samples", o.qmdp_samples, "Monte-Carlo Q-MDP samples (0 = exact)");
    cmd->add_flag("--deterministic-init", o.deterministic_init,
                  "Use the scenario's fixed initial state (motivating only)");
    cmd->add_option("--trace", o.trace_file, "Per-slot trace CSV (requires --runs 1)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Age-of-Information sensor scheduling toolkit"};
    app.require_subcommand(1);
    Options o;

    auto* analyze = app.add_subcommand("analyze", "Closed-form random-policy AoI");
    add_common(analyze, o);
    auto* solve = app.add_subcommand("solve", "Relative value iteration summary");
    add_common(solve, o);
    add_solver(solve, o);
    auto* simulate = app.add_subcommand("simulate", "Simulate policies on a scenario");
    add_common(simulate, o);
    add_solver(simulate, o);
    add_sim(simulate, o);
    auto* sweep = app.add_subcommand("sweep", "Parameter sweep with policies");
    add_common(sweep, o);
    add_solver(sweep, o);
    add_sim(sweep, o);
    sweep->add_option("--param", o.param, "Swept parameter: p, alpha, gamma");
    sweep->add_option("--values", o.values, "Grid values")->delimiter(',');
    auto* pmap = app.add_subcommand("policy-map", "Action grid over the two AoIs");
    add_common(pmap, o);
    add_solver(pmap, o);
    pmap->add_option("--policy", o.policies, "myopic or optimal");
    pmap->add_option("--states", o.map_states, "Fixed source states (2 entries)")->delimiter(',');
    pmap->add_option("--aoi-min", o.aoi_min, "Grid lower bound");
    pmap->add_option("--aoi-max", o.aoi_max, "Grid upper bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(o);
        if (solve->parsed()) return cmd_solve(o);
        if (simulate->parsed()) return cmd_simulate(o);
        if (sweep->parsed()) return cmd_sweep(o);
        if (pmap->parsed()) return cmd_policy_map(o);
        std::cerr << "no subcommand given\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
