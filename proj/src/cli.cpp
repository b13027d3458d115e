#include "aoaq/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "aoaq/analytics.hpp"
#include "aoaq/flight_sim.hpp"
#include "aoaq/forensic.hpp"
#include "aoaq/io.hpp"

namespace aoaq::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::uint64_t kBuiltinSeed = 1;
constexpr double kErrataRelTol = 1e-12;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Notes are for people; the numeric columns keep full precision.
std::string brief(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::uint64_t parse_seed_text(const std::string& text, const char* what) {
    std::uint64_t seed = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw UsageError(std::string("invalid ") + what + " '" + text + "'");
    }
    return seed;
}

// --seed wins over a seed pinned by an input file, which wins over AOAQ_SEED.
std::uint64_t resolve_seed(const std::optional<std::string>& flag, std::optional<std::uint64_t> from_file,
                           const Environment& env) {
    if (flag) return parse_seed_text(*flag, "--seed");
    if (from_file) return *from_file;
    if (env.default_seed) return parse_seed_text(*env.default_seed, "AOAQ_SEED");
    return kBuiltinSeed;
}

std::string errata_note(const RateReport& printed, const RateReport& exact) {
    std::string note;
    auto cmp = [&](std::string_view name, const std::optional<double>& p, const std::optional<double>& e) {
        if (!p || !e) return;
        const double scale = std::max(std::fabs(*p), std::fabs(*e));
        if (std::fabs(*p - *e) <= kErrataRelTol * scale) return;
        if (!note.empty()) note += "; ";
        note += "errata " + std::string(name) + ": printed=" + brief(*p) + " enumerated=" + brief(*e);
    };
    cmp("fp", printed.fp, exact.fp);
    cmp("fn", printed.fn, exact.fn);
    cmp("p_neutral", printed.p_neutral, exact.p_neutral);
    return note;
}

std::string z_note(const RateReport& exact, const RateReport& mc) {
    const RateComparison cmp = compare_reports(exact, mc, 4.0);
    std::string note;
    for (const auto& c : cmp.checks) {
        if (!note.empty()) note += "; ";
        char buf[64];
        std::snprintf(buf, sizeof buf, "z_%s=%.3f", c.rate.c_str(), c.z);
        note += buf;
    }
    return note;
}

// Emits the rows for one query: exact, then printed closed forms, then
// Monte Carlo, each only when requested/available.
void emit_rate_rows(std::vector<std::vector<std::string>>& rows, const RateQuery& query, bool with_printed,
                    std::optional<std::uint64_t> mc_trials, std::uint64_t seed, unsigned threads) {
    std::optional<RateReport> exact;
    try {
        exact = exact_rates(query);
    } catch (const UnsupportedQuery& e) {
        if (!mc_trials) throw UsageError(std::string(e.what()) + "; pass --mc <trials>");
    }
    if (exact) rows.push_back(rate_csv_fields(*exact));
    if (with_printed) {
        const RateReport printed = published_rates(query);
        rows.push_back(rate_csv_fields(printed, exact ? errata_note(printed, *exact) : std::string()));
    }
    if (mc_trials) {
        MonteCarloOptions opts;
        opts.trials = *mc_trials;
        opts.seed = seed;
        opts.threads = threads;
        const RateReport mc = monte_carlo_rates(query, uniform_conditional_sampler(query.thresholds.trigger_threshold), opts);
        rows.push_back(rate_csv_fields(mc, exact ? z_note(*exact, mc) : std::string()));
    }
}

void write_csv(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
    out << kRateCsvHeader << '\n';
    for (const auto& row : rows) out << to_csv_line(row) << '\n';
}

ordered_json outcome_json(const FlightOutcome& o) {
    ordered_json j;
    j["interventions"] = o.interventions;
    j["disabled_at"] = o.disabled_at ? ordered_json(*o.disabled_at) : ordered_json(nullptr);
    j["disagreement_events"] = o.disagreement_events;
    j["max_trim_excursion"] = o.max_trim_excursion;
    j["cutout_engaged_at"] = o.cutout_engaged_at ? ordered_json(*o.cutout_engaged_at) : ordered_json(nullptr);
    j["episodes"] = o.episodes;
    j["runaway_flag"] = o.runaway_flag;
    return j;
}

ordered_json fleet_json(const FleetStatistics& s) {
    ordered_json j;
    j["flights"] = s.flights;
    j["seed"] = s.seed;
    j["fraction_disabled"] = s.fraction_disabled();
    j["se_disabled"] = s.se(s.fraction_disabled());
    j["fraction_disagreement"] = s.fraction_with_disagreement();
    j["se_disagreement"] = s.se(s.fraction_with_disagreement());
    j["mean_interventions"] = s.mean_interventions;
    j["runaway_fraction"] = s.runaway_fraction();
    j["se_runaway"] = s.se(s.runaway_fraction());
    j["cutout_fraction"] = s.cutout_fraction();
    j["mean_max_trim_excursion"] = s.mean_max_trim_excursion;
    return j;
}

ScenarioFile read_scenario(const std::string& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw IoError("cannot read scenario file " + path);
    return load_scenario(path);
}

int simulate(const std::string& path, std::optional<std::uint64_t> fleet, const std::optional<std::string>& seed_flag,
             unsigned threads, const Environment& env, std::ostream& out) {
    ScenarioFile file = read_scenario(path);
    const std::uint64_t seed =
        resolve_seed(seed_flag, file.has_seed ? std::optional(file.config.seed) : std::nullopt, env);
    file.config.seed = seed;

    ordered_json j;
    j["policy"] = std::string(to_string(file.policy.name));
    j["protocol"] = protocol_token(file.config.protocol);
    if (fleet) {
        if (*fleet == 0) throw UsageError("--fleet needs at least one flight");
        const FleetStatistics stats = run_fleet(file.config, file.policy, *fleet, seed, threads);
        j.update(fleet_json(stats));
    } else {
        j["seed"] = seed;
        j.update(outcome_json(run_flight(file.config, file.policy)));
    }
    out << j.dump(2) << '\n';
    return kOk;
}

int reason(const std::string& path, bool as_json, std::ostream& out) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw IoError("cannot read case file " + path);
    const CaseFile file = load_case(path);

    const auto graph = forensic::ImplicationGraph::from_propositions(file.propositions, file.implications);
    std::vector<forensic::Violation> violations;
    try {
        violations = forensic::check_consistency(graph, file.propositions);
    } catch (const std::invalid_argument& e) {
        throw ParseError("implications", e.what());
    }

    std::optional<forensic::OddsState> odds;
    if (file.odds) {
        try {
            forensic::OddsState state(file.odds->prior, file.odds->threshold);
            for (const auto& f : file.odds->factors) state = forensic::update_odds(std::move(state), f.likelihood_ratio, f.label);
            odds = std::move(state);
        } catch (const std::invalid_argument& e) {
            throw ParseError("odds", e.what());
        }
    }

    if (as_json) {
        ordered_json j;
        j["propositions"] = file.propositions.size();
        j["implications"] = file.implications.size();
        j["promises"] = file.promises.size();
        ordered_json vs = ordered_json::array();
        for (const auto& v : violations) {
            vs.push_back({{"from", v.antecedent},
                          {"to", v.consequent},
                          {"from_level", std::string(forensic::to_string(v.antecedent_level))},
                          {"to_level", std::string(forensic::to_string(v.consequent_level))},
                          {"reason", v.reason}});
        }
        j["violations"] = vs;
        if (odds) {
            j["prior_odds"] = odds->prior_odds();
            j["posterior_odds"] = odds->posterior_odds();
            j["threshold"] = odds->threshold();
            j["decision"] = forensic::decide_threshold(*odds);
        }
        out << j.dump(2) << '\n';
    } else {
        out << "propositions: " << file.propositions.size() << '\n';
        out << "implications: " << file.implications.size() << '\n';
        out << "promises: " << file.promises.size() << '\n';
        out << violations.size() << " violations\n";
        for (const auto& v : violations) {
            out << "violation: " << v.antecedent << " -> " << v.consequent << " ("
                << forensic::to_string(v.antecedent_level) << " -> " << forensic::to_string(v.consequent_level)
                << "): " << v.reason << '\n';
        }
        if (odds) {
            out << "prior_odds: " << format_number(odds->prior_odds()) << '\n';
            out << "posterior_odds: " << format_number(odds->posterior_odds()) << '\n';
            out << "threshold: " << format_number(odds->threshold()) << '\n';
            out << "decision: " << (forensic::decide_threshold(*odds) ? "true" : "false") << '\n';
        }
    }
    return violations.empty() ? kOk : kViolations;
}

}  // namespace

Environment environment_from_process() {
    Environment env;
    if (const char* s = std::getenv("AOAQ_SEED"); s != nullptr && *s != '\0') env.default_seed = s;
    return env;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Environment& env) {
    CLI::App app{"Reliability analysis of redundant AOA sensor reading protocols", "aoaq"};
    app.require_subcommand(1);

    unsigned threads = 0;
    std::optional<std::string> seed_flag;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed_flag, "Seed (overrides AOAQ_SEED)");
        cmd->add_option("--threads", threads, "Worker threads, 0 = all hardware threads");
    };

    // rates
    std::string protocol_token_arg;
    double f = 0.0;
    double a = 0.0;
    std::optional<double> d;
    bool with_printed = false;
    std::optional<std::uint64_t> mc_trials;
    std::string neutral_policy = "counts-negative";
    std::string conditioning = "above";
    unsigned parity = 0;
    auto* rates = app.add_subcommand("rates", "Exact, printed and Monte Carlo rates for one protocol");
    rates->add_option("--protocol", protocol_token_arg, "single|alternating|conj2|disj2|guarded2|majbool<n>|majgate<n>")
        ->required();
    rates->add_option("--f", f, "Per-sensor defect probability")->required();
    rates->add_option("--a", a, "Normalized trigger threshold")->required();
    rates->add_option("--d", d, "Disagreement threshold (guarded2 threshold mode)");
    rates->add_flag("--paper", with_printed, "Add the printed closed-form row");
    rates->add_option("--mc", mc_trials, "Monte Carlo trials");
    rates->add_option("--neutral-policy", neutral_policy, "counts-negative|excluded");
    rates->add_option("--conditioning", conditioning, "Side of a for p_neutral: above|at-or-below");
    rates->add_option("--parity", parity, "Flight parity for the alternating protocol");
    add_common(rates);

    // sweep
    std::vector<std::string> sweep_protocols;
    std::vector<double> sweep_f;
    std::vector<double> sweep_a;
    std::string sweep_out;
    auto* sweep = app.add_subcommand("sweep", "Rate table over a protocol x f x a grid, written as CSV");
    sweep->add_option("--protocols", sweep_protocols, "Comma-separated protocol tokens")->required()->delimiter(',');
    sweep->add_option("--f", sweep_f, "Comma-separated defect probabilities")->required()->delimiter(',');
    sweep->add_option("--a", sweep_a, "Comma-separated thresholds")->required()->delimiter(',');
    sweep->add_option("--mc", mc_trials, "Monte Carlo trials per grid point");
    sweep->add_flag("--paper", with_printed, "Add printed closed-form rows");
    sweep->add_option("--out", sweep_out, "Output CSV path ('-' for standard output)")->required();
    add_common(sweep);

    // simulate / fleet
    std::string scenario_path;
    std::optional<std::uint64_t> fleet_size;
    auto* simulate_cmd = app.add_subcommand("simulate", "Run one flight, or a fleet with --fleet, from a scenario file");
    simulate_cmd->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    simulate_cmd->add_option("--fleet", fleet_size, "Number of flights");
    add_common(simulate_cmd);

    std::uint64_t fleet_default = 1000;
    auto* fleet_cmd = app.add_subcommand("fleet", "Alias for simulate --fleet");
    fleet_cmd->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    fleet_cmd->add_option("--fleet,--flights", fleet_default, "Number of flights");
    add_common(fleet_cmd);

    // reason
    std::string case_path;
    bool reason_json = false;
    auto* reason_cmd = app.add_subcommand("reason", "Check a case file and compute posterior odds");
    reason_cmd->add_option("case", case_path, "Case JSON file")->required();
    reason_cmd->add_flag("--json", reason_json, "JSON report");

    std::vector<const char*> argv{"aoaq"};
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "aoaq: " << e.what() << '\n';
        return kUsageError;
    }

    try {
        if (rates->parsed()) {
            RateQuery q;
            q.fault.defect_probability = f;
            q.thresholds.trigger_threshold = a;
            q.thresholds.disagreement_threshold = d;
            q.protocol = with_parity(resolve_disagreement_mode(parse_protocol(protocol_token_arg), q.thresholds), parity);
            q.neutral_policy = parse_neutral_policy(neutral_policy);
            q.conditioning = parse_conditioning(conditioning);
            q.validate();
            if (mc_trials && *mc_trials == 0) throw UsageError("--mc needs at least one trial");
            const std::uint64_t seed = resolve_seed(seed_flag, std::nullopt, env);
            std::vector<std::vector<std::string>> rows;
            emit_rate_rows(rows, q, with_printed, mc_trials, seed, threads);
            write_csv(out, rows);
            return kOk;
        }
        if (sweep->parsed()) {
            if (mc_trials && *mc_trials == 0) throw UsageError("--mc needs at least one trial");
            std::vector<ProtocolSpec> protocols;
            for (const auto& t : sweep_protocols) protocols.push_back(parse_protocol(t));
            const std::uint64_t seed = resolve_seed(seed_flag, std::nullopt, env);
            std::vector<std::vector<std::string>> rows;
            std::uint64_t grid_index = 0;
            for (const auto& p : protocols) {
                for (double fv : sweep_f) {
                    for (double av : sweep_a) {
                        RateQuery q;
                        q.protocol = p;
                        q.fault.defect_probability = fv;
                        q.thresholds.trigger_threshold = av;
                        q.validate();
                        emit_rate_rows(rows, q, with_printed, mc_trials, substream_seed(seed, grid_index++), threads);
                    }
                }
            }
            if (sweep_out == "-") {
                write_csv(out, rows);
                return kOk;
            }
            std::ofstream file(sweep_out, std::ios::binary | std::ios::trunc);
            if (!file) throw IoError("cannot write " + sweep_out);
            write_csv(file, rows);
            file.flush();
            if (!file) throw IoError("failed writing " + sweep_out);
            return kOk;
        }
        if (simulate_cmd->parsed()) return simulate(scenario_path, fleet_size, seed_flag, threads, env, out);
        if (fleet_cmd->parsed()) return simulate(scenario_path, fleet_default, seed_flag, threads, env, out);
        if (reason_cmd->parsed()) return reason(case_path, reason_json, out);
    } catch (const IoError& e) {
        err << "aoaq: " << e.what() << '\n';
        return kIoError;
    } catch (const ParseError& e) {
        err << "aoaq: " << e.what() << '\n';
        return kUsageError;
    } catch (const UsageError& e) {
        err << "aoaq: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::invalid_argument& e) {
        err << "aoaq: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::runtime_error& e) {
        err << "aoaq: " << e.what() << '\n';
        return kIoError;
    }
    return kUsageError;
}

}  // namespace aoaq::cli
