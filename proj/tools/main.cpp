#include "mixshift/config.hpp"
#include "mixshift/engine.hpp"
#include "mixshift/errors.hpp"
#include "mixshift/report.hpp"
#include "mixshift/sim.hpp"
#include "mixshift/stats.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using mixshift::ConfigError;
using nlohmann::json;

std::vector<std::string> split_names(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

mixshift::ShiftSpec parse_shift_flag(const std::string& flag) {
    mixshift::ShiftSpec spec;
    std::stringstream ss(flag);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("cannot parse shift entry '" + item + "' (expected NAME=VALUE)");
        const std::string name = item.substr(0, eq);
        spec.targets.push_back(name);
        try {
            spec.delta[name] = std::stod(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse shift value in '" + item + "'");
        }
    }
    std::sort(spec.targets.begin(), spec.targets.end());
    if (spec.targets.empty() || spec.targets.size() > 2)
        throw ConfigError("--shift takes one or two NAME=VALUE entries");
    return spec;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write to '" + path + "'");
    out << text;
}

std::string shift_cache_key(mixshift::TruthKind kind, const mixshift::ShiftSpec& spec,
                            std::size_t n_mc, std::uint64_t seed) {
    std::ostringstream os;
    os << (kind == mixshift::TruthKind::Shift ? "shift" : "interaction");
    for (const auto& t : spec.targets) os << "|" << t << "=" << spec.delta.at(t);
    os << "|mc=" << n_mc << "|seed=" << seed;
    return os.str();
}

struct AnalyzeArgs {
    std::string config_file;
    std::string data, outcome, exposures, covariates, delta, density, binary, out;
    int folds = 0;
    double f_quantile = -1.0, lambda = 0.0, reduce_frac = 0.0;
    std::uint64_t seed = 0;
    int threads = -1;
    bool seed_given = false;
};

mixshift::Config build_config(const AnalyzeArgs& a, const CLI::App* cmd) {
    mixshift::Config cfg;
    if (!a.config_file.empty()) cfg = mixshift::load_config_file(a.config_file);
    // Flags win over config-file values.
    if (cmd->count("--data")) cfg.data_path = a.data;
    if (cmd->count("--outcome")) cfg.outcome = a.outcome;
    if (cmd->count("--exposures")) cfg.exposures = split_names(a.exposures);
    if (cmd->count("--covariates")) cfg.covariates = split_names(a.covariates);
    if (cmd->count("--delta")) mixshift::apply_delta_flag(cfg.engine, a.delta);
    if (cmd->count("--folds")) cfg.engine.folds = a.folds;
    if (cmd->count("--f-quantile")) cfg.engine.f_quantile = a.f_quantile;
    if (cmd->count("--lambda")) cfg.engine.lambda = a.lambda;
    if (cmd->count("--reduce-frac")) cfg.engine.reduce_frac = a.reduce_frac;
    if (cmd->count("--density")) cfg.engine.density_kind = mixshift::parse_density_kind(a.density);
    if (cmd->count("--binary-outcome")) {
        if (a.binary == "auto") cfg.engine.outcome_kind = mixshift::OutcomeKind::Auto;
        else if (a.binary == "yes") cfg.engine.outcome_kind = mixshift::OutcomeKind::Binary;
        else if (a.binary == "no") cfg.engine.outcome_kind = mixshift::OutcomeKind::Continuous;
        else throw ConfigError("--binary-outcome must be auto, yes, or no");
    }
    if (cmd->count("--seed")) cfg.seed = a.seed;
    if (cmd->count("--out")) cfg.output_path = a.out;
    if (cmd->count("--threads")) cfg.engine.threads = a.threads;
    std::sort(cfg.exposures.begin(), cfg.exposures.end());
    std::sort(cfg.covariates.begin(), cfg.covariates.end());
    cfg.validate();
    return cfg;
}

int run_analyze(const AnalyzeArgs& a, const CLI::App* cmd) {
    const mixshift::Config cfg = build_config(a, cmd);
    const mixshift::Dataset data = mixshift::load_csv(cfg.data_path, cfg.roles());
    for (const auto& e : cfg.exposures) {
        mixshift::ShiftSpec spec = mixshift::make_shift(e, cfg.engine.delta_for(e));
        mixshift::validate_shift_spec(spec, data);
    }
    const mixshift::AnalysisReport report = mixshift::run(data, cfg.engine, cfg.seed);
    const std::string text = mixshift::dump_report(report, cfg);
    if (!cfg.output_path.empty()) {
        write_text(cfg.output_path, text);
    } else {
        std::cout << text;
    }
    std::cout << mixshift::render_table(report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exposure-mixture shift effects: discovery, targeted estimation, simulation"};
    app.require_subcommand(1);

    // analyze
    AnalyzeArgs a;
    CLI::App* analyze = app.add_subcommand("analyze", "Run the full discovery + estimation pipeline");
    analyze->add_option("--config", a.config_file, "JSON config file (flags win on conflict)");
    analyze->add_option("--data", a.data, "CSV data file");
    analyze->add_option("--outcome", a.outcome, "outcome column");
    analyze->add_option("--exposures", a.exposures, "comma-separated exposure columns");
    analyze->add_option("--covariates", a.covariates, "comma-separated covariate columns");
    analyze->add_option("--delta", a.delta, "shift size: VALUE or NAME=VALUE[,NAME=VALUE...]");
    analyze->add_option("--folds", a.folds, "cross-validation folds (default 10)");
    analyze->add_option("--f-quantile", a.f_quantile, "F-sum selection quantile in [0,1] (default 0)");
    analyze->add_option("--lambda", a.lambda, "density-ratio cap (default 50)");
    analyze->add_option("--reduce-frac", a.reduce_frac, "delta reduction per adaptation step (default 0.1)");
    analyze->add_option("--density", a.density, "density estimator: HOSE or HESE (default HOSE)");
    analyze->add_option("--binary-outcome", a.binary, "auto|yes|no (default auto)");
    analyze->add_option("--seed", a.seed, "random seed");
    analyze->add_option("--out", a.out, "write the JSON report here instead of stdout");
    analyze->add_option("--threads", a.threads, "worker threads (0 = all cores)");

    // simulate
    std::string ns_flag = "250,500,1000";
    int reps = 10;
    int sim_folds = 5;
    std::uint64_t sim_seed = 1;
    int sim_threads = 0;
    std::string sim_out;
    std::string truth_cache;
    CLI::App* simulate = app.add_subcommand("simulate", "Convergence metrics on the benchmark process");
    simulate->add_option("--ns", ns_flag, "comma-separated sample sizes");
    simulate->add_option("--reps", reps, "replicates per sample size (>= 2)");
    simulate->add_option("--folds", sim_folds, "cross-validation folds per run (default 5)");
    simulate->add_option("--seed", sim_seed, "random seed");
    simulate->add_option("--threads", sim_threads, "worker threads (0 = all cores)");
    simulate->add_option("--out", sim_out, "write metrics CSV here instead of stdout");
    simulate->add_option("--truth-cache", truth_cache, "JSON sidecar for Monte-Carlo ground truths");

    // truth
    std::string scenario = "paper-dgp";
    std::string shift_flag;
    std::string truth_kind = "shift";
    std::size_t n_mc = 10'000'000;
    std::uint64_t truth_seed = 1;
    std::string truth_cache2;
    CLI::App* truth = app.add_subcommand("truth", "Monte-Carlo ground truth for a shift on the benchmark process");
    truth->add_option("--scenario", scenario, "only 'paper-dgp' is available");
    truth->add_option("--shift", shift_flag, "NAME=VALUE[,NAME=VALUE] shift")->required();
    truth->add_option("--kind", truth_kind, "shift | interaction (default shift)");
    truth->add_option("--mc", n_mc, "Monte-Carlo sample size (>= 1e6)");
    truth->add_option("--seed", truth_seed, "random seed");
    truth->add_option("--cache", truth_cache2, "JSON sidecar for computed truths");

    // qgcomp
    std::string q_data, q_outcome, q_exposures, q_covariates;
    int q_count = 4;
    CLI::App* qgcomp = app.add_subcommand("qgcomp", "Quantile g-computation baseline");
    qgcomp->add_option("--data", q_data, "CSV data file")->required();
    qgcomp->add_option("--outcome", q_outcome, "outcome column")->required();
    qgcomp->add_option("--exposures", q_exposures, "comma-separated exposure columns")->required();
    qgcomp->add_option("--covariates", q_covariates, "comma-separated covariate columns");
    qgcomp->add_option("--q", q_count, "number of quantile bins (default 4)");

    try {
        app.parse(argc, argv);

        if (*analyze) return run_analyze(a, analyze);

        if (*simulate) {
            std::vector<std::size_t> ns;
            for (const auto& tok : split_names(ns_flag)) ns.push_back(std::stoull(tok));
            if (ns.empty()) throw ConfigError("--ns has no sample sizes");
            mixshift::EngineSettings cfg;
            cfg.folds = sim_folds;
            cfg.threads = sim_threads;
            const auto rows = mixshift::run_convergence(ns, reps, cfg, sim_seed);
            const std::string csv = mixshift::metrics_csv(rows);
            if (!sim_out.empty()) {
                write_text(sim_out, csv);
            } else {
                std::cout << csv;
            }
            return 0;
        }

        if (*truth) {
            if (scenario != "paper-dgp")
                throw ConfigError("unknown scenario '" + scenario + "' (only paper-dgp)");
            if (n_mc < 1'000'000) throw ConfigError("--mc must be at least 1e6");
            const mixshift::ShiftSpec spec = parse_shift_flag(shift_flag);
            mixshift::TruthKind kind;
            if (truth_kind == "shift") kind = mixshift::TruthKind::Shift;
            else if (truth_kind == "interaction") kind = mixshift::TruthKind::Interaction;
            else throw ConfigError("--kind must be shift or interaction");

            const std::string key = shift_cache_key(kind, spec, n_mc, truth_seed);
            json cache = json::object();
            if (!truth_cache2.empty()) {
                std::ifstream in(truth_cache2);
                if (in) in >> cache;
            }
            double value;
            if (cache.contains(key)) {
                value = cache.at(key).get<double>();
            } else {
                value = mixshift::ground_truth(kind, spec, n_mc, truth_seed);
                if (!truth_cache2.empty()) {
                    cache[key] = value;
                    write_text(truth_cache2, cache.dump(2) + "\n");
                }
            }
            json out;
            out["scenario"] = scenario;
            out["kind"] = truth_kind;
            out["shift"] = spec.delta;
            out["mc"] = n_mc;
            out["seed"] = truth_seed;
            out["value"] = value;
            std::cout << out.dump(2) << "\n";
            return 0;
        }

        if (*qgcomp) {
            mixshift::Config cfg;
            cfg.data_path = q_data;
            cfg.outcome = q_outcome;
            cfg.exposures = split_names(q_exposures);
            cfg.covariates = split_names(q_covariates);
            std::sort(cfg.exposures.begin(), cfg.exposures.end());
            std::sort(cfg.covariates.begin(), cfg.covariates.end());
            cfg.validate();
            const mixshift::Dataset data = mixshift::load_csv(cfg.data_path, cfg.roles());
            const mixshift::QgcompResult res = mixshift::qgcomp_baseline(data, q_count);
            json out;
            out["q"] = q_count;
            out["psi_pos"] = res.psi_pos;
            out["psi_neg"] = res.psi_neg;
            out["psi_total"] = res.psi_total;
            out["coefficients"] = res.coefficients;
            out["weights"] = res.weights;
            std::cout << out.dump(2) << "\n";
            return 0;
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const mixshift::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
