// bnps: structure learning, propensity-score ATE estimation and the
// simulation study from the command line.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "bnps/bayesian_network.hpp"
#include "bnps/causal_estimators.hpp"
#include "bnps/error.hpp"
#include "bnps/ground_truth.hpp"
#include "bnps/model_io.hpp"
#include "bnps/monte_carlo.hpp"
#include "bnps/random.hpp"
#include "bnps/structure_learning.hpp"

namespace {

using namespace bnps;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;
constexpr const char* kFormatVersion = "1.0";

struct Globals {
    std::string command_line;
    std::string resolved_config;
    bool manifest_only = false;
    std::string variance = "ps_adjusted";
};

std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t value) {
    if (flag->count() > 0) return value;
    if (const char* env = std::getenv("BNPS_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            fail_usage(fmt::format("BNPS_SEED='{}' is not an unsigned integer", env));
        }
    }
    return 0;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json manifest(const Globals& g, std::uint64_t seed) {
    return {
        {"command_line", g.command_line},
        {"config_digest", fmt::format("{:016x}", fnv1a64(g.resolved_config))},
        {"master_seed", seed},
        {"generator", std::string(kGeneratorFamily)},
        {"format_version", kFormatVersion},
        {"bic", "logL - (d/2) log n"},
        {"variance", g.variance},
        {"timestamp", utc_timestamp()},
    };
}

void write_manifest(const Globals& g, std::uint64_t seed, const std::string& output) {
    const std::string path = output + ".manifest.json";
    std::ofstream out(path);
    if (!out) fail_data(fmt::format("cannot write '{}'", path));
    out << manifest(g, seed).dump(2) << '\n';
}

// True when the caller only wanted the resolved configuration.
bool dry_run(const Globals& g, std::uint64_t seed) {
    if (!g.manifest_only) return false;
    auto doc = manifest(g, seed);
    doc["resolved_config"] = g.resolved_config;
    std::cout << doc.dump(2) << '\n';
    return true;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) fail_data(fmt::format("cannot write '{}'", path));
    return out;
}

CsvOptions csv_options(bool no_header, const std::string& na_policy) {
    CsvOptions o;
    o.header = !no_header;
    o.na_policy = na_policy == "drop_row" ? NaPolicy::DropRow : NaPolicy::Fail;
    return o;
}

CategoricalDataset load_data(const std::string& path, const CsvOptions& options) {
    auto ingest = ingest_csv(path, options);
    if (ingest.dropped_rows > 0)
        std::cerr << fmt::format("dropped {} rows with missing values\n", ingest.dropped_rows);
    return std::move(ingest.data);
}

// ---------------------------------------------------------------- learn

struct LearnArgs {
    std::string data, out, dot, trace, algorithm = "tabu", na_policy = "fail";
    std::vector<std::string> exclude;
    int tabu_length = 10;
    int max_degrading = 10;
    int max_iter = 10000;
    std::uint64_t seed = 0;
    CLI::Option* seed_flag = nullptr;
    bool force = false;
    bool no_header = false;
};

int cmd_learn(const LearnArgs& a, const Globals& g) {
    const auto seed = resolve_seed(a.seed_flag, a.seed);
    if (dry_run(g, seed)) return kExitOk;
    if (a.exclude.empty() && !a.force) {
        std::cerr << "warning: outcome included in structure learning? "
                     "pass --exclude <outcome column> or --force\n";
        return kExitUsage;
    }
    const auto data = load_data(a.data, csv_options(a.no_header, a.na_policy));
    std::vector<std::size_t> keep;
    for (const auto& name : a.exclude) (void)data.index_of(name);
    for (std::size_t c = 0; c < data.cols(); ++c)
        if (std::find(a.exclude.begin(), a.exclude.end(), data.variable(c).name) == a.exclude.end())
            keep.push_back(c);
    const auto learn_data = data.select(keep);

    SearchConfig cfg;
    cfg.algorithm = a.algorithm == "hc" ? SearchAlgorithm::HillClimb : SearchAlgorithm::Tabu;
    cfg.tabu_length = a.tabu_length;
    cfg.max_degrading_steps = a.max_degrading;
    cfg.max_iter = a.max_iter;
    cfg.seed = seed;
    const auto result = learn_structure(learn_data, cfg);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';

    const auto network = fit_mle(learn_data, result.dag);
    save_network(network, a.out);
    write_manifest(g, seed, a.out);
    const auto names = learn_data.names();
    if (!a.dot.empty()) open_output(a.dot) << to_dot(result.dag, names);
    if (!a.trace.empty()) {
        auto out = open_output(a.trace);
        write_trace_csv(out, result);
    }

    std::cout << fmt::format("BIC: {:.6f}\n", result.score);
    std::cout << "arcs:";
    for (const auto& [u, v] : result.dag.arcs()) std::cout << ' ' << names[u] << "->" << names[v];
    std::cout << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- score

struct ScoreArgs {
    std::string data, model, na_policy = "fail";
    bool no_header = false;
};

int cmd_score(const ScoreArgs& a, const Globals& g) {
    if (dry_run(g, 0)) return kExitOk;
    const auto network = load_network(a.model);
    const auto data = load_data(a.data, csv_options(a.no_header, a.na_policy));
    std::vector<std::size_t> cols;
    for (const auto& name : network.names()) cols.push_back(data.index_of(name));
    const auto subset = data.select(cols);
    const auto bic = bic_score(subset, network.dag());
    std::cout << fmt::format("BIC: {:.6f}\nlogL (MLE): {:.6f}\nparameters: {}\n", bic.total,
                             bic.log_likelihood, bic.parameters);
    for (int v = 0; v < network.node_count(); ++v)
        std::cout << fmt::format("family {}: {:.6f}\n", network.variable(v).name, bic.families[v]);
    return kExitOk;
}

// ---------------------------------------------------------------- ate

struct AteArgs {
    std::string data, model, treatment = "T", outcome = "Y", out, na_policy = "fail";
    std::string treated_state = "1", outcome_state = "1";
    std::vector<std::string> estimators{"hajek"};
    double clip = 1e-6;
    bool no_header = false;
};

int cmd_ate(const AteArgs& a, const Globals& g) {
    if (dry_run(g, 0)) return kExitOk;
    const auto data = load_data(a.data, csv_options(a.no_header, a.na_policy));
    auto network = load_network(a.model);
    const PropensityModel model(std::move(network), a.treatment, a.treated_state, a.clip);
    const auto scores = propensity_scores(model, data);
    const auto variance = parse_variance(g.variance);
    std::vector<int> strata;
    if (variance == VarianceKind::PsAdjusted)
        strata = markov_blanket_strata(model.network(), model.treatment(),
                                       align_to_network(model.network(), data));
    const auto y = indicator(data, data.index_of(a.outcome), a.outcome_state);
    const auto t = indicator(data, data.index_of(a.treatment), a.treated_state);

    std::ostringstream csv;
    write_estimate_header(csv);
    std::vector<AteEstimate> estimates;
    for (const auto& name : a.estimators) {
        const auto method = name == "ht" ? AteMethod::HorvitzThompson : AteMethod::Hajek;
        auto est = method == AteMethod::Hajek && variance == VarianceKind::PsAdjusted
                       ? hajek_ate_adjusted(y, t, scores.scores, strata)
                       : estimate_ate(method, y, t, scores.scores);
        est.clipped = scores.clipped;
        write_estimate_row(csv, est);
        estimates.push_back(est);
    }
    std::cout << csv.str();
    for (const auto& est : estimates)
        std::cout << fmt::format("# {}: reject ATE = 0 at 5%: {}\n", to_string(est.method),
                                 reject_null(est) ? "yes" : "no");
    if (!a.out.empty()) {
        open_output(a.out) << csv.str();
        write_manifest(g, 0, a.out);
    }
    return kExitOk;
}

// ---------------------------------------------------------------- simulate

std::vector<Scenario> parse_scenarios(const std::vector<std::string>& items) {
    std::vector<Scenario> out;
    auto number = [](const std::string& id) {
        const auto& s = scenario_by_id(id);
        return static_cast<int>(&s - scenario_registry().data());
    };
    for (const auto& item : items) {
        if (item == "all") {
            out.assign(scenario_registry().begin(), scenario_registry().end());
            continue;
        }
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(scenario_by_id(item));
            continue;
        }
        const int lo = number(item.substr(0, dots));
        const int hi = number(item.substr(dots + 2));
        if (lo > hi) fail_usage(fmt::format("empty scenario range '{}'", item));
        for (int i = lo; i <= hi; ++i) out.push_back(scenario_registry()[i]);
    }
    return out;
}

struct SimulateArgs {
    std::vector<std::string> scenarios{"S1"};
    std::vector<std::size_t> sizes{250};
    std::vector<std::string> methods{"bn_hajek"};
    std::size_t replicates = 1000;
    std::uint64_t seed = 0;
    CLI::Option* seed_flag = nullptr;
    int workers = 1;
    int tabu_length = 10;
    int max_degrading = 10;
    std::string out, summary;
    bool quiet = false;
};

int cmd_simulate(const SimulateArgs& a, const Globals& g) {
    const auto seed = resolve_seed(a.seed_flag, a.seed);
    McConfig cfg;
    cfg.scenarios = parse_scenarios(a.scenarios);
    cfg.sizes = a.sizes;
    cfg.replicates = a.replicates;
    cfg.methods.clear();
    for (const auto& m : a.methods) cfg.methods.push_back(parse_method(m));
    cfg.master_seed = seed;
    cfg.workers = a.workers;
    cfg.bn.search.tabu_length = a.tabu_length;
    cfg.bn.search.max_degrading_steps = a.max_degrading;
    cfg.bn.variance = parse_variance(g.variance);
    cfg.validate();
    if (dry_run(g, seed)) return kExitOk;

    const auto start = std::chrono::steady_clock::now();
    if (!a.quiet) {
        cfg.on_cell_done = [start](const std::vector<CellResult>& block) {
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            for (const auto& c : block)
                std::cerr << fmt::format("[{:8.1f}s] {} n={} {}: err={:.3f}{} failures={}{}\n", secs,
                                         c.scenario, c.n, to_string(c.method), c.err,
                                         c.has_coverage ? fmt::format(" ec={:.3f}", c.ec) : "",
                                         c.failures, c.valid ? "" : " (invalid)");
        };
    }
    const auto result = run_grid(cfg);

    auto out = open_output(a.out);
    write_results_csv(out, result);
    write_manifest(g, seed, a.out);
    if (!a.summary.empty()) {
        auto s = open_output(a.summary);
        write_summary_csv(s, result);
    }
    if (!a.quiet) write_summary_text(std::cout, result);
    return kExitOk;
}

// ---------------------------------------------------------------- true-ate

int cmd_true_ate(const std::string& scenario, const std::vector<double>& params, const Globals& g) {
    if (dry_run(g, 0)) return kExitOk;
    Scenario s;
    if (!params.empty()) {
        if (params.size() != 4) fail_usage("--params needs alpha0,alpha1,beta1,beta2");
        s = {"custom", params[0], params[1], params[2], params[3]};
    } else if (!scenario.empty()) {
        s = scenario_by_id(scenario);
    } else {
        fail_usage("give --scenario or --params");
    }
    std::cout << fmt::format("{:.6f}\n", true_ate(s));
    return kExitOk;
}

// ---------------------------------------------------------------- sample

struct SampleArgs {
    std::string scenario = "S1", out;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    CLI::Option* seed_flag = nullptr;
    bool potential_outcomes = false;
};

int cmd_sample(const SampleArgs& a, const Globals& g) {
    const auto seed = resolve_seed(a.seed_flag, a.seed);
    if (dry_run(g, seed)) return kExitOk;
    const GroundTruthModel model(scenario_by_id(a.scenario));
    const auto sample = generate_dataset(model, a.n, seed);
    std::ostringstream csv;
    if (!a.potential_outcomes) {
        write_csv(csv, sample.data);
    } else {
        std::ostringstream base;
        write_csv(base, sample.data);
        std::istringstream lines(base.str());
        std::string line;
        std::getline(lines, line);
        csv << line << ",Y0,Y1\n";
        for (std::size_t i = 0; std::getline(lines, line); ++i)
            csv << line << ',' << sample.y0[i] << ',' << sample.y1[i] << '\n';
    }
    if (a.out.empty()) {
        std::cout << csv.str();
    } else {
        open_output(a.out) << csv.str();
        write_manifest(g, seed, a.out);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian-network propensity scores and ATE estimation"};
    app.set_config("--config", "", "Read options from a TOML/INI file (flags take precedence)");
    app.require_subcommand(1);

    Globals globals;
    for (int i = 0; i < argc; ++i) globals.command_line += (i ? " " : "") + std::string(argv[i]);
    app.add_flag("--manifest-only", globals.manifest_only,
                 "Print the resolved configuration and exit");

    const std::vector<std::string> na_policies{"fail", "drop_row"};
    const std::vector<std::string> variances{"ps_adjusted", "linearized"};

    LearnArgs learn;
    auto* learn_cmd = app.add_subcommand("learn", "Learn a network from a CSV and fit its CPTs");
    learn_cmd->add_option("--data", learn.data, "Input CSV")->required()->check(CLI::ExistingFile);
    learn_cmd->add_option("--exclude", learn.exclude, "Columns kept out of learning (the outcome)")
        ->delimiter(',');
    learn_cmd->add_option("--algorithm", learn.algorithm)
        ->check(CLI::IsMember({"tabu", "hc"}))
        ->capture_default_str();
    learn_cmd->add_option("--out", learn.out, "Model JSON")->required();
    learn_cmd->add_option("--dot", learn.dot, "Graphviz output");
    learn_cmd->add_option("--trace", learn.trace, "Search trace CSV");
    learn_cmd->add_option("--tabu-length", learn.tabu_length)->capture_default_str();
    learn_cmd->add_option("--max-degrading", learn.max_degrading)->capture_default_str();
    learn_cmd->add_option("--max-iter", learn.max_iter)->capture_default_str();
    learn.seed_flag = learn_cmd->add_option("--seed", learn.seed);
    learn_cmd->add_flag("--force", learn.force, "Learn over every column");
    learn_cmd->add_flag("--no-header", learn.no_header);
    learn_cmd->add_option("--na-policy", learn.na_policy)->check(CLI::IsMember(na_policies));

    ScoreArgs score;
    auto* score_cmd = app.add_subcommand("score", "BIC of a model's graph on a dataset");
    score_cmd->add_option("--data", score.data)->required()->check(CLI::ExistingFile);
    score_cmd->add_option("--model", score.model)->required()->check(CLI::ExistingFile);
    score_cmd->add_flag("--no-header", score.no_header);
    score_cmd->add_option("--na-policy", score.na_policy)->check(CLI::IsMember(na_policies));

    AteArgs ate;
    auto* ate_cmd = app.add_subcommand("ate", "Estimate the ATE with network propensity scores");
    ate_cmd->add_option("--data", ate.data)->required()->check(CLI::ExistingFile);
    ate_cmd->add_option("--model", ate.model)->required()->check(CLI::ExistingFile);
    ate_cmd->add_option("--treatment", ate.treatment)->capture_default_str();
    ate_cmd->add_option("--outcome", ate.outcome)->capture_default_str();
    ate_cmd->add_option("--estimator", ate.estimators, "hajek and/or ht")
        ->delimiter(',')
        ->check(CLI::IsMember({"hajek", "ht"}))
        ->capture_default_str();
    ate_cmd->add_option("--clip", ate.clip)->check(CLI::Range(0.0, 0.4999999))->capture_default_str();
    ate_cmd->add_option("--treated-state", ate.treated_state)->capture_default_str();
    ate_cmd->add_option("--outcome-state", ate.outcome_state)->capture_default_str();
    ate_cmd->add_option("--out", ate.out, "Also write the estimate CSV here");
    ate_cmd->add_option("--variance", globals.variance, "Hajek standard error")
        ->check(CLI::IsMember(variances))
        ->capture_default_str();
    ate_cmd->add_flag("--no-header", ate.no_header);
    ate_cmd->add_option("--na-policy", ate.na_policy)->check(CLI::IsMember(na_policies));

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Run the Monte Carlo study");
    sim_cmd->add_option("--scenarios", sim.scenarios, "Ids, ranges like S1..S15, or 'all'")
        ->delimiter(',')
        ->capture_default_str();
    sim_cmd->add_option("--sizes", sim.sizes)->delimiter(',')->capture_default_str();
    sim_cmd->add_option("--replicates", sim.replicates)->check(CLI::PositiveNumber)->capture_default_str();
    sim_cmd->add_option("--methods", sim.methods, "bn_hajek, log_wlr_nocov, log_wlr_cov")
        ->delimiter(',')
        ->capture_default_str();
    sim.seed_flag = sim_cmd->add_option("--seed", sim.seed);
    sim_cmd->add_option("--workers", sim.workers)->check(CLI::PositiveNumber)->capture_default_str();
    sim_cmd->add_option("--tabu-length", sim.tabu_length)->capture_default_str();
    sim_cmd->add_option("--max-degrading", sim.max_degrading)->capture_default_str();
    sim_cmd->add_option("--variance", globals.variance, "Hajek standard error")
        ->check(CLI::IsMember(variances))
        ->capture_default_str();
    sim_cmd->add_option("--out", sim.out, "Results CSV")->required();
    sim_cmd->add_option("--summary", sim.summary, "Wide ERR/EC table CSV");
    sim_cmd->add_flag("--quiet", sim.quiet, "No progress log or table");

    std::string ate_scenario;
    std::vector<double> ate_params;
    auto* true_cmd = app.add_subcommand("true-ate", "Analytic true ATE of a scenario");
    auto* scenario_opt = true_cmd->add_option("--scenario", ate_scenario);
    true_cmd->add_option("--params", ate_params, "alpha0,alpha1,beta1,beta2")
        ->delimiter(',')
        ->excludes(scenario_opt);

    SampleArgs sample;
    auto* sample_cmd = app.add_subcommand("sample", "Draw a dataset from a simulation scenario");
    sample_cmd->add_option("--scenario", sample.scenario)->capture_default_str();
    sample_cmd->add_option("--n", sample.n)->check(CLI::PositiveNumber)->capture_default_str();
    sample.seed_flag = sample_cmd->add_option("--seed", sample.seed);
    sample_cmd->add_option("--out", sample.out, "CSV path (stdout if omitted)");
    sample_cmd->add_flag("--potential-outcomes", sample.potential_outcomes,
                         "Append Y0 and Y1 columns");

    std::string scenarios_out;
    auto* registry_cmd = app.add_subcommand("scenarios", "Export the scenario table as CSV");
    registry_cmd->add_option("--out", scenarios_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    globals.resolved_config = app.config_to_str(true, false);

    try {
        if (*learn_cmd) return cmd_learn(learn, globals);
        if (*score_cmd) return cmd_score(score, globals);
        if (*ate_cmd) return cmd_ate(ate, globals);
        if (*sim_cmd) return cmd_simulate(sim, globals);
        if (*true_cmd) return cmd_true_ate(ate_scenario, ate_params, globals);
        if (*sample_cmd) return cmd_sample(sample, globals);
        if (*registry_cmd) {
            if (dry_run(globals, 0)) return kExitOk;
            if (scenarios_out.empty()) {
                write_scenarios_csv(std::cout);
            } else {
                auto out = open_output(scenarios_out);
                write_scenarios_csv(out);
                write_manifest(globals, 0, scenarios_out);
            }
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.kind()) {
        case ErrorKind::Usage: return kExitUsage;
        case ErrorKind::Data: return kExitData;
        case ErrorKind::Numeric: return kExitNumeric;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitUsage;
}
