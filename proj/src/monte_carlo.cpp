#include "bnps/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "bnps/error.hpp"
#include "bnps/logit_baseline.hpp"
#include "bnps/random.hpp"

namespace bnps {

const char* to_string(McMethod method) {
    switch (method) {
    case McMethod::BnHajek: return "bn_hajek";
    case McMethod::LogWlrNoCov: return "log_wlr_nocov";
    case McMethod::LogWlrCov: return "log_wlr_cov";
    }
    return "?";
}

McMethod parse_method(std::string_view name) {
    for (const auto m : {McMethod::BnHajek, McMethod::LogWlrNoCov, McMethod::LogWlrCov})
        if (name == to_string(m)) return m;
    fail_usage(fmt::format("unknown method '{}'", name));
}

void McConfig::validate() const {
    if (scenarios.empty()) fail_usage("no scenarios selected");
    if (sizes.empty()) fail_usage("no sample sizes selected");
    if (methods.empty()) fail_usage("no methods selected");
    if (replicates < 1) fail_usage("replicates must be at least 1");
    if (workers < 1) fail_usage("workers must be at least 1");
    for (const auto n : sizes)
        if (n < 2) fail_usage("sample sizes must be at least 2");
    std::set<std::string> ids;
    for (const auto& s : scenarios)
        if (!ids.insert(s.id).second) fail_usage(fmt::format("scenario '{}' listed twice", s.id));
    std::set<McMethod> unique(methods.begin(), methods.end());
    if (unique.size() != methods.size()) fail_usage("method listed twice");
}

std::uint64_t replicate_seed(std::uint64_t master, std::string_view scenario_id, std::size_t n,
                             std::size_t replicate) {
    return mix_seed(master, {fnv1a64(scenario_id), static_cast<std::uint64_t>(n),
                             static_cast<std::uint64_t>(replicate)});
}

std::vector<ReplicateOutcome> run_replicate(const SimulatedSample& sample,
                                            const std::vector<McMethod>& methods,
                                            const BnpsOptions& options) {
    static constexpr std::size_t kCovariates[] = {kX1, kX2, kX3, kX4, kX5, kX6};
    const auto& data = sample.data;
    std::vector<ReplicateOutcome> out(methods.size());

    std::optional<PropensityScores> logistic_ps;
    std::string logistic_failure;

    for (std::size_t m = 0; m < methods.size(); ++m) {
        auto& o = out[m];
        try {
            if (methods[m] == McMethod::BnHajek) {
                const auto res = bnps_pipeline(data, kCovariates, kT, kY, options);
                o.estimate = res.estimate.ate;
                o.has_interval = true;
                o.ci_low = res.estimate.ci_low;
                o.ci_high = res.estimate.ci_high;
                o.reject = reject_null(res.estimate);
            } else {
                if (!logistic_ps && logistic_failure.empty()) {
                    try {
                        logistic_ps = ps_logistic(data, kT, kCovariates, options.clip_epsilon);
                    } catch (const Error& e) {
                        logistic_failure = e.what();
                    }
                }
                if (!logistic_ps) throw Error(ErrorKind::Numeric, logistic_failure);
                const auto test = wlr_ate_test(data, kT, kY, kCovariates, logistic_ps->scores,
                                               methods[m] == McMethod::LogWlrCov);
                o.estimate = test.coef_t;
                o.reject = test.reject;
            }
            o.ok = true;
        } catch (const Error& e) {
            o.ok = false;
            o.failure = e.what();
        }
    }
    return out;
}

namespace {

CellResult aggregate(const Scenario& scenario, std::size_t n, McMethod method, std::size_t m,
                     const std::vector<std::vector<ReplicateOutcome>>& outcomes) {
    CellResult cell;
    cell.scenario = scenario.id;
    cell.n = n;
    cell.method = method;
    cell.true_ate = true_ate(scenario);
    cell.replicates = outcomes.size();
    cell.has_coverage = method == McMethod::BnHajek;
    cell.has_bias = method == McMethod::BnHajek;

    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t ok = 0;
    for (const auto& rep : outcomes) {
        const auto& o = rep[m];
        if (!o.ok) {
            ++cell.failures;
            ++cell.failure_reasons[o.failure];
            continue;
        }
        ++ok;
        sum += o.estimate;
        sum_sq += o.estimate * o.estimate;
        if (o.reject) ++cell.rejections;
        if (cell.has_coverage) {
            if (o.ci_high < cell.true_ate)
                ++cell.below;
            else if (o.ci_low > cell.true_ate)
                ++cell.above;
            else
                ++cell.covered;
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (ok == 0) {
        cell.err = cell.ec = cell.mean_est = cell.sd_est = cell.mean_bias = nan;
    } else {
        const double k = static_cast<double>(ok);
        cell.err = static_cast<double>(cell.rejections) / k;
        cell.ec = cell.has_coverage ? static_cast<double>(cell.covered) / k : nan;
        cell.mean_est = sum / k;
        cell.sd_est = ok > 1 ? std::sqrt(std::max(0.0, (sum_sq - k * cell.mean_est * cell.mean_est) / (k - 1.0)))
                             : 0.0;
        cell.mean_bias = cell.has_bias ? cell.mean_est - cell.true_ate : nan;
    }
    cell.valid = static_cast<double>(cell.failures) <= 0.05 * static_cast<double>(cell.replicates);
    return cell;
}

McResult run(const McConfig& cfg, bool parallel) {
    cfg.validate();
    McResult result;
    const auto reps = static_cast<std::ptrdiff_t>(cfg.replicates);
    for (const auto& scenario : cfg.scenarios) {
        const GroundTruthModel model(scenario);
        for (const auto n : cfg.sizes) {
            std::vector<std::vector<ReplicateOutcome>> outcomes(cfg.replicates);
            auto one = [&](std::ptrdiff_t r) {
                const auto sample = generate_dataset(
                    model, n, replicate_seed(cfg.master_seed, scenario.id, n, static_cast<std::size_t>(r)));
                outcomes[r] = run_replicate(sample, cfg.methods, cfg.bn);
            };
            if (parallel) {
#pragma omp parallel for schedule(dynamic) num_threads(cfg.workers)
                for (std::ptrdiff_t r = 0; r < reps; ++r) one(r);
            } else {
                for (std::ptrdiff_t r = 0; r < reps; ++r) one(r);
            }

            std::vector<CellResult> block;
            for (std::size_t m = 0; m < cfg.methods.size(); ++m)
                block.push_back(aggregate(scenario, n, cfg.methods[m], m, outcomes));
            if (cfg.on_cell_done) cfg.on_cell_done(block);
            for (auto& c : block) result.cells.push_back(std::move(c));
        }
    }
    return result;
}

std::string fixed6(double v) {
    return std::isnan(v) ? std::string("NA") : fmt::format("{:.6f}", v);
}

}  // namespace

McResult run_grid(const McConfig& cfg) { return run(cfg, true); }

McResult run_grid_serial(const McConfig& cfg) { return run(cfg, false); }

void write_results_csv(std::ostream& out, const McResult& result) {
    out << "scenario,n,method,err,ec,mean_est,sd_est,mean_bias,failures,valid\n";
    for (const auto& c : result.cells)
        out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", c.scenario, c.n, to_string(c.method),
                           fixed6(c.err), fixed6(c.ec), fixed6(c.mean_est), fixed6(c.sd_est),
                           fixed6(c.mean_bias), c.failures, c.valid ? 1 : 0);
}

namespace {

struct SummaryTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

SummaryTable build_summary(const McResult& result) {
    if (result.cells.empty()) fail_usage("empty result");
    std::vector<McMethod> methods;
    for (const auto& c : result.cells)
        if (std::find(methods.begin(), methods.end(), c.method) == methods.end())
            methods.push_back(c.method);

    SummaryTable table;
    table.header = {"scenario", "n"};
    for (const auto m : methods) table.header.push_back(fmt::format("{}_err", to_string(m)));
    const bool with_ec =
        std::find(methods.begin(), methods.end(), McMethod::BnHajek) != methods.end();
    if (with_ec) table.header.push_back("bn_hajek_ec");

    for (std::size_t i = 0; i < result.cells.size();) {
        const auto& first = result.cells[i];
        std::vector<std::string> row{first.scenario, std::to_string(first.n)};
        std::vector<std::string> errs(methods.size(), "NA");
        std::string ec = "NA";
        for (; i < result.cells.size() && result.cells[i].scenario == first.scenario &&
               result.cells[i].n == first.n;
             ++i) {
            const auto& c = result.cells[i];
            const auto pos = std::find(methods.begin(), methods.end(), c.method) - methods.begin();
            errs[pos] = fixed6(c.err);
            if (c.method == McMethod::BnHajek) ec = fixed6(c.ec);
        }
        row.insert(row.end(), errs.begin(), errs.end());
        if (with_ec) row.push_back(ec);
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace

void write_summary_csv(std::ostream& out, const McResult& result) {
    const auto table = build_summary(result);
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    };
    line(table.header);
    for (const auto& row : table.rows) line(row);
}

void write_summary_text(std::ostream& out, const McResult& result) {
    const auto table = build_summary(result);
    std::vector<std::size_t> width(table.header.size());
    for (std::size_t c = 0; c < width.size(); ++c) {
        width[c] = table.header[c].size();
        for (const auto& row : table.rows) width[c] = std::max(width[c], row[c].size());
    }
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c)
            out << (c ? "  " : "") << fmt::format("{:>{}}", cells[c], width[c]);
        out << '\n';
    };
    line(table.header);
    for (const auto& row : table.rows) line(row);
}

}  // namespace bnps
