#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bnps/causal_estimators.hpp"
#include "bnps/ground_truth.hpp"

namespace bnps {

enum class McMethod { BnHajek, LogWlrNoCov, LogWlrCov };

const char* to_string(McMethod method);
McMethod parse_method(std::string_view name);

struct CellResult;

struct McConfig {
    std::vector<Scenario> scenarios;
    std::vector<std::size_t> sizes;
    std::size_t replicates = 1000;
    std::vector<McMethod> methods{McMethod::BnHajek};
    std::uint64_t master_seed = 0;
    int workers = 1;
    BnpsOptions bn;
    /// Called once per finished (scenario, n) block, in grid order.
    std::function<void(const std::vector<CellResult>&)> on_cell_done;

    void validate() const;
};

/// Seed of replicate r in cell (scenario, n): mix_seed(master, {fnv1a64(id), n, r}).
/// Cells do not share streams, and the value does not depend on the grid.
std::uint64_t replicate_seed(std::uint64_t master, std::string_view scenario_id, std::size_t n,
                             std::size_t replicate);

/// What one method produced on one replicate.
struct ReplicateOutcome {
    bool ok = false;
    std::string failure;
    double estimate = 0.0;  // ATE for bn_hajek, log-odds coefficient of T for WLR
    bool reject = false;
    bool has_interval = false;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct CellResult {
    std::string scenario;
    std::size_t n = 0;
    McMethod method = McMethod::BnHajek;
    double true_ate = 0.0;
    std::size_t replicates = 0;
    std::size_t failures = 0;
    std::map<std::string, std::size_t> failure_reasons;
    std::size_t rejections = 0;
    // Interval bookkeeping: covered + below + above == replicates - failures.
    bool has_coverage = false;
    std::size_t covered = 0;
    std::size_t below = 0;  // ci_high < true ATE
    std::size_t above = 0;  // ci_low > true ATE
    double err = 0.0;
    double ec = 0.0;
    double mean_est = 0.0;
    double sd_est = 0.0;
    bool has_bias = false;
    double mean_bias = 0.0;
    bool valid = true;  // false when more than 5% of replicates failed
};

struct McResult {
    std::vector<CellResult> cells;  // scenario-major, then size, then method
};

/// Runs every method of `cfg` on one simulated dataset.
std::vector<ReplicateOutcome> run_replicate(const SimulatedSample& sample,
                                            const std::vector<McMethod>& methods,
                                            const BnpsOptions& options);

/// OpenMP over replicates within each cell; `cfg.workers` threads.
McResult run_grid(const McConfig& cfg);

/// Single-threaded reference with the same results bit for bit.
McResult run_grid_serial(const McConfig& cfg);

/// CSV: scenario,n,method,err,ec,mean_est,sd_est,mean_bias,failures,valid
void write_results_csv(std::ostream& out, const McResult& result);

/// Table layout: one row per (scenario, n), ERR per method, plus EC where
/// the method provides an interval.
void write_summary_csv(std::ostream& out, const McResult& result);
void write_summary_text(std::ostream& out, const McResult& result);

}  // namespace bnps
