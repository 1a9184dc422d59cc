// Runs every acceptance criterion at its stated tolerance and prints one
// PASS/FAIL line per criterion. Exit status is nonzero if any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <fmt/format.h>

#include "bnps/causal_estimators.hpp"
#include "bnps/ground_truth.hpp"
#include "bnps/logit_baseline.hpp"
#include "bnps/monte_carlo.hpp"
#include "bnps/structure_learning.hpp"
#include "support.hpp"

using namespace bnps;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20251017;

struct Verdict {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, std::string note) {
        pass = pass && ok;
        notes.push_back((ok ? "" : "[x] ") + std::move(note));
    }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string run_cli(const std::string& args, int* code = nullptr) {
    const std::string cmd = std::string(BNPS_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {};
    std::string out;
    std::array<char, 4096> buf{};
    while (const auto got = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), got);
    const int status = pclose(pipe);
    if (code) *code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

const CellResult& find_cell(const McResult& r, std::string_view id, std::size_t n, McMethod m) {
    for (const auto& c : r.cells)
        if (c.scenario == id && c.n == n && c.method == m) return c;
    throw std::runtime_error("cell missing");
}

McResult simulate(std::vector<std::string> ids, std::size_t n, std::size_t reps,
                  std::vector<McMethod> methods) {
    McConfig cfg;
    for (const auto& id : ids) cfg.scenarios.push_back(scenario_by_id(id));
    cfg.sizes = {n};
    cfg.replicates = reps;
    cfg.methods = std::move(methods);
    cfg.master_seed = kSeed;
    cfg.workers = 4;
    return run_grid(cfg);
}

std::string describe(const CellResult& c) {
    return fmt::format("{}/{} {}: ERR={:.3f}{} ({} failures)", c.scenario, c.n, to_string(c.method), c.err,
                       c.has_coverage ? fmt::format(" EC={:.3f}", c.ec) : "", c.failures);
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

// ------------------------------------------------------------------ criteria

Verdict true_ate_table() {
    const std::pair<const char*, double> table[] = {
        {"S1", 0.0000},  {"S2", 0.1497},  {"S3", 0.5033},  {"S4", 0.0000},  {"S5", 0.2009},
        {"S6", 0.5318},  {"S7", 0.0000},  {"S8", 0.0791},  {"S9", 0.3042},  {"S10", 0.0000},
        {"S11", 0.1131}, {"S12", 0.3857}, {"S13", 0.0000}, {"S14", 0.1104}, {"S15", 0.3482},
    };
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (const auto& [id, ate] : table) {
        int code = 0;
        const auto out = run_cli(fmt::format("true-ate --scenario {}", id), &code);
        const double got = code == 0 ? std::stod(out) : NAN;
        const double err = std::abs(got - ate);
        worst = std::isnan(err) ? err : std::max(worst, err);
        v.require(err <= 5e-5, fmt::format("{} = {:.6f} (exact {:.7f}, table {:.4f}, |diff| {:.3g})", id, got,
                                          true_ate(scenario_by_id(id)), ate, err));
    }
    const double secs = seconds_since(start);
    v.notes.erase(std::remove_if(v.notes.begin(), v.notes.end(), [](const std::string& s) { return s[0] != '['; }),
                  v.notes.end());
    v.notes.push_back(fmt::format("15 scenarios, max |diff| = {:.3g}", worst));
    v.require(secs < 1.0, fmt::format("{:.2f}s", secs));
    return v;
}

Verdict joint_normalisation() {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    const auto bn = ground_truth_network();
    double total = 0.0;
    int count = 0;
    testing::for_each_assignment(bn, [&](const std::vector<int>& x) {
        total += testing::joint_probability(bn, x);
        ++count;
    });
    v.require(count == 288 && std::abs(total - 1.0) <= 1e-12,
              fmt::format("{} configurations, |sum - 1| = {:.1e}", count, std::abs(total - 1.0)));

    const std::size_t n = 1000000;
    const auto d = generate_dataset(GroundTruthModel(scenario_by_id("S1")), n, kSeed).data;
    std::array<double, 8> counts{};
    for (std::size_t i = 0; i < n; ++i) ++counts[4 * d.at(i, kX5) + 2 * d.at(i, kX6) + d.at(i, kT)];
    const auto cells = covariate_cell_probs();
    double worst_z = 0.0;
    for (int c = 0; c < 8; ++c) {
        const double e = true_propensity(c / 4, (c / 2) % 2);
        const double p = cells[2 * (c / 4) + (c / 2) % 2] * (c % 2 ? e : 1.0 - e);
        worst_z = std::max(worst_z, std::abs(counts[c] / n - p) / std::sqrt(p * (1 - p) / n));
    }
    v.require(worst_z <= 5.0, fmt::format("(X5,X6,T) cells at n=1e6: max |z| = {:.2f}", worst_z));
    const double secs = seconds_since(start);
    v.require(secs < 10.0, fmt::format("{:.2f}s", secs));
    return v;
}

Verdict oracle_weights() {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    const auto d = generate_dataset(GroundTruthModel(scenario_by_id("S6")), 200000, kSeed).data;
    std::vector<int> y(d.rows()), t(d.rows());
    std::vector<double> e(d.rows());
    for (std::size_t i = 0; i < d.rows(); ++i) {
        y[i] = d.at(i, kY);
        t[i] = d.at(i, kT);
        e[i] = true_propensity(d.at(i, kX5), d.at(i, kX6));
    }
    const double ate = hajek_ate(y, t, e).ate;
    v.require(std::abs(ate - 0.5318) <= 0.01, fmt::format("S6 n=200000 Hajek with true scores = {:.4f}", ate));
    const double secs = seconds_since(start);
    v.require(secs < 5.0, fmt::format("{:.2f}s", secs));
    return v;
}

Verdict null_calibration() {
    Verdict v;
    auto start = std::chrono::steady_clock::now();
    const auto s4 = simulate({"S4"}, 2500, 1000, {McMethod::BnHajek});
    const auto& c4 = s4.cells.at(0);
    v.require(within(c4.err, 0.03, 0.08) && c4.valid, describe(c4) + " in [0.03, 0.08]");
    const auto s1 = simulate({"S1"}, 250, 1000, {McMethod::BnHajek});
    const auto& c1 = s1.cells.at(0);
    v.require(c1.err <= 0.01 && c1.valid, describe(c1) + " <= 0.01");
    v.notes.push_back(fmt::format("full variant {:.0f}s", seconds_since(start)));

    start = std::chrono::steady_clock::now();
    McConfig smoke;
    smoke.scenarios = {scenario_by_id("S4")};
    smoke.sizes = {2500};
    smoke.replicates = 300;
    smoke.master_seed = kSeed + 1;
    smoke.workers = 4;
    const auto sm = run_grid(smoke).cells.at(0);
    const double secs = seconds_since(start);
    v.require(within(sm.err, 0.02, 0.10) && secs <= 300.0,
              "smoke (300 reps) " + describe(sm) + fmt::format(" in [0.02, 0.10], {:.0f}s", secs));
    return v;
}

Verdict power() {
    Verdict v;
    const auto s3 = simulate({"S3"}, 250, 1000, {McMethod::BnHajek}).cells.at(0);
    v.require(s3.err >= 0.99 && s3.valid, describe(s3) + " >= 0.99");
    const auto s2 = simulate({"S2"}, 500, 1000, {McMethod::BnHajek}).cells.at(0);
    v.require(s2.err >= 0.90 && s2.valid, describe(s2) + " >= 0.90");
    return v;
}

Verdict coverage() {
    Verdict v;
    const auto r = simulate({"S2", "S12"}, 1000, 1000, {McMethod::BnHajek});
    for (const auto& c : r.cells) v.require(within(c.ec, 0.92, 0.97) && c.valid, describe(c) + ", EC in [0.92, 0.97]");
    return v;
}

Verdict misspecification() {
    Verdict v;
    const auto r = simulate({"S13"}, 2500, 1000, {McMethod::BnHajek, McMethod::LogWlrNoCov, McMethod::LogWlrCov});
    const auto& nocov = find_cell(r, "S13", 2500, McMethod::LogWlrNoCov);
    const auto& cov = find_cell(r, "S13", 2500, McMethod::LogWlrCov);
    const auto& bn = find_cell(r, "S13", 2500, McMethod::BnHajek);
    v.require(nocov.err >= 0.90 && nocov.valid, describe(nocov) + " >= 0.90");
    v.require(within(cov.err, 0.02, 0.09) && cov.valid, describe(cov) + " in [0.02, 0.09]");
    v.require(within(bn.err, 0.03, 0.08) && bn.valid, describe(bn) + " in [0.03, 0.08]");
    return v;
}

Verdict search_certification() {
    Verdict v;
    const auto bn = ground_truth_network();
    int certified = 0, dominated = 0;
    for (std::uint64_t k = 0; k < 100; ++k) {
        const auto d = ancestral_sample(bn, 1000, mix_seed(kSeed, {0x5ea4c4, k}));
        SearchConfig cfg;
        const auto tabu = tabu_search(d, cfg);
        const auto hc = hill_climb(d, cfg);
        if (!find_improving_move(d, tabu.dag, cfg)) ++certified;
        if (tabu.score >= hc.score) ++dominated;
    }
    v.require(certified == 100, fmt::format("{}/100 tabu results admit no improving move", certified));
    v.require(dominated == 100, fmt::format("{}/100 tabu BIC >= hill-climb BIC", dominated));
    return v;
}

Verdict numerical_oracles() {
    Verdict v;
    Engine rng(kSeed);
    double worst_query = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto bn = testing::random_network(rng, 4, 3);
        std::vector<int> ev(bn.node_count());
        for (int i = 0; i < bn.node_count(); ++i) ev[i] = static_cast<int>(rng() % bn.variable(i).cardinality());
        const int target = static_cast<int>(rng() % bn.node_count());
        const auto fast = conditional_distribution(bn, target, ev);
        const auto slow = testing::brute_force_conditional(bn, target, ev);
        for (std::size_t s = 0; s < fast.size(); ++s) worst_query = std::max(worst_query, std::abs(fast[s] - slow[s]));
    }
    v.require(worst_query <= 1e-12, fmt::format("conditional query vs joint, 200 networks: max diff {:.1e}", worst_query));

    double worst_delta = 0.0;
    int moves = 0;
    while (moves < 500) {
        const auto bn = testing::random_network(rng, 4, 3);
        if (bn.node_count() < 2) continue;
        const auto data = ancestral_sample(bn, 200, rng());
        FamilyScoreCache cache(data);
        const auto legal = legal_moves(bn.dag(), {});
        const auto& m = legal[rng() % legal.size()];
        const double delta = score_delta(cache, bn.dag(), m);
        const double full = bic_score(data, std::get<Dag>(apply_move(bn.dag(), m))).total - bic_score(data, bn.dag()).total;
        worst_delta = std::max(worst_delta, std::abs(delta - full));
        ++moves;
    }
    v.require(worst_delta <= 1e-9, fmt::format("score_delta vs rescore, 500 moves: max diff {:.1e}", worst_delta));

    double worst_irls = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        // Saturated 2x2 table with k0/m0 successes at x=0 and k1/m1 at x=1.
        const int m0 = 5 + static_cast<int>(rng() % 40), m1 = 5 + static_cast<int>(rng() % 40);
        const int k0 = 1 + static_cast<int>(rng() % (m0 - 1)), k1 = 1 + static_cast<int>(rng() % (m1 - 1));
        Eigen::MatrixXd x(m0 + m1, 2);
        std::vector<double> y, w(m0 + m1, 1.0);
        for (int i = 0; i < m0 + m1; ++i) {
            x(i, 0) = 1.0;
            x(i, 1) = i < m0 ? 0.0 : 1.0;
            y.push_back(i < m0 ? (i < k0) : (i - m0 < k1));
        }
        auto logit = [](double p) { return std::log(p / (1 - p)); };
        const double b0 = logit(static_cast<double>(k0) / m0);
        const double b1 = logit(static_cast<double>(k1) / m1) - b0;
        const auto fit = irls_fit(x, y, w);
        worst_irls = std::max({worst_irls, std::abs(fit.coefficients(0) - b0), std::abs(fit.coefficients(1) - b1)});
    }
    v.require(worst_irls <= 1e-6, fmt::format("IRLS vs closed-form saturated 2x2, 50 tables: max diff {:.1e}", worst_irls));
    return v;
}

Verdict determinism() {
    Verdict v;
    const auto dir = fs::temp_directory_path() / "bnps_acceptance";
    fs::create_directories(dir);
    const std::string base = fmt::format(
        "simulate --scenarios S1,S4,S13 --sizes 250,500 --replicates 100 "
        "--methods bn_hajek,log_wlr_nocov,log_wlr_cov --seed {} --quiet",
        kSeed);
    int c1 = -1, c8 = -1;
    run_cli(base + " --workers 1 --out " + (dir / "w1.csv").string(), &c1);
    run_cli(base + " --workers 8 --out " + (dir / "w8.csv").string(), &c8);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    };
    const auto a = slurp(dir / "w1.csv");
    const auto b = slurp(dir / "w8.csv");
    v.require(c1 == 0 && c8 == 0 && !a.empty() && a == b,
              fmt::format("workers=1 vs workers=8: {} bytes, {}", a.size(), a == b ? "identical" : "different"));
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"true-ATE table", true_ate_table},
        {"joint normalisation", joint_normalisation},
        {"oracle-weight consistency", oracle_weights},
        {"null calibration", null_calibration},
        {"power", power},
        {"coverage", coverage},
        {"misspecification", misspecification},
        {"search certification", search_certification},
        {"numerical oracles", numerical_oracles},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.require(false, fmt::format("exception: {}", e.what()));
        }
        if (!v.pass) ++failed;
        std::string detail;
        for (const auto& n : v.notes) detail += (detail.empty() ? "" : "; ") + n;
        std::cout << fmt::format("criterion {:>2} {:<26} {}  [{:.1f}s] {}\n", i + 1, criteria[i].first,
                                 v.pass ? "PASS" : "FAIL", seconds_since(start), detail)
                  << std::flush;
    }
    std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
