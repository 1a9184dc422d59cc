#include "bnps/ground_truth.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "bnps/error.hpp"
#include "bnps/random.hpp"

namespace bnps {

namespace {

const std::array<Scenario, 15> kScenarios{{
    {"S1", -2, 0, 0, 0},   {"S2", -2, 1, 0, 0},   {"S3", -2, 2.5, 0, 0},
    {"S4", -2, 0, 1, 0},   {"S5", -2, 1, 1, 0},   {"S6", -2, 2.5, 1, 0},
    {"S7", -2, 0, 0, -2},  {"S8", -2, 1, 0, -2},  {"S9", -2, 2.5, 0, -2},
    {"S10", -2, 0, 1, -2}, {"S11", -2, 1, 1, -2}, {"S12", -2, 2.5, 1, -2},
    {"S13", -2, 0, 2, -3}, {"S14", -2, 1, 2, -3}, {"S15", -2, 2.5, 2, -3},
}};

// P(T = 1 | X5, X6) indexed [2 * x5 + x6].
constexpr std::array<double, 4> kTreatment{0.2, 0.6, 0.4, 0.2};

// Binary row from P(state 1).
std::vector<double> binary_row(double p1) { return {1.0 - p1, p1}; }

// Three-state row from P(state 1), P(state 2); state 0 takes the rest.
std::vector<double> ternary_row(double p1, double p2) { return {1.0 - p1 - p2, p1, p2}; }

std::vector<double> concat(std::initializer_list<std::vector<double>> rows) {
    std::vector<double> out;
    for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
    return out;
}

}  // namespace

std::span<const Scenario> scenario_registry() { return kScenarios; }

const Scenario& scenario_by_id(std::string_view id) {
    for (const auto& s : kScenarios)
        if (s.id == id) return s;
    fail_usage(fmt::format("unknown scenario '{}'", id));
}

BayesianNetwork ground_truth_network() {
    const std::vector<std::string> bin{"0", "1"};
    const std::vector<std::string> tri{"0", "1", "2"};
    std::vector<VariableMeta> vars{{"X1", bin}, {"X2", bin}, {"X3", tri}, {"X4", tri},
                                   {"X5", bin}, {"X6", bin}, {"T", bin}};
    const std::vector<Arc> arcs{{kX1, kX2}, {kX1, kX3}, {kX1, kX4}, {kX3, kX5},
                                {kX5, kX6}, {kX5, kT},  {kX6, kT}};
    Dag dag = Dag::from_arcs(7, arcs);

    std::vector<Cpt> cpts;
    cpts.emplace_back(kX1, std::vector<int>{}, 2, std::vector<int>{}, binary_row(0.6553));
    cpts.emplace_back(kX2, std::vector<int>{kX1}, 2, std::vector<int>{2},
                      concat({binary_row(0.9961), binary_row(0.4384)}));
    cpts.emplace_back(kX3, std::vector<int>{kX1}, 3, std::vector<int>{2},
                      concat({ternary_row(0.2186, 0.6238), ternary_row(0.2102, 0.0556)}));
    cpts.emplace_back(kX4, std::vector<int>{kX1}, 3, std::vector<int>{2},
                      concat({ternary_row(0.1600, 0.6778), ternary_row(0.4151, 0.5150)}));
    cpts.emplace_back(kX5, std::vector<int>{kX3}, 2, std::vector<int>{3},
                      concat({binary_row(0.4536), binary_row(0.6636), binary_row(0.9726)}));
    cpts.emplace_back(kX6, std::vector<int>{kX5}, 2, std::vector<int>{2},
                      concat({binary_row(0.3967), binary_row(0.7000)}));
    cpts.emplace_back(kT, std::vector<int>{kX5, kX6}, 2, std::vector<int>{2, 2},
                      concat({binary_row(kTreatment[0]), binary_row(kTreatment[1]),
                              binary_row(kTreatment[2]), binary_row(kTreatment[3])}));
    return BayesianNetwork(std::move(vars), std::move(dag), std::move(cpts));
}

double true_propensity(int x5, int x6) { return kTreatment.at(2 * x5 + x6); }

std::array<double, 4> covariate_cell_probs() {
    const auto bn = ground_truth_network();
    const auto& x1 = bn.cpt(kX1);
    const auto& x3 = bn.cpt(kX3);
    const auto& x5 = bn.cpt(kX5);
    const auto& x6 = bn.cpt(kX6);

    std::array<double, 3> p3{};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 3; ++b) p3[b] += x1.prob(0, a) * x3.prob(a, b);
    std::array<double, 2> p5{};
    for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 2; ++c) p5[c] += p3[b] * x5.prob(b, c);
    std::array<double, 4> cells{};
    for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) cells[2 * c + d] = p5[c] * x6.prob(c, d);
    return cells;
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

OutcomeProbs potential_outcome_probs(const Scenario& s, int x5, int x6) {
    const double base = s.alpha0 + s.beta1 * x5 + s.beta2 * x6;
    return {logistic(base), logistic(base + s.alpha1)};
}

double true_ate(const Scenario& s) {
    const auto cells = covariate_cell_probs();
    double theta0 = 0.0;
    double theta1 = 0.0;
    for (int x5 = 0; x5 < 2; ++x5)
        for (int x6 = 0; x6 < 2; ++x6) {
            const auto probs = potential_outcome_probs(s, x5, x6);
            theta0 += cells[2 * x5 + x6] * probs.p0;
            theta1 += cells[2 * x5 + x6] * probs.p1;
        }
    return theta1 - theta0;
}

GroundTruthModel::GroundTruthModel(Scenario scenario)
    : scenario_(std::move(scenario)), network_(ground_truth_network()) {}

SimulatedSample generate_dataset(const GroundTruthModel& model, std::size_t n, std::uint64_t seed) {
    const auto covariates = ancestral_sample(model.network(), n, seed);
    Engine stream0(mix_seed(seed, {0x59'30}));  // "Y0"
    Engine stream1(mix_seed(seed, {0x59'31}));  // "Y1"

    SimulatedSample sample;
    sample.y0.resize(n);
    sample.y1.resize(n);
    std::vector<int> y(n);
    const auto x5 = covariates.column(kX5);
    const auto x6 = covariates.column(kX6);
    const auto t = covariates.column(kT);
    for (std::size_t i = 0; i < n; ++i) {
        const auto probs = potential_outcome_probs(model.scenario(), x5[i], x6[i]);
        sample.y0[i] = bernoulli(probs.p0, stream0) ? 1 : 0;
        sample.y1[i] = bernoulli(probs.p1, stream1) ? 1 : 0;
        y[i] = t[i] == 1 ? sample.y1[i] : sample.y0[i];
    }

    auto vars = covariates.variables();
    vars.push_back({"Y", {"0", "1"}});
    std::vector<std::vector<int>> columns;
    for (std::size_t c = 0; c < covariates.cols(); ++c) {
        const auto col = covariates.column(c);
        columns.emplace_back(col.begin(), col.end());
    }
    columns.push_back(std::move(y));
    sample.data = CategoricalDataset(std::move(vars), std::move(columns));
    return sample;
}

void write_scenarios_csv(std::ostream& out) {
    out << "id,alpha0,alpha1,beta1,beta2,true_ate\n";
    for (const auto& s : kScenarios)
        out << fmt::format("{},{},{},{},{},{:.6f}\n", s.id, s.alpha0, s.alpha1, s.beta1, s.beta2,
                           true_ate(s));
}

}  // namespace bnps
