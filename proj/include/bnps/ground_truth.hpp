#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bnps/bayesian_network.hpp"

namespace bnps {

/// Coefficients of the potential-outcome models
///   logit P(Y(0)=1 | x5, x6) = alpha0 + beta1 x5 + beta2 x6
///   logit P(Y(1)=1 | x5, x6) = alpha0 + alpha1 + beta1 x5 + beta2 x6
struct Scenario {
    std::string id;
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
};

/// S1..S15 in order.
std::span<const Scenario> scenario_registry();
/// Throws a usage error for unknown ids.
const Scenario& scenario_by_id(std::string_view id);

// Column layout of the simulation network and of generated datasets.
enum GroundTruthColumn : int { kX1 = 0, kX2, kX3, kX4, kX5, kX6, kT, kY };

/// The seven-node simulation network over X1..X6 and T:
/// X1 -> {X2, X3, X4}, X3 -> X5, X5 -> X6, {X5, X6} -> T.
/// X3 and X4 have three states, everything else two; states are "0","1"(,"2").
BayesianNetwork ground_truth_network();

/// True P(T = 1 | x5, x6).
double true_propensity(int x5, int x6);

/// P(X5 = x5, X6 = x6) by exact marginalisation along X1 -> X3 -> X5 -> X6,
/// indexed [2 * x5 + x6].
std::array<double, 4> covariate_cell_probs();

struct OutcomeProbs {
    double p0 = 0.0;
    double p1 = 0.0;
};

double logistic(double z);
OutcomeProbs potential_outcome_probs(const Scenario& s, int x5, int x6);

/// theta1 - theta0 with theta_k = sum over (x5, x6) of P(x5, x6) P(Y(k)=1 | x5, x6).
double true_ate(const Scenario& s);

class GroundTruthModel {
public:
    explicit GroundTruthModel(Scenario scenario);

    const Scenario& scenario() const { return scenario_; }
    const BayesianNetwork& network() const { return network_; }

private:
    Scenario scenario_;
    BayesianNetwork network_;
};

struct SimulatedSample {
    CategoricalDataset data;  // columns X1..X6, T, Y
    std::vector<int> y0;
    std::vector<int> y1;
};

/// Draws X1..X6 and T by ancestral sampling, then Y(0) and Y(1) from two
/// further independent streams, and sets Y = Y(T). Pure in (model, n, seed).
SimulatedSample generate_dataset(const GroundTruthModel& model, std::size_t n, std::uint64_t seed);

/// CSV: id,alpha0,alpha1,beta1,beta2,true_ate
void write_scenarios_csv(std::ostream& out);

}  // namespace bnps
