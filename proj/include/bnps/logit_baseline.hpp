#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bnps/categorical_data.hpp"
#include "bnps/causal_estimators.hpp"

namespace bnps {

struct IrlsOptions {
    double tol = 1e-8;
    int max_iter = 50;
    bool robust = true;
    /// Any |coefficient| above this during iteration is reported as separation.
    double separation_bound = 1e3;
};

struct LogitModel {
    Eigen::VectorXd coefficients;  // intercept first when the design has one
    Eigen::MatrixXd covariance;
    bool converged = false;
    int iterations = 0;
    bool robust = false;

    Eigen::VectorXd predict(const Eigen::MatrixXd& design) const;
};

/// Weighted logistic regression by Newton-Raphson / IRLS.
///
/// Maximises sum w_i [y_i log pi_i + (1 - y_i) log(1 - pi_i)]. The covariance
/// is the sandwich A^-1 B A^-1 when robust, else A^-1, with
/// A = sum w pi (1 - pi) x x' and B = sum w^2 (y - pi)^2 x x'.
LogitModel irls_fit(const Eigen::MatrixXd& design, std::span<const double> y,
                    std::span<const double> weights, const IrlsOptions& options = {});

enum class DummyReference { First, Last };

/// Intercept plus treatment-coded dummies for each listed column. Levels that
/// never occur in the data are dropped; the reference is the first (or last)
/// observed level.
Eigen::MatrixXd dummy_design(const CategoricalDataset& data, std::span<const std::size_t> columns,
                             DummyReference reference = DummyReference::First);

/// Main-effects logistic propensity model, clipped like the network scores.
PropensityScores ps_logistic(const CategoricalDataset& data, std::size_t treatment,
                             std::span<const std::size_t> covariates, double clip_epsilon = 1e-6,
                             std::string_view treated_label = "1");

struct WlrTest {
    double coef_t = 0.0;
    double se_t = 0.0;
    double z = 0.0;
    double p_value = 1.0;
    bool reject = false;
};

/// IPW-weighted logistic regression of the outcome on [1, T] (or [1, T,
/// covariate dummies]) with robust covariance; Wald test on T at 5%.
WlrTest wlr_ate_test(const CategoricalDataset& data, std::size_t treatment, std::size_t outcome,
                     std::span<const std::size_t> covariates, std::span<const double> ps,
                     bool with_covariates, std::string_view treated_label = "1",
                     std::string_view outcome_label = "1");

/// Two-sided standard normal tail probability.
double two_sided_p(double z);

}  // namespace bnps
