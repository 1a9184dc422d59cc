#include "bnps/logit_baseline.hpp"

#include <cmath>

#include <fmt/format.h>

#include "bnps/error.hpp"
#include "bnps/ground_truth.hpp"

namespace bnps {

Eigen::VectorXd LogitModel::predict(const Eigen::MatrixXd& design) const {
    const Eigen::VectorXd eta = design * coefficients;
    return eta.unaryExpr([](double z) { return logistic(z); });
}

namespace {

Eigen::MatrixXd information(const Eigen::MatrixXd& x, const Eigen::VectorXd& w) {
    return x.transpose() * w.asDiagonal() * x;
}

}  // namespace

LogitModel irls_fit(const Eigen::MatrixXd& design, std::span<const double> y,
                    std::span<const double> weights, const IrlsOptions& options) {
    const auto n = design.rows();
    const auto k = design.cols();
    if (static_cast<std::size_t>(n) != y.size() || y.size() != weights.size())
        fail_usage("design, outcome and weight lengths differ");
    if (k == 0) fail_usage("empty design");
    double weight_sum = 0.0;
    for (const double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) fail_numeric("weights must be finite and nonnegative");
        weight_sum += w;
    }
    if (!(weight_sum > 0.0)) fail_numeric("all weights are zero");

    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
    const Eigen::Map<const Eigen::VectorXd> wv(weights.data(), n);

    LogitModel model;
    model.robust = options.robust;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd pi(n);
    Eigen::VectorXd curvature(n);

    auto refresh = [&] {
        pi = (design * beta).unaryExpr([](double z) { return logistic(z); });
        curvature = wv.cwiseProduct(pi.cwiseProduct((1.0 - pi.array()).matrix()));
    };
    // At beta = 0 the information is the weighted design Gram matrix, so a
    // degenerate first factorisation means rank deficiency; later ones come
    // from fitted probabilities collapsing onto 0 or 1.
    auto factorize = [&](const Eigen::MatrixXd& a, const char* reason) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
        // rcond() skips exactly-zero pivots, so the pivot ratio is checked as well.
        const auto d = ldlt.vectorD().cwiseAbs();
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-12 ||
            !(d.minCoeff() > 1e-12 * d.maxCoeff()))
            fail_numeric(reason);
        return ldlt;
    };

    refresh();
    for (int it = 1; it <= options.max_iter; ++it) {
        const Eigen::VectorXd gradient = design.transpose() * wv.cwiseProduct(yv - pi);
        const auto ldlt = factorize(information(design, curvature),
                                    it == 1 ? "singular information" : "separation suspected");
        const Eigen::VectorXd step = ldlt.solve(gradient);
        beta += step;
        model.iterations = it;
        if (beta.cwiseAbs().maxCoeff() > options.separation_bound || !beta.allFinite())
            fail_numeric("separation suspected");
        refresh();
        if (step.cwiseAbs().maxCoeff() < options.tol) {
            model.converged = true;
            break;
        }
    }

    const Eigen::MatrixXd a = information(design, curvature);
    const auto ldlt = factorize(a, "separation suspected");
    const Eigen::MatrixXd a_inv = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
    if (options.robust) {
        const Eigen::VectorXd resid = wv.cwiseProduct(yv - pi);
        const Eigen::MatrixXd b = design.transpose() * resid.cwiseAbs2().asDiagonal() * design;
        model.covariance = a_inv * b * a_inv;
    } else {
        model.covariance = a_inv;
    }
    model.covariance = 0.5 * (model.covariance + model.covariance.transpose()).eval();
    model.coefficients = std::move(beta);
    return model;
}

Eigen::MatrixXd dummy_design(const CategoricalDataset& data, std::span<const std::size_t> columns,
                             DummyReference reference) {
    const auto n = static_cast<Eigen::Index>(data.rows());
    struct Block {
        std::size_t column;
        std::vector<int> levels;  // non-reference observed levels
    };
    std::vector<Block> blocks;
    Eigen::Index width = 1;
    for (const auto c : columns) {
        const int r = data.variable(c).cardinality();
        std::vector<char> seen(r, 0);
        for (const int code : data.column(c)) seen[code] = 1;
        std::vector<int> observed;
        for (int s = 0; s < r; ++s)
            if (seen[s]) observed.push_back(s);
        if (observed.size() < 2) continue;  // constant in this sample
        if (reference == DummyReference::First)
            observed.erase(observed.begin());
        else
            observed.pop_back();
        width += static_cast<Eigen::Index>(observed.size());
        blocks.push_back({c, std::move(observed)});
    }

    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, width);
    x.col(0).setOnes();
    Eigen::Index offset = 1;
    for (const auto& block : blocks) {
        const auto col = data.column(block.column);
        for (std::size_t j = 0; j < block.levels.size(); ++j) {
            const int level = block.levels[j];
            for (Eigen::Index i = 0; i < n; ++i)
                if (col[i] == level) x(i, offset + static_cast<Eigen::Index>(j)) = 1.0;
        }
        offset += static_cast<Eigen::Index>(block.levels.size());
    }
    return x;
}

PropensityScores ps_logistic(const CategoricalDataset& data, std::size_t treatment,
                             std::span<const std::size_t> covariates, double clip_epsilon,
                             std::string_view treated_label) {
    const auto t = indicator(data, treatment, treated_label);
    const std::vector<double> ty(t.begin(), t.end());
    const std::vector<double> ones(t.size(), 1.0);
    const auto x = dummy_design(data, covariates);
    IrlsOptions options;
    options.robust = false;
    const auto model = irls_fit(x, ty, ones, options);
    const Eigen::VectorXd fitted = model.predict(x);

    PropensityScores out;
    out.scores.assign(fitted.data(), fitted.data() + fitted.size());
    out.clipped = clip_scores(out.scores, clip_epsilon);
    return out;
}

double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

WlrTest wlr_ate_test(const CategoricalDataset& data, std::size_t treatment, std::size_t outcome,
                     std::span<const std::size_t> covariates, std::span<const double> ps,
                     bool with_covariates, std::string_view treated_label,
                     std::string_view outcome_label) {
    const auto t = indicator(data, treatment, treated_label);
    const auto y = indicator(data, outcome, outcome_label);
    if (ps.size() != t.size()) fail_usage("one propensity score per row required");

    std::vector<double> weights(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(ps[i] > 0.0 && ps[i] < 1.0)) fail_numeric("propensity scores must lie in (0,1)");
        weights[i] = t[i] ? 1.0 / ps[i] : 1.0 / (1.0 - ps[i]);
    }

    const std::span<const std::size_t> none;
    const Eigen::MatrixXd covs = dummy_design(data, with_covariates ? covariates : none);
    Eigen::MatrixXd x(covs.rows(), covs.cols() + 1);
    x.col(0) = covs.col(0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 1) = t[i];
    x.rightCols(covs.cols() - 1) = covs.rightCols(covs.cols() - 1);

    const std::vector<double> yd(y.begin(), y.end());
    const auto model = irls_fit(x, yd, weights);

    WlrTest out;
    out.coef_t = model.coefficients(1);
    out.se_t = std::sqrt(model.covariance(1, 1));
    if (!(out.se_t > 0.0)) fail_numeric("degenerate variance");
    out.z = out.coef_t / out.se_t;
    out.p_value = two_sided_p(out.z);
    out.reject = out.p_value < 0.05;
    return out;
}

}  // namespace bnps
