#include <doctest.h>

#include <cmath>

#include "bnps/error.hpp"
#include "bnps/ground_truth.hpp"
#include "bnps/logit_baseline.hpp"
#include "support.hpp"

using namespace bnps;
using doctest::Approx;

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

// 2x2 table: x = 0 has 2/10 successes, x = 1 has 6/10.
struct Table {
    Eigen::MatrixXd x;
    std::vector<double> y;
    std::vector<double> w;
};

Table saturated_table() {
    Table t;
    t.x.resize(20, 2);
    for (int i = 0; i < 20; ++i) {
        t.x(i, 0) = 1.0;
        t.x(i, 1) = i < 10 ? 0.0 : 1.0;
        t.y.push_back(i < 10 ? (i < 2 ? 1.0 : 0.0) : (i < 16 ? 1.0 : 0.0));
        t.w.push_back(1.0);
    }
    return t;
}

Eigen::MatrixXd information(const Eigen::MatrixXd& x, const Eigen::VectorXd& pi,
                            std::span<const double> w) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(x.cols(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        a += w[i] * pi(i) * (1.0 - pi(i)) * x.row(i).transpose() * x.row(i);
    return a;
}

}  // namespace

TEST_CASE("intercept-only closed forms") {
    const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(4, 1);
    const std::vector<double> y{1, 0, 0, 0}, w(4, 1.0);
    const auto m = irls_fit(one, y, w);
    CHECK(m.converged);
    CHECK(m.coefficients(0) == Approx(-1.098612).epsilon(1e-6));

    const Eigen::MatrixXd two = Eigen::MatrixXd::Ones(2, 1);
    const std::vector<double> y2{1, 0}, w2{3, 1};
    CHECK(irls_fit(two, y2, w2).coefficients(0) == Approx(1.098612).epsilon(1e-6));
}

TEST_CASE("saturated 2x2 closed form, cell reproduction and sandwich") {
    const auto t = saturated_table();
    const auto m = irls_fit(t.x, t.y, t.w);
    CHECK(std::abs(m.coefficients(0) - logit(0.2)) <= 1e-6);
    CHECK(std::abs(m.coefficients(1) - (logit(0.6) - logit(0.2))) <= 1e-6);
    CHECK(m.coefficients(0) == Approx(-1.386294).epsilon(1e-6));
    CHECK(m.coefficients(1) == Approx(1.791759).epsilon(1e-6));

    const auto pi = m.predict(t.x);
    CHECK(std::abs(pi(0) - 0.2) <= 1e-9);
    CHECK(std::abs(pi(19) - 0.6) <= 1e-9);

    // Saturated, unit weights: B = A at the MLE, so the sandwich is A^-1.
    const Eigen::MatrixXd a_inv = information(t.x, pi, t.w).inverse();
    CHECK((m.covariance - a_inv).cwiseAbs().maxCoeff() <= 1e-9);
    IrlsOptions plain;
    plain.robust = false;
    CHECK((irls_fit(t.x, t.y, t.w, plain).covariance - a_inv).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("score equations hold and covariances are PSD") {
    Engine rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 400;
        Eigen::MatrixXd x(n, 4);
        std::vector<double> y(n), w(n);
        for (int i = 0; i < n; ++i) {
            x(i, 0) = 1.0;
            for (int j = 1; j < 4; ++j) x(i, j) = uniform01(rng) < 0.5 ? 1.0 : 0.0;
            const double eta = -0.5 + 0.8 * x(i, 1) - 0.6 * x(i, 2) + 0.3 * x(i, 3);
            y[i] = bernoulli(logistic(eta), rng) ? 1.0 : 0.0;
            w[i] = 0.5 + 3.0 * uniform01(rng);
        }
        const auto m = irls_fit(x, y, w);
        REQUIRE(m.converged);
        const auto pi = m.predict(x);
        for (int j = 0; j < 4; ++j) {
            double score = 0.0;
            for (int i = 0; i < n; ++i) score += w[i] * (y[i] - pi(i)) * x(i, j);
            CHECK(std::abs(score) < 1e-6);
        }
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.covariance);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
    }
}

TEST_CASE("IRLS failures") {
    Eigen::MatrixXd x(4, 3);
    x << 1, 0, 0, 1, 1, 1, 1, 0, 0, 1, 1, 1;  // third column duplicates the second
    const std::vector<double> y{0, 1, 1, 0}, w(4, 1.0);
    try {
        (void)irls_fit(x, y, w);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()) == "singular information");
    }

    Eigen::MatrixXd s(4, 2);
    s << 1, 0, 1, 0, 1, 1, 1, 1;
    const std::vector<double> sep{0, 0, 1, 1};
    try {
        (void)irls_fit(s, sep, w);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()) == "separation suspected");
    }
}

TEST_CASE("dummy coding: unobserved levels dropped, reference choice is irrelevant") {
    const auto bn = ground_truth_network();
    const auto d = ancestral_sample(bn, 3000, 21);
    const std::size_t cols[] = {kX3, kX4, kX5};
    const auto first = dummy_design(d, cols, DummyReference::First);
    const auto last = dummy_design(d, cols, DummyReference::Last);
    CHECK(first.cols() == 1 + 2 + 2 + 1);
    std::vector<double> t(d.rows()), w(d.rows(), 1.0);
    for (std::size_t i = 0; i < d.rows(); ++i) t[i] = d.at(i, kT);
    const auto a = irls_fit(first, t, w).predict(first);
    const auto b = irls_fit(last, t, w).predict(last);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-9);

    const auto narrow = testing::make_data({{0, 1, 0, 1}, {0, 0, 2, 2}}, {2, 3});
    const std::size_t one[] = {1};
    CHECK(dummy_design(narrow, one).cols() == 2);  // level 1 never occurs
}

TEST_CASE("logistic propensity examples") {
    // One binary covariate with P(T=1 | x) = 0.3 and 0.8.
    std::vector<int> x, tr;
    for (int i = 0; i < 10; ++i) {
        x.push_back(0);
        tr.push_back(i < 3);
    }
    for (int i = 0; i < 10; ++i) {
        x.push_back(1);
        tr.push_back(i < 8);
    }
    const auto d = testing::make_data({x, tr});
    const std::size_t cov[] = {0};
    const auto ps = ps_logistic(d, 1, cov);
    CHECK(std::abs(ps.scores[0] - 0.3) <= 1e-9);
    CHECK(std::abs(ps.scores[19] - 0.8) <= 1e-9);

    const auto none = ps_logistic(d, 1, {});
    for (const double e : none.scores) CHECK(std::abs(e - 11.0 / 20.0) <= 1e-9);
}

TEST_CASE("a main-effects model misses the treatment interaction") {
    const auto d = ancestral_sample(ground_truth_network(), 100000, 31);
    const std::size_t cov[] = {kX5, kX6};
    const auto ps = ps_logistic(d, kT, cov);
    double worst = 0.0;
    for (std::size_t i = 0; i < d.rows(); ++i)
        worst = std::max(worst, std::abs(ps.scores[i] - true_propensity(d.at(i, kX5), d.at(i, kX6))));
    CHECK(worst > 0.02);
}

TEST_CASE("weighted regression test on treatment") {
    const GroundTruthModel model(scenario_by_id("S3"));
    const auto d = generate_dataset(model, 2000, 41).data;
    const std::size_t cov[] = {kX1, kX2, kX3, kX4, kX5, kX6};
    const auto ps = ps_logistic(d, kT, cov);
    const auto plain = wlr_ate_test(d, kT, kY, cov, ps.scores, false);
    const auto adj = wlr_ate_test(d, kT, kY, cov, ps.scores, true);
    CHECK(plain.reject);
    CHECK(adj.reject);
    CHECK(plain.coef_t > 0.0);
    CHECK(plain.p_value == Approx(two_sided_p(plain.z)));
    CHECK(two_sided_p(1.959964) == Approx(0.05).epsilon(1e-6));
}
