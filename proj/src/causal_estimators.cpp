#include "bnps/causal_estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "bnps/error.hpp"

namespace bnps {

PropensityModel::PropensityModel(BayesianNetwork network, int treatment, int treated_state,
                                 double clip_epsilon)
    : network_(std::move(network)),
      treatment_(treatment),
      treated_state_(treated_state),
      clip_epsilon_(clip_epsilon) {
    if (treatment_ < 0 || treatment_ >= network_.node_count())
        fail_usage("treatment node out of range");
    if (network_.variable(treatment_).cardinality() != 2) fail_data("treatment must be binary");
    if (treated_state_ < 0 || treated_state_ > 1) fail_usage("treated state must be 0 or 1");
    if (!(clip_epsilon_ >= 0.0 && clip_epsilon_ < 0.5))
        fail_usage("clip epsilon must lie in [0, 0.5)");
}

namespace {

int treated_index(const BayesianNetwork& bn, int treatment, std::string_view label) {
    const auto& var = bn.variable(treatment);
    if (var.cardinality() != 2) fail_data("treatment must be binary");
    const int idx = var.state_index(label);
    if (idx < 0) fail_data(fmt::format("treatment '{}' has no state '{}'", var.name, label));
    return idx;
}

}  // namespace

PropensityModel::PropensityModel(BayesianNetwork network, std::string_view treatment,
                                 std::string_view treated_label, double clip_epsilon)
    : PropensityModel(network, network.index_of(treatment),
                      treated_index(network, network.index_of(treatment), treated_label),
                      clip_epsilon) {}

std::size_t clip_scores(std::vector<double>& scores, double epsilon) {
    std::size_t clipped = 0;
    for (auto& e : scores) {
        const double c = std::clamp(e, epsilon, 1.0 - epsilon);
        if (c != e) ++clipped;
        e = c;
    }
    return clipped;
}

std::vector<double> raw_propensity_scores(const PropensityModel& model,
                                          const CategoricalDataset& data) {
    const auto& bn = model.network();
    check_schema(bn, data);
    std::vector<double> out(data.rows());
    std::vector<int> evidence(bn.node_count());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (int v = 0; v < bn.node_count(); ++v) evidence[v] = data.at(i, v);
        try {
            out[i] = conditional_query(bn, model.treatment(), model.treated_state(), evidence);
        } catch (const Error& e) {
            fail_numeric(fmt::format("row {}: {}", i + 1, e.what()));
        }
    }
    return out;
}

CategoricalDataset align_to_network(const BayesianNetwork& bn, const CategoricalDataset& data) {
    std::vector<VariableMeta> vars = bn.variables();
    std::vector<std::vector<int>> columns;
    for (int v = 0; v < bn.node_count(); ++v) {
        const auto& meta = bn.variable(v);
        const std::size_t c = data.index_of(meta.name);
        const auto& data_meta = data.variable(c);
        std::vector<int> recode(data_meta.cardinality());
        for (int s = 0; s < data_meta.cardinality(); ++s) {
            recode[s] = meta.state_index(data_meta.states[s]);
            if (recode[s] < 0)
                fail_data(fmt::format("column '{}' has state '{}' unknown to the model", meta.name,
                                      data_meta.states[s]));
        }
        std::vector<int> col(data.rows());
        const auto src = data.column(c);
        for (std::size_t i = 0; i < data.rows(); ++i) col[i] = recode[src[i]];
        columns.push_back(std::move(col));
    }
    return CategoricalDataset(std::move(vars), std::move(columns));
}

PropensityScores propensity_scores(const PropensityModel& model, const CategoricalDataset& data) {
    PropensityScores result;
    result.scores = raw_propensity_scores(model, align_to_network(model.network(), data));
    result.clipped = clip_scores(result.scores, model.clip_epsilon());
    return result;
}

const char* to_string(AteMethod method) {
    return method == AteMethod::Hajek ? "hajek" : "ht";
}

const char* to_string(VarianceKind kind) {
    return kind == VarianceKind::Linearized ? "linearized" : "ps_adjusted";
}

VarianceKind parse_variance(std::string_view name) {
    if (name == "linearized") return VarianceKind::Linearized;
    if (name == "ps_adjusted") return VarianceKind::PsAdjusted;
    fail_usage(fmt::format("unknown variance '{}'", name));
}

namespace {

void check_inputs(std::span<const int> y, std::span<const int> t, std::span<const double> e) {
    if (y.size() != t.size() || y.size() != e.size())
        fail_usage("outcome, treatment and score vectors differ in length");
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (!(e[i] > 0.0 && e[i] < 1.0))
            fail_numeric(fmt::format("propensity score {} at row {} outside (0,1)", e[i], i + 1));
        if ((t[i] != 0 && t[i] != 1) || (y[i] != 0 && y[i] != 1))
            fail_data(fmt::format("non-binary treatment or outcome at row {}", i + 1));
    }
}

void finish_interval(AteEstimate& est) {
    est.ci_low = est.ate - kZ975 * est.se;
    est.ci_high = est.ate + kZ975 * est.se;
}

void count_arms(AteEstimate& est, std::span<const int> t) {
    est.n_treated = static_cast<std::size_t>(std::count(t.begin(), t.end(), 1));
    est.n_control = t.size() - est.n_treated;
    if (est.n_treated == 0 || est.n_control == 0) fail_data("degenerate arm");
}

}  // namespace

AteEstimate hajek_ate(std::span<const int> y, std::span<const int> t, std::span<const double> e) {
    check_inputs(y, t, e);
    AteEstimate est;
    est.method = AteMethod::Hajek;
    count_arms(est, t);

    double w1 = 0.0, w0 = 0.0, s1 = 0.0, s0 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (t[i]) {
            w1 += 1.0 / e[i];
            s1 += y[i] / e[i];
        } else {
            w0 += 1.0 / (1.0 - e[i]);
            s0 += y[i] / (1.0 - e[i]);
        }
    }
    const double mu1 = s1 / w1;
    const double mu0 = s0 / w0;

    double v1 = 0.0, v0 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (t[i]) {
            const double r = (y[i] - mu1) / e[i];
            v1 += r * r;
        } else {
            const double r = (y[i] - mu0) / (1.0 - e[i]);
            v0 += r * r;
        }
    }
    est.ate = mu1 - mu0;
    est.se = std::sqrt(v1 / (w1 * w1) + v0 / (w0 * w0));
    finish_interval(est);
    return est;
}

AteEstimate hajek_ate_adjusted(std::span<const int> y, std::span<const int> t,
                               std::span<const double> e, std::span<const int> strata) {
    AteEstimate est = hajek_ate(y, t, e);
    if (strata.size() != y.size()) fail_usage("one stratum per row required");
    est.variance = VarianceKind::PsAdjusted;
    // Weighted arm means overall and per stratum.
    std::map<int, std::array<double, 4>> cells;  // w1, s1, w0, s0
    double w1 = 0.0, s1 = 0.0, w0 = 0.0, s0 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        auto& c = cells[strata[i]];
        if (t[i]) {
            c[0] += 1.0 / e[i];
            c[1] += y[i] / e[i];
            w1 += 1.0 / e[i];
            s1 += y[i] / e[i];
        } else {
            c[2] += 1.0 / (1.0 - e[i]);
            c[3] += y[i] / (1.0 - e[i]);
            w0 += 1.0 / (1.0 - e[i]);
            s0 += y[i] / (1.0 - e[i]);
        }
    }
    const double m1_all = s1 / w1;
    const double m0_all = s0 / w0;
    std::map<int, std::pair<double, double>> means;
    for (const auto& [k, c] : cells)
        means[k] = {c[0] > 0.0 ? c[1] / c[0] : m1_all, c[2] > 0.0 ? c[3] / c[2] : m0_all};

    const double n = static_cast<double>(y.size());
    double ss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto [m1, m0] = means[strata[i]];
        const double treated = t[i] ? (y[i] - m1) / e[i] : 0.0;
        const double control = t[i] ? 0.0 : (y[i] - m0) / (1.0 - e[i]);
        const double phi = treated + m1 - m1_all - (control + m0 - m0_all);
        ss += phi * phi;
    }
    est.se = std::sqrt(ss / (n * n));
    finish_interval(est);
    return est;
}

AteEstimate horvitz_thompson_ate(std::span<const int> y, std::span<const int> t,
                                 std::span<const double> e) {
    check_inputs(y, t, e);
    AteEstimate est;
    est.method = AteMethod::HorvitzThompson;
    count_arms(est, t);

    const double n = static_cast<double>(y.size());
    std::vector<double> a(y.size()), b(y.size());
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        a[i] = t[i] * y[i] / e[i];
        b[i] = (1 - t[i]) * y[i] / (1.0 - e[i]);
        sa += a[i];
        sb += b[i];
    }
    const double mu1 = sa / n;
    const double mu0 = sb / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        ss += (a[i] - mu1) * (a[i] - mu1) + (b[i] - mu0) * (b[i] - mu0);
    est.ate = mu1 - mu0;
    est.se = std::sqrt(ss / (n * n));
    finish_interval(est);
    return est;
}

AteEstimate estimate_ate(AteMethod method, std::span<const int> y, std::span<const int> t,
                         std::span<const double> e) {
    return method == AteMethod::Hajek ? hajek_ate(y, t, e) : horvitz_thompson_ate(y, t, e);
}

bool reject_null(const AteEstimate& estimate) {
    if (!(estimate.se > 0.0)) fail_numeric("degenerate variance");
    return !(estimate.ci_low <= 0.0 && 0.0 <= estimate.ci_high);
}

std::vector<int> markov_blanket_strata(const BayesianNetwork& bn, int target,
                                       const CategoricalDataset& data) {
    check_schema(bn, data);
    const Dag& g = bn.dag();
    std::set<int> blanket(g.parents(target).begin(), g.parents(target).end());
    for (const int c : g.children(target)) {
        blanket.insert(c);
        for (const int p : g.parents(c))
            if (p != target) blanket.insert(p);
    }
    std::map<std::vector<int>, int> ids;
    std::vector<std::vector<int>> configs(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (const int v : blanket) configs[i].push_back(data.at(i, v));
        ids.emplace(configs[i], 0);
    }
    int next = 0;
    for (auto& [config, id] : ids) id = next++;
    std::vector<int> out(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) out[i] = ids[configs[i]];
    return out;
}

std::vector<int> indicator(const CategoricalDataset& data, std::size_t column,
                           std::string_view positive_label) {
    const auto& meta = data.variable(column);
    if (meta.cardinality() != 2) fail_data(fmt::format("column '{}' must be binary", meta.name));
    const int positive = meta.state_index(positive_label);
    if (positive < 0)
        fail_data(fmt::format("column '{}' has no state '{}'", meta.name, positive_label));
    const auto col = data.column(column);
    std::vector<int> out(col.size());
    for (std::size_t i = 0; i < col.size(); ++i) out[i] = col[i] == positive ? 1 : 0;
    return out;
}

BnpsResult bnps_pipeline(const CategoricalDataset& data, std::span<const std::size_t> covariates,
                         std::size_t treatment, std::size_t outcome, const BnpsOptions& options) {
    std::vector<std::size_t> learned(covariates.begin(), covariates.end());
    learned.push_back(treatment);
    {
        auto sorted = learned;
        sorted.push_back(outcome);
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            fail_usage("covariate, treatment and outcome columns must be disjoint");
        if (sorted.back() >= data.cols()) fail_usage("column id out of range");
    }
    if (data.variable(treatment).cardinality() != 2) fail_data("treatment must be binary");

    const CategoricalDataset learn_data = data.select(learned);
    auto search = learn_structure(learn_data, options.search);
    auto network = fit_mle(learn_data, search.dag, options.fit);

    const int treatment_node = static_cast<int>(learned.size()) - 1;
    const PropensityModel model(network, treatment_node,
                                treated_index(network, treatment_node, options.treated_label),
                                options.clip_epsilon);
    PropensityScores scores;
    scores.scores = raw_propensity_scores(model, learn_data);
    scores.clipped = clip_scores(scores.scores, options.clip_epsilon);

    const auto y = indicator(data, outcome, options.outcome_label);
    const auto t = indicator(data, treatment, options.treated_label);
    auto estimate =
        options.variance == VarianceKind::Linearized
            ? hajek_ate(y, t, scores.scores)
            : hajek_ate_adjusted(y, t, scores.scores,
                                 markov_blanket_strata(network, treatment_node, learn_data));
    estimate.clipped = scores.clipped;
    return {estimate, std::move(search), std::move(network), std::move(scores), std::move(learned)};
}

void write_estimate_header(std::ostream& out) {
    out << "method,ate,se,ci_low,ci_high,n_treated,n_control,clipped\n";
}

void write_estimate_row(std::ostream& out, const AteEstimate& e) {
    out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{},{},{}\n", to_string(e.method), e.ate, e.se,
                       e.ci_low, e.ci_high, e.n_treated, e.n_control, e.clipped);
}

}  // namespace bnps
