#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bnps/bayesian_network.hpp"
#include "bnps/structure_learning.hpp"

namespace bnps {

/// Two-sided 97.5% standard normal quantile.
inline constexpr double kZ975 = 1.959964;

/// P(T = treated | everything else) from a fitted network, clipped to
/// [clip_epsilon, 1 - clip_epsilon].
class PropensityModel {
public:
    PropensityModel(BayesianNetwork network, int treatment, int treated_state = 1,
                    double clip_epsilon = 1e-6);
    /// Looks up the treatment by name and the treated state by label.
    PropensityModel(BayesianNetwork network, std::string_view treatment,
                    std::string_view treated_label = "1", double clip_epsilon = 1e-6);

    const BayesianNetwork& network() const { return network_; }
    int treatment() const { return treatment_; }
    int treated_state() const { return treated_state_; }
    double clip_epsilon() const { return clip_epsilon_; }

private:
    BayesianNetwork network_;
    int treatment_;
    int treated_state_;
    double clip_epsilon_;
};

struct PropensityScores {
    std::vector<double> scores;
    std::size_t clipped = 0;
};

/// Clips in place and returns how many values moved.
std::size_t clip_scores(std::vector<double>& scores, double epsilon);

/// Recodes the network's columns of `data` (matched by name, states by label)
/// into the network's schema and state order.
CategoricalDataset align_to_network(const BayesianNetwork& bn, const CategoricalDataset& data);

/// One score per row of `data`. Network variables are matched to data
/// columns by name and label; extra columns (the outcome) are ignored.
PropensityScores propensity_scores(const PropensityModel& model, const CategoricalDataset& data);

/// Unclipped conditional P(T = treated | row) without the name mapping;
/// `data` must follow the network's schema.
std::vector<double> raw_propensity_scores(const PropensityModel& model,
                                          const CategoricalDataset& data);

enum class AteMethod { Hajek, HorvitzThompson };
const char* to_string(AteMethod method);

/// How the Hajek standard error is obtained.
///   Linearized  - per-arm ratio-estimator variance with the scores taken as known.
///   PsAdjusted  - influence function projected on the cells the scores were
///                 estimated in, so that the gain from estimating them is kept.
enum class VarianceKind { Linearized, PsAdjusted };
const char* to_string(VarianceKind kind);
VarianceKind parse_variance(std::string_view name);

struct AteEstimate {
    double ate = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    AteMethod method = AteMethod::Hajek;
    std::size_t n_treated = 0;
    std::size_t n_control = 0;
    std::size_t clipped = 0;
    VarianceKind variance = VarianceKind::Linearized;
};

/// Self-normalised IPW difference of arm means with per-arm linearised
/// (ratio-estimator) variance.
AteEstimate hajek_ate(std::span<const int> y, std::span<const int> t, std::span<const double> e);

/// Hajek point estimate with the PS-adjusted variance. `strata` gives each
/// row's propensity cell (e.g. its Markov-blanket configuration):
///   phi_i = t (y - m1(c)) / e + m1(c) - mu1 - [(1-t)(y - m0(c)) / (1-e) + m0(c) - mu0],
///   se^2  = sum phi_i^2 / n^2,
/// with m_k(c) the weighted arm-k outcome mean in cell c (mu_k when the cell
/// has no arm-k rows).
AteEstimate hajek_ate_adjusted(std::span<const int> y, std::span<const int> t,
                               std::span<const double> e, std::span<const int> strata);

/// Unnormalised IPW: (1/n) sum t y / e - (1/n) sum (1-t) y / (1-e).
AteEstimate horvitz_thompson_ate(std::span<const int> y, std::span<const int> t,
                                 std::span<const double> e);

AteEstimate estimate_ate(AteMethod method, std::span<const int> y, std::span<const int> t,
                         std::span<const double> e);

/// True iff the 95% interval excludes 0. Throws when se == 0.
bool reject_null(const AteEstimate& estimate);

/// Index of each row's configuration of the target's Markov blanket (parents,
/// children, and the children's other parents). `data` follows the network
/// schema. The target's conditional depends on a row only through this index.
std::vector<int> markov_blanket_strata(const BayesianNetwork& bn, int target,
                                       const CategoricalDataset& data);

/// Binary indicator vector from a two-state column, 1 where the label matches.
std::vector<int> indicator(const CategoricalDataset& data, std::size_t column,
                           std::string_view positive_label = "1");

struct BnpsOptions {
    SearchConfig search;
    FitOptions fit;
    double clip_epsilon = 1e-6;
    std::string treated_label = "1";
    std::string outcome_label = "1";
    VarianceKind variance = VarianceKind::PsAdjusted;
};

struct BnpsResult {
    AteEstimate estimate;
    SearchResult search;
    BayesianNetwork network;
    PropensityScores scores;
    std::vector<std::size_t> learned_columns;  // data columns, in network order
};

/// Tabu (or hill-climb) search on covariates + treatment, MLE fit, exact
/// propensity queries, then the Hajek estimator. The outcome never enters
/// the network.
BnpsResult bnps_pipeline(const CategoricalDataset& data, std::span<const std::size_t> covariates,
                         std::size_t treatment, std::size_t outcome, const BnpsOptions& options = {});

/// CSV: method,ate,se,ci_low,ci_high,n_treated,n_control,clipped
void write_estimate_header(std::ostream& out);
void write_estimate_row(std::ostream& out, const AteEstimate& estimate);

}  // namespace bnps
