#pragma once

#include "rbce/model.hpp"
#include "rbce/random.hpp"
#include "rbce/robust.hpp"
#include "rbce/sampler.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace rbce {

enum class StudyCase { Case1a, Case1b, Case2a, Case2b };

StudyCase parse_study_case(const std::string& s);
std::string to_string(StudyCase c);
/// Case 1 varies n at p = 50, case 2 varies p at n = 40.
bool varies_n(StudyCase c);

/// Number of leading predictors with nonzero outcome / treatment coefficients.
struct SupportPattern {
    Eigen::Index beta = 0;
    Eigen::Index gamma = 0;
};

SupportPattern support_of(StudyCase c);

enum class MagnitudeMode {
    Alternating,  // +1, -1, +1, ... on the support
    Uniform,      // U(0.5, 1.5) with a random sign
};

struct TruthSpec {
    Eigen::VectorXd beta;
    Eigen::VectorXd gamma;
    double beta_t = 4.0;
    double noise_sd = 0.1;
    double ar_rho = 0.3;

    /// Predictors with a nonzero coefficient in either equation.
    std::vector<bool> active() const;
};

TruthSpec truth_magnitudes(SupportPattern support, Eigen::Index p, std::uint64_t seed,
                           MagnitudeMode mode = MagnitudeMode::Alternating);
TruthSpec truth_magnitudes(StudyCase c, Eigen::Index p, std::uint64_t seed,
                           MagnitudeMode mode = MagnitudeMode::Alternating);

/// Rows i.i.d. N(0, Sigma) with Sigma_ij = rho^|i-j|.
Eigen::MatrixXd gen_design(Eigen::Index n, Eigen::Index p, double rho, Rng& rng);
Eigen::MatrixXd gen_design(Eigen::Index n, Eigen::Index p, double rho, std::uint64_t seed);

/// T ~ Bernoulli(logistic(X gamma)), Y = beta_T T + X beta + N(0, noise_sd^2).
std::pair<Eigen::VectorXd, Eigen::VectorXd> gen_response(const Eigen::MatrixXd& x, const TruthSpec& truth, Rng& rng);

Dataset simulate_dataset(Eigen::Index n, const TruthSpec& truth, std::uint64_t seed);

struct StudyConfig {
    StudyCase study = StudyCase::Case1a;
    std::vector<int> grid;  // n values (case 1) or p values (case 2)
    int replicates = 20;
    std::uint64_t master_seed = 1;
    MagnitudeMode magnitudes = MagnitudeMode::Alternating;
    Interval correlation{0.15, 0.35};
    int prior_grid = 11;
    HierarchicalPrior prior;  // q is filled per replicate
    SamplerConfig sampler;
    StandardizeOptions standardize;
    LossWeights loss;
    int threads = 1;

    /// The full-scale grid 25, 30, ..., 75 for the case family.
    static std::vector<int> default_grid();
    void validate() const;
};

struct ReplicateOutcome {
    int grid_value = 0;
    int replicate = 0;
    Interval beta_t_mean;
    Interval beta_t_median;
    Interval beta_t_ci;
    bool covers = false;
    int fp = 0;
    int fn = 0;
    int id = 0;
    int correct = 0;
    int true_active = 0;
    int true_inactive = 0;
    PriorSet prior_set;
};

struct MetricsRow {
    int grid_value = 0;
    double mean_lo = 0.0, mean_hi = 0.0;
    double median_lo = 0.0, median_hi = 0.0;
    double sd_lo = 0.0, sd_hi = 0.0;
    double mse_lo = 0.0, mse_hi = 0.0;
    double ci_pct = 0.0;
    double fp = 0.0, fn = 0.0, id = 0.0;
    double loss = 0.0;
};

struct StudyResult {
    StudyConfig config;
    std::vector<MetricsRow> rows;
    std::vector<ReplicateOutcome> replicates;
};

/// Runs one replicate of one grid cell end to end.
ReplicateOutcome run_replicate(const StudyConfig& cfg, int grid_value, int replicate);

/// Deterministic reduction of replicate outcomes into one table row.
MetricsRow aggregate_cell(int grid_value, const std::vector<ReplicateOutcome>& reps, double beta_t_true,
                          const LossWeights& loss);

StudyResult run_study(const StudyConfig& cfg);

// Table families: estimation accuracy, dispersion, selection accuracy, and a
// long-format file for plotting.
void write_accuracy_csv(const StudyResult& r, std::ostream& out);
void write_dispersion_csv(const StudyResult& r, std::ostream& out);
void write_selection_csv(const StudyResult& r, std::ostream& out);
void write_replicates_csv(const std::vector<ReplicateOutcome>& reps, std::ostream& out);
std::vector<ReplicateOutcome> read_replicates_csv(std::istream& in);
/// Columns grid_value, replicate, quantity, value.
void write_long_csv(const std::vector<ReplicateOutcome>& reps, std::ostream& out);

}  // namespace rbce
