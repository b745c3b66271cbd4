#pragma once

#include "rbce/model.hpp"
#include "rbce/random.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rbce {

/// Full Gibbs state. `z` and `pi` are indexed by predictor (length p) and are
/// unused by a refit chain.
struct LatentState {
    Eigen::VectorXd nu;      // (beta_T, beta, beta_0?, gamma, gamma_0?)
    Eigen::VectorXd t_star;  // latent treatment utilities
    Eigen::VectorXi z;       // 1 = slab component
    Eigen::VectorXd pi;
    double sigma2 = 1.0;
};

enum class ChainMode {
    Selection,  // spike-and-slab with inclusion probabilities
    Refit,      // slab-only prior on the layout's columns, no z / pi updates
};

struct SamplerConfig {
    int burn_in = 500;
    int samples = 2500;
    int thin = 1;
    std::uint64_t seed = 0;
    std::optional<LatentState> init;
    /// When false the probit equation is dropped: gamma is drawn from its prior
    /// and T carries no information (outcome-only submodel).
    bool treatment_model = true;
    /// Update (z_j, beta_j, gamma_j) as a block with the coefficients
    /// integrated out of the indicator step. When false z_j is drawn from its
    /// plain full conditional, which cannot leave a tiny spike in practice.
    bool collapsed_indicators = true;

    void validate() const;
};

/// Design, prior and cached cross-products shared by every conditional update.
class ConditionalModel {
public:
    ConditionalModel(JointDesign design, HierarchicalPrior prior, ChainMode mode = ChainMode::Selection,
                     bool treatment_model = true);

    const JointDesign& design() const { return design_; }
    const HierarchicalPrior& prior() const { return prior_; }
    ChainMode mode() const { return mode_; }
    bool treatment_model() const { return treatment_model_; }

    const Eigen::MatrixXd& outcome_gram() const { return outcome_gram_; }
    const Eigen::MatrixXd& treatment_gram() const { return treatment_gram_; }
    const Eigen::VectorXd& outcome_xty() const { return outcome_xty_; }

    /// Prior precision of each outcome coefficient in units of 1/sigma2.
    Eigen::VectorXd outcome_prior_precision(const LatentState& s) const;
    /// Prior precision of each treatment coefficient.
    Eigen::VectorXd treatment_prior_precision(const LatentState& s) const;

    double slab_sd(const LatentState& s, Eigen::Index predictor) const;

private:
    JointDesign design_;
    HierarchicalPrior prior_;
    ChainMode mode_;
    bool treatment_model_;
    Eigen::MatrixXd outcome_gram_;
    Eigen::MatrixXd treatment_gram_;
    Eigen::VectorXd outcome_xty_;
};

/// Gaussian full conditional of nu, block-diagonal in (outcome, treatment).
/// Outcome covariance is sigma2 * outcome_precision^-1.
struct CoefficientConditional {
    Eigen::VectorXd outcome_mean;
    Eigen::MatrixXd outcome_precision;  // sigma2-free: X_O'X_O + D^-1
    Eigen::VectorXd treatment_mean;
    Eigen::MatrixXd treatment_precision;
};

struct GammaParams {
    double shape;
    double rate;
};

CoefficientConditional coefficient_conditional(const LatentState& s, const ConditionalModel& m);
GammaParams noise_precision_conditional(const LatentState& s, const ConditionalModel& m);

/// P(z_j = 1 | beta_j, gamma_j, pi_j, sigma2) evaluated in log space.
double slab_responsibility(double beta, double gamma, double sigma2, double pi, double tau0,
                           double tau1, bool with_gamma = true);

// One block of a Gibbs sweep each. Sweep order used by run_chain:
// latent treatment, coefficients, indicators, inclusion probabilities, noise.
void sample_latent_treatment(LatentState& s, const ConditionalModel& m, Rng& rng);
void sample_coefficients(LatentState& s, const ConditionalModel& m, Rng& rng);
void sample_mixture_indicators(LatentState& s, const ConditionalModel& m, Rng& rng);
void sample_indicator_blocks(LatentState& s, const ConditionalModel& m, Rng& rng);
void sample_inclusion_probs(LatentState& s, const ConditionalModel& m, Rng& rng);
void sample_noise_precision(LatentState& s, const ConditionalModel& m, Rng& rng);

/// Retained draws of one chain.
struct PosteriorDraws {
    CoefficientLayout layout;
    Eigen::Index p = 0;
    ChainMode mode = ChainMode::Selection;
    Eigen::MatrixXd nu;      // m x d
    Eigen::MatrixXd pi;      // m x p (empty for a refit)
    Eigen::MatrixXd z;       // m x p, 0/1 (empty for a refit)
    Eigen::VectorXd sigma2;  // m
    double ess_beta_t = 0.0;
    std::vector<std::string> warnings;

    Eigen::Index size() const { return nu.rows(); }
    Eigen::VectorXd beta_t() const { return nu.col(0); }
};

LatentState initial_state(const ConditionalModel& m, Rng& rng);

PosteriorDraws run_chain(const StandardizedDataset& data, const HierarchicalPrior& prior,
                         const SamplerConfig& cfg);
PosteriorDraws run_chain(const ConditionalModel& model, const SamplerConfig& cfg);

/// Posterior expectations for one precise prior.
struct PosteriorSummary {
    Eigen::VectorXd q;
    Eigen::VectorXd inclusion;  // E(pi_j | W), Rao-Blackwellized
    Eigen::VectorXd beta_mean;  // length p, zero where a column is absent
    Eigen::VectorXd gamma_mean;
    double beta_t_mean = 0.0;
    double beta_t_median = 0.0;
    double beta_t_sd = 0.0;
    double beta_t_ci_lo = 0.0;  // equal-tailed 95%
    double beta_t_ci_hi = 0.0;
    double beta_t_mcse = 0.0;
    double sigma2_mean = 0.0;
    double ess_beta_t = 0.0;
};

PosteriorSummary summarize(const PosteriorDraws& draws, const HierarchicalPrior& prior);

/// Geyer initial-monotone-sequence effective sample size.
double effective_sample_size(std::span<const double> x);
/// Monte-Carlo standard error of the mean, sd / sqrt(ESS).
double monte_carlo_se(std::span<const double> x);
/// Linear-interpolation (type 7) sample quantile.
double quantile(std::vector<double> x, double prob);

/// One row per retained draw; see column naming in the README.
void write_draws_csv(const PosteriorDraws& draws, std::ostream& out);

}  // namespace rbce
