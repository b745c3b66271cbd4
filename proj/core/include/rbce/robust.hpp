#pragma once

#include "rbce/model.hpp"
#include "rbce/sampler.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rbce {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return lo <= v && v <= hi; }
    double width() const { return hi - lo; }
};

/// Common prior inclusion mean q in [q_low, q_high], explored on a grid.
struct PriorSet {
    double q_low = 0.0;
    double q_high = 0.0;
    std::vector<double> grid;

    /// `size` equally spaced points including both endpoints.
    static PriorSet make(double q_low, double q_high, int size);
    void validate() const;
};

struct Elicitation {
    PriorSet prior_set;
    Eigen::Index count_above_low = 0;   // k for the lower correlation threshold
    Eigen::Index count_above_high = 0;  // k for the upper correlation threshold
    std::optional<std::string> warning;
};

/// Builds the prior set from the number of predictors whose absolute marginal
/// correlation with y exceeds each end of [c_low, c_high].
Elicitation elicit_prior_set(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Interval c, int grid_size);

enum class Decision { Select, Reject, Abstain };

std::string_view to_string(Decision d);

/// Select when the lower inclusion bound reaches 1/2, reject when the upper
/// bound stays below it, abstain otherwise.
Decision classify_predictor(Interval bounds);

/// Envelope [min lo, max hi] of per-prior credible intervals.
Interval robust_credible_interval(std::span<const Interval> per_q);

struct SensitivityResult {
    PriorSet prior_set;
    std::vector<PosteriorSummary> per_q;
    std::vector<std::string> names;

    std::vector<Interval> inclusion;  // [inf_q E(pi_j|W), sup_q E(pi_j|W)]
    std::vector<Interval> beta;
    std::vector<Interval> gamma;
    Interval beta_t_mean;
    Interval beta_t_median;
    Interval beta_t_sd;
    Interval beta_t_ci;  // robust 95% credible interval
    std::vector<Decision> decisions;
    std::vector<Eigen::Index> s_lower;  // surely selected
    std::vector<Eigen::Index> s_star;   // not surely removed
    std::vector<std::string> warnings;
};

/// Pure reduction of per-prior summaries into bounds and decisions.
SensitivityResult aggregate_sensitivity(const PriorSet& set, std::vector<PosteriorSummary> per_q,
                                        std::vector<std::string> names);

struct SensitivityOptions {
    std::uint64_t replicate = 0;
    int threads = 1;
    /// When set, receives every chain's draws, indexed like the prior grid.
    std::vector<PosteriorDraws>* keep_draws = nullptr;
};

/// Chain seed for one grid point; keyed on the q value so refined grids reuse
/// the chains of the points they share with coarser ones.
std::uint64_t chain_seed(std::uint64_t master, std::uint64_t replicate, double q);

/// One chain per grid point with q_j = q for all j, then aggregate.
SensitivityResult sensitivity_fit(const StandardizedDataset& data, const HierarchicalPrior& prior_template,
                                  const PriorSet& set, const SamplerConfig& cfg,
                                  const SensitivityOptions& opts = {});

struct LossWeights {
    double false_positive = 1.0;
    double false_negative = 1.0;
    double abstention = 0.2;
};

double misspecification_loss(double fp, double fn, double id, double tn, double tp, double p,
                             const LossWeights& w = {});

}  // namespace rbce
