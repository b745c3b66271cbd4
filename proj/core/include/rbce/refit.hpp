#pragma once

#include "rbce/dss.hpp"
#include "rbce/model.hpp"
#include "rbce/sampler.hpp"

#include <optional>

namespace rbce {

/// Final variable choice. beta_T is always in the model.
struct RefitSpec {
    IndexSet keep_beta;
    IndexSet keep_gamma;
    std::optional<bool> beta0;   // defaults to the standardized data's flag
    std::optional<bool> gamma0;

    void validate(Eigen::Index p) const;
    CoefficientLayout layout(const StandardizedDataset& data) const;
};

/// Slab-only refit: kept coefficients get N(0, tau1^2 sigma2) / N(0, tau1^2)
/// priors, everything else is removed from the design.
PosteriorDraws refit(const StandardizedDataset& data, const RefitSpec& spec, const HierarchicalPrior& prior,
                     const SamplerConfig& cfg);

}  // namespace rbce
