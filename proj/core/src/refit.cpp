#include "rbce/refit.hpp"

#include "rbce/error.hpp"

#include <algorithm>

namespace rbce {
namespace {

void check_set(const IndexSet& s, Eigen::Index p, const char* what) {
    for (auto j : s) {
        if (j < 0 || j >= p) throw Error(ErrorCode::BadConfig, std::string(what) + " index out of range");
    }
    IndexSet sorted = s;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw Error(ErrorCode::BadConfig, std::string(what) + " contains duplicates");
    }
}

}  // namespace

void RefitSpec::validate(Eigen::Index p) const {
    check_set(keep_beta, p, "keep_beta");
    check_set(keep_gamma, p, "keep_gamma");
}

CoefficientLayout RefitSpec::layout(const StandardizedDataset& data) const {
    validate(data.inner.p());
    CoefficientLayout l;
    l.beta_predictors = keep_beta;
    l.gamma_predictors = keep_gamma;
    std::sort(l.beta_predictors.begin(), l.beta_predictors.end());
    std::sort(l.gamma_predictors.begin(), l.gamma_predictors.end());
    l.beta0 = beta0.value_or(data.outcome_intercept);
    l.gamma0 = gamma0.value_or(data.treatment_intercept);
    return l;
}

PosteriorDraws refit(const StandardizedDataset& data, const RefitSpec& spec, const HierarchicalPrior& prior,
                     const SamplerConfig& cfg) {
    HierarchicalPrior pr = prior;
    if (pr.q.size() != data.inner.p()) pr.q = Eigen::VectorXd::Constant(data.inner.p(), 0.5);
    ConditionalModel model(build_design(data, spec.layout(data)), std::move(pr), ChainMode::Refit,
                           cfg.treatment_model);
    return run_chain(model, cfg);
}

}  // namespace rbce
