#include "rbce/report.hpp"

#include "rbce/error.hpp"

#include <json.hpp>

#include <istream>
#include <ostream>

namespace rbce {
namespace {

using nlohmann::ordered_json;

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vec(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ordered_json summary_json(const PosteriorSummary& s) {
    ordered_json j;
    j["q"] = s.q.size() > 0 ? s.q[0] : 0.0;
    j["inclusion"] = to_vec(s.inclusion);
    j["beta_mean"] = to_vec(s.beta_mean);
    j["gamma_mean"] = to_vec(s.gamma_mean);
    j["beta_T"] = {{"mean", s.beta_t_mean},   {"median", s.beta_t_median}, {"sd", s.beta_t_sd},
                   {"ci_lo", s.beta_t_ci_lo}, {"ci_hi", s.beta_t_ci_hi},   {"mcse", s.beta_t_mcse},
                   {"ess", s.ess_beta_t}};
    j["sigma2_mean"] = s.sigma2_mean;
    return j;
}

PosteriorSummary summary_from_json(const ordered_json& j) {
    PosteriorSummary s;
    s.inclusion = from_vec(j.at("inclusion").get<std::vector<double>>());
    s.beta_mean = from_vec(j.at("beta_mean").get<std::vector<double>>());
    s.gamma_mean = from_vec(j.at("gamma_mean").get<std::vector<double>>());
    s.q = Eigen::VectorXd::Constant(s.beta_mean.size(), j.at("q").get<double>());
    const auto& bt = j.at("beta_T");
    s.beta_t_mean = bt.at("mean");
    s.beta_t_median = bt.at("median");
    s.beta_t_sd = bt.at("sd");
    s.beta_t_ci_lo = bt.at("ci_lo");
    s.beta_t_ci_hi = bt.at("ci_hi");
    s.beta_t_mcse = bt.at("mcse");
    s.ess_beta_t = bt.at("ess");
    s.sigma2_mean = j.at("sigma2_mean");
    return s;
}

}  // namespace

void write_sensitivity_json(const SensitivityResult& r, std::ostream& out) {
    ordered_json j;
    ordered_json preds = ordered_json::array();
    for (std::size_t k = 0; k < r.inclusion.size(); ++k) {
        preds.push_back({{"name", k < r.names.size() ? r.names[k] : std::to_string(k + 1)},
                         {"e_lo", r.inclusion[k].lo},
                         {"e_hi", r.inclusion[k].hi},
                         {"decision", std::string(to_string(r.decisions[k]))},
                         {"beta_lo", r.beta[k].lo},
                         {"beta_hi", r.beta[k].hi},
                         {"gamma_lo", r.gamma[k].lo},
                         {"gamma_hi", r.gamma[k].hi}});
    }
    j["predictors"] = preds;
    j["causal_effect"] = {{"mean_lo", r.beta_t_mean.lo},     {"mean_hi", r.beta_t_mean.hi},
                          {"median_lo", r.beta_t_median.lo}, {"median_hi", r.beta_t_median.hi},
                          {"ci_lo", r.beta_t_ci.lo},         {"ci_hi", r.beta_t_ci.hi}};
    j["grid"] = r.prior_set.grid;
    j["q_low"] = r.prior_set.q_low;
    j["q_high"] = r.prior_set.q_high;
    std::vector<Eigen::Index> lower(r.s_lower.begin(), r.s_lower.end());
    std::vector<Eigen::Index> star(r.s_star.begin(), r.s_star.end());
    j["s_lower"] = lower;
    j["s_star"] = star;
    ordered_json per_q = ordered_json::array();
    for (const auto& s : r.per_q) per_q.push_back(summary_json(s));
    j["per_q"] = per_q;
    j["warnings"] = r.warnings;
    out << j.dump(2) << '\n';
}

SensitivityResult read_sensitivity_json(std::istream& in) {
    try {
        const ordered_json j = ordered_json::parse(in);
        PriorSet set;
        set.q_low = j.at("q_low");
        set.q_high = j.at("q_high");
        set.grid = j.at("grid").get<std::vector<double>>();
        set.validate();
        std::vector<PosteriorSummary> per_q;
        for (const auto& s : j.at("per_q")) per_q.push_back(summary_from_json(s));
        std::vector<std::string> names;
        for (const auto& p : j.at("predictors")) names.push_back(p.at("name"));
        SensitivityResult r = aggregate_sensitivity(set, std::move(per_q), std::move(names));
        r.warnings = j.value("warnings", std::vector<std::string>{});
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadData, std::string("malformed sensitivity report: ") + e.what());
    }
}

}  // namespace rbce
