#include "rbce/robust.hpp"

#include "rbce/error.hpp"
#include "rbce/parallel.hpp"
#include "rbce/random.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

namespace rbce {

PriorSet PriorSet::make(double q_low, double q_high, int size) {
    PriorSet set;
    set.q_low = q_low;
    set.q_high = q_high;
    if (q_low == q_high) {
        set.grid = {q_low};
    } else {
        if (size < 2) throw Error(ErrorCode::BadConfig, "a non-degenerate prior set needs at least two grid points");
        set.grid.resize(static_cast<std::size_t>(size));
        for (int k = 0; k < size; ++k) {
            const double t = static_cast<double>(k) / static_cast<double>(size - 1);
            set.grid[static_cast<std::size_t>(k)] = q_low + t * (q_high - q_low);
        }
        set.grid.back() = q_high;
    }
    set.validate();
    return set;
}

void PriorSet::validate() const {
    if (!(q_low > 0.0 && q_low <= q_high && q_high < 1.0)) {
        throw Error(ErrorCode::BadConfig, "prior set needs 0 < q_low <= q_high < 1");
    }
    if (grid.empty() || grid.front() != q_low || grid.back() != q_high) {
        throw Error(ErrorCode::BadConfig, "prior set grid must contain both endpoints");
    }
    for (std::size_t k = 1; k < grid.size(); ++k) {
        if (!(grid[k] > grid[k - 1])) throw Error(ErrorCode::BadConfig, "prior set grid must be strictly increasing");
    }
    if (grid.size() < 2 && q_low != q_high) {
        throw Error(ErrorCode::BadConfig, "a non-degenerate prior set needs at least two grid points");
    }
}

namespace {

double abs_correlation(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
    const Eigen::ArrayXd da = a.array() - a.mean();
    const Eigen::ArrayXd db = b.array() - b.mean();
    const double denom = std::sqrt(da.square().sum() * db.square().sum());
    if (!(denom > 0.0)) return 0.0;
    return std::abs((da * db).sum() / denom);
}

}  // namespace

Elicitation elicit_prior_set(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Interval c, int grid_size) {
    if (!(c.lo > 0.0 && c.lo <= c.hi && c.hi < 1.0)) {
        throw Error(ErrorCode::BadConfig, "correlation thresholds need 0 < c_low <= c_high < 1");
    }
    if (x.rows() != y.size() || x.cols() < 1) throw Error(ErrorCode::BadData, "elicitation inputs have mismatched shapes");
    const Eigen::Index p = x.cols();
    const auto pd = static_cast<double>(p);

    Elicitation e;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double r = abs_correlation(x.col(j), y);
        if (r > c.lo) ++e.count_above_low;
        if (r > c.hi) ++e.count_above_high;
    }
    auto to_q = [&](Eigen::Index k) {
        const double q = std::max(static_cast<double>(k), 0.5) / pd;
        return std::min(q, (pd - 0.5) / pd);
    };
    if (e.count_above_low == 0) {
        std::ostringstream msg;
        msg << "no predictor has absolute correlation above " << c.lo << "; prior set clamped to q = " << to_q(0);
        e.warning = msg.str();
    }
    e.prior_set = PriorSet::make(to_q(e.count_above_high), to_q(e.count_above_low), grid_size);
    return e;
}

std::string_view to_string(Decision d) {
    switch (d) {
        case Decision::Select: return "select";
        case Decision::Reject: return "reject";
        case Decision::Abstain: return "abstain";
    }
    return "abstain";
}

Decision classify_predictor(Interval bounds) {
    if (bounds.lo >= 0.5) return Decision::Select;
    if (bounds.hi < 0.5) return Decision::Reject;
    return Decision::Abstain;
}

Interval robust_credible_interval(std::span<const Interval> per_q) {
    if (per_q.empty()) throw Error(ErrorCode::EmptyInput, "no credible intervals to combine");
    Interval out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& iv : per_q) {
        out.lo = std::min(out.lo, iv.lo);
        out.hi = std::max(out.hi, iv.hi);
    }
    return out;
}

namespace {

template <typename Getter>
Interval envelope(const std::vector<PosteriorSummary>& per_q, Getter get) {
    Interval out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& s : per_q) {
        const double v = get(s);
        out.lo = std::min(out.lo, v);
        out.hi = std::max(out.hi, v);
    }
    return out;
}

}  // namespace

SensitivityResult aggregate_sensitivity(const PriorSet& set, std::vector<PosteriorSummary> per_q,
                                        std::vector<std::string> names) {
    if (per_q.empty()) throw Error(ErrorCode::EmptyInput, "no posterior summaries to aggregate");
    SensitivityResult r;
    r.prior_set = set;
    r.per_q = std::move(per_q);
    r.names = std::move(names);
    const Eigen::Index p = r.per_q.front().beta_mean.size();

    for (Eigen::Index j = 0; j < p; ++j) {
        r.inclusion.push_back(envelope(r.per_q, [j](const PosteriorSummary& s) { return s.inclusion[j]; }));
        r.beta.push_back(envelope(r.per_q, [j](const PosteriorSummary& s) { return s.beta_mean[j]; }));
        r.gamma.push_back(envelope(r.per_q, [j](const PosteriorSummary& s) { return s.gamma_mean[j]; }));
        r.decisions.push_back(classify_predictor(r.inclusion.back()));
        if (r.inclusion.back().lo >= 0.5) r.s_lower.push_back(j);
        if (r.inclusion.back().hi >= 0.5) r.s_star.push_back(j);
    }
    r.beta_t_mean = envelope(r.per_q, [](const PosteriorSummary& s) { return s.beta_t_mean; });
    r.beta_t_median = envelope(r.per_q, [](const PosteriorSummary& s) { return s.beta_t_median; });
    r.beta_t_sd = envelope(r.per_q, [](const PosteriorSummary& s) { return s.beta_t_sd; });
    std::vector<Interval> cis;
    for (const auto& s : r.per_q) cis.push_back({s.beta_t_ci_lo, s.beta_t_ci_hi});
    r.beta_t_ci = robust_credible_interval(cis);
    return r;
}

std::uint64_t chain_seed(std::uint64_t master, std::uint64_t replicate, double q) {
    return derive_seed(master, {replicate, std::bit_cast<std::uint64_t>(q)});
}

SensitivityResult sensitivity_fit(const StandardizedDataset& data, const HierarchicalPrior& prior_template,
                                  const PriorSet& set, const SamplerConfig& cfg, const SensitivityOptions& opts) {
    set.validate();
    cfg.validate();
    const Eigen::Index p = data.inner.p();
    const JointDesign design = build_design(data);

    std::vector<PosteriorSummary> summaries(set.grid.size());
    std::vector<std::vector<std::string>> chain_warnings(set.grid.size());
    if (opts.keep_draws) opts.keep_draws->assign(set.grid.size(), PosteriorDraws{});
    parallel_for(set.grid.size(), opts.threads, [&](std::size_t g) {
        const double q = set.grid[g];
        HierarchicalPrior prior = HierarchicalPrior::with_common_q(p, q, prior_template);
        SamplerConfig c = cfg;
        c.seed = chain_seed(cfg.seed, opts.replicate, q);
        const ConditionalModel model(design, prior, ChainMode::Selection, cfg.treatment_model);
        const PosteriorDraws draws = run_chain(model, c);
        summaries[g] = summarize(draws, prior);
        if (opts.keep_draws) (*opts.keep_draws)[g] = draws;
        for (const auto& w : draws.warnings) {
            std::ostringstream msg;
            msg << "q=" << q << ": " << w;
            chain_warnings[g].push_back(msg.str());
        }
    });

    SensitivityResult r = aggregate_sensitivity(set, std::move(summaries), data.inner.names);
    for (auto& ws : chain_warnings) {
        for (auto& w : ws) r.warnings.push_back(std::move(w));
    }
    return r;
}

double misspecification_loss(double fp, double fn, double id, double tn, double tp, double p, const LossWeights& w) {
    if (tn == 0.0 || tp == 0.0 || p == 0.0) {
        throw Error(ErrorCode::DivisionByZero, "misspecification loss needs positive TN, TP and p");
    }
    return w.false_positive * fp / tn + w.false_negative * fn / tp + w.abstention * id / p;
}

}  // namespace rbce
