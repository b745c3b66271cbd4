#include "rbce/sampler.hpp"

#include "rbce/error.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

namespace rbce {
namespace {

double log_odds_to_prob(double lo) {
    if (lo >= 0.0) return 1.0 / (1.0 + std::exp(-lo));
    const double e = std::exp(lo);
    return e / (1.0 + e);
}

double prior_log_odds(double pi) { return std::log(pi) - std::log1p(-pi); }

/// log marginal likelihood of a residual under one Gaussian coefficient with
/// prior sd tau (times sigma), dropping terms that cancel between components.
double collapsed_log_ml(double tau, double gram, double proj, double sigma2) {
    const double t2 = tau * tau;
    const double denom = 1.0 + t2 * gram;
    return -0.5 * std::log(denom) + t2 * proj * proj / (2.0 * sigma2 * denom);
}

Eigen::VectorXd draw_gaussian(const Eigen::MatrixXd& precision, const Eigen::VectorXd& rhs,
                              double scale, Rng& rng, const char* block) {
    Eigen::LLT<Eigen::MatrixXd> llt(precision);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::NumericalFailure,
                    std::string("conditional precision of the ") + block + " block is not positive definite");
    }
    Eigen::VectorXd mean = llt.solve(rhs);
    Eigen::VectorXd xi(rhs.size());
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = rng.normal();
    // L L' = A, so L'^-1 xi has covariance A^-1.
    llt.matrixU().solveInPlace(xi);
    Eigen::VectorXd out = mean + scale * xi;
    if (!out.allFinite()) {
        throw Error(ErrorCode::NumericalFailure, std::string("non-finite draw in the ") + block + " block");
    }
    return out;
}

void check_selection_layout(const ConditionalModel& m) {
    const auto& l = m.design().layout;
    if (l.beta_predictors != l.gamma_predictors ||
        static_cast<Eigen::Index>(l.beta_predictors.size()) != m.design().p) {
        throw Error(ErrorCode::BadConfig, "selection chains need every predictor on both sides");
    }
}

}  // namespace

void SamplerConfig::validate() const {
    if (burn_in < 0 || samples < 1 || thin < 1) {
        throw Error(ErrorCode::BadConfig, "sampler needs burn_in >= 0, samples >= 1, thin >= 1");
    }
}

ConditionalModel::ConditionalModel(JointDesign design, HierarchicalPrior prior, ChainMode mode,
                                   bool treatment_model)
    : design_(std::move(design)), prior_(std::move(prior)), mode_(mode), treatment_model_(treatment_model) {
    prior_.validate(design_.p);
    if (mode_ == ChainMode::Selection) check_selection_layout(*this);
    outcome_gram_ = design_.x_outcome.transpose() * design_.x_outcome;
    treatment_gram_ = design_.x_treatment.transpose() * design_.x_treatment;
    outcome_xty_ = design_.x_outcome.transpose() * design_.y();
}

double ConditionalModel::slab_sd(const LatentState& s, Eigen::Index predictor) const {
    if (mode_ == ChainMode::Refit) return prior_.tau1;
    return s.z[predictor] != 0 ? prior_.tau1 : prior_.tau0;
}

Eigen::VectorXd ConditionalModel::outcome_prior_precision(const LatentState& s) const {
    const auto& l = design_.layout;
    Eigen::VectorXd prec = Eigen::VectorXd::Ones(l.outcome_dim());
    for (std::size_t k = 0; k < l.beta_predictors.size(); ++k) {
        const double tau = slab_sd(s, l.beta_predictors[k]);
        prec[l.beta_index(k)] = 1.0 / (tau * tau);
    }
    return prec;
}

Eigen::VectorXd ConditionalModel::treatment_prior_precision(const LatentState& s) const {
    const auto& l = design_.layout;
    Eigen::VectorXd prec = Eigen::VectorXd::Ones(l.treatment_dim());
    for (std::size_t k = 0; k < l.gamma_predictors.size(); ++k) {
        const double tau = slab_sd(s, l.gamma_predictors[k]);
        prec[static_cast<Eigen::Index>(k)] = 1.0 / (tau * tau);
    }
    return prec;
}

CoefficientConditional coefficient_conditional(const LatentState& s, const ConditionalModel& m) {
    CoefficientConditional c;
    c.outcome_precision = m.outcome_gram();
    c.outcome_precision.diagonal() += m.outcome_prior_precision(s);
    c.outcome_mean = c.outcome_precision.llt().solve(m.outcome_xty());

    const Eigen::VectorXd tprec = m.treatment_prior_precision(s);
    if (m.treatment_model()) {
        c.treatment_precision = m.treatment_gram();
        c.treatment_precision.diagonal() += tprec;
        const Eigen::VectorXd rhs = m.design().x_treatment.transpose() * s.t_star;
        c.treatment_mean = c.treatment_precision.llt().solve(rhs);
    } else {
        c.treatment_precision = tprec.asDiagonal();
        c.treatment_mean = Eigen::VectorXd::Zero(tprec.size());
    }
    return c;
}

GammaParams noise_precision_conditional(const LatentState& s, const ConditionalModel& m) {
    const auto& d = m.design();
    const Eigen::Index d_o = d.layout.outcome_dim();
    const Eigen::VectorXd beta = s.nu.head(d_o);
    const double rss = (d.y() - d.x_outcome * beta).squaredNorm();
    const double penalty = (m.outcome_prior_precision(s).array() * beta.array().square()).sum();
    return {m.prior().a + 0.5 * static_cast<double>(d.n + d_o), m.prior().b + 0.5 * (rss + penalty)};
}

double slab_responsibility(double beta, double gamma, double sigma2, double pi, double tau0, double tau1,
                           bool with_gamma) {
    const double dims = with_gamma ? 2.0 : 1.0;
    const double quad = beta * beta / sigma2 + (with_gamma ? gamma * gamma : 0.0);
    // log N2(.; 0, tau1^2 D) - log N2(.; 0, tau0^2 D)
    const double log_ratio = dims * std::log(tau0 / tau1) - 0.5 * quad * (1.0 / (tau1 * tau1) - 1.0 / (tau0 * tau0));
    return log_odds_to_prob(prior_log_odds(pi) + log_ratio);
}

void sample_latent_treatment(LatentState& s, const ConditionalModel& m, Rng& rng) {
    if (!m.treatment_model()) return;
    const auto& d = m.design();
    const Eigen::VectorXd mean = d.x_treatment * s.nu.tail(d.layout.treatment_dim());
    for (Eigen::Index i = 0; i < d.n; ++i) {
        s.t_star[i] = truncated_normal_unit(rng, mean[i], d.t[i] == 1.0);
    }
}

void sample_coefficients(LatentState& s, const ConditionalModel& m, Rng& rng) {
    const auto& d = m.design();
    const Eigen::Index d_o = d.layout.outcome_dim();
    const Eigen::Index d_t = d.layout.treatment_dim();

    Eigen::MatrixXd a_o = m.outcome_gram();
    a_o.diagonal() += m.outcome_prior_precision(s);
    s.nu.head(d_o) = draw_gaussian(a_o, m.outcome_xty(), std::sqrt(s.sigma2), rng, "outcome");

    if (d_t == 0) return;
    const Eigen::VectorXd tprec = m.treatment_prior_precision(s);
    if (m.treatment_model()) {
        Eigen::MatrixXd a_t = m.treatment_gram();
        a_t.diagonal() += tprec;
        const Eigen::VectorXd rhs = d.x_treatment.transpose() * s.t_star;
        s.nu.tail(d_t) = draw_gaussian(a_t, rhs, 1.0, rng, "treatment");
    } else {
        for (Eigen::Index k = 0; k < d_t; ++k) s.nu[d_o + k] = rng.normal() / std::sqrt(tprec[k]);
    }
}

void sample_mixture_indicators(LatentState& s, const ConditionalModel& m, Rng& rng) {
    if (m.mode() != ChainMode::Selection) return;
    const auto& l = m.design().layout;
    const auto& pr = m.prior();
    for (std::size_t k = 0; k < l.beta_predictors.size(); ++k) {
        const Eigen::Index j = l.beta_predictors[k];
        const double r = slab_responsibility(s.nu[l.beta_index(k)], s.nu[l.gamma_index(k)], s.sigma2, s.pi[j],
                                             pr.tau0, pr.tau1);
        s.z[j] = rng.bernoulli(r) ? 1 : 0;
    }
}

void sample_indicator_blocks(LatentState& s, const ConditionalModel& m, Rng& rng) {
    if (m.mode() != ChainMode::Selection) return;
    const auto& d = m.design();
    const auto& l = d.layout;
    const auto& pr = m.prior();
    const Eigen::Index d_o = l.outcome_dim();
    const Eigen::Index d_t = l.treatment_dim();

    Eigen::VectorXd r_o = d.y() - d.x_outcome * s.nu.head(d_o);
    Eigen::VectorXd r_t;
    if (m.treatment_model()) r_t = s.t_star - d.x_treatment * s.nu.tail(d_t);

    for (std::size_t k = 0; k < l.beta_predictors.size(); ++k) {
        const Eigen::Index j = l.beta_predictors[k];
        const Eigen::Index ib = l.beta_index(k);
        const Eigen::Index ig = l.gamma_index(k);
        const auto kt = static_cast<Eigen::Index>(k);

        const double beta_old = s.nu[ib];
        const double gamma_old = s.nu[ig];
        const double gram_o = m.outcome_gram()(ib, ib);
        const double proj_o = d.x_outcome.col(ib).dot(r_o) + gram_o * beta_old;
        double gram_t = 0.0;
        double proj_t = 0.0;
        if (m.treatment_model()) {
            gram_t = m.treatment_gram()(kt, kt);
            proj_t = d.x_treatment.col(kt).dot(r_t) + gram_t * gamma_old;
        }

        const double log_odds = prior_log_odds(s.pi[j]) +
                                collapsed_log_ml(pr.tau1, gram_o, proj_o, s.sigma2) -
                                collapsed_log_ml(pr.tau0, gram_o, proj_o, s.sigma2) +
                                collapsed_log_ml(pr.tau1, gram_t, proj_t, 1.0) -
                                collapsed_log_ml(pr.tau0, gram_t, proj_t, 1.0);
        s.z[j] = rng.bernoulli(log_odds_to_prob(log_odds)) ? 1 : 0;

        const double tau = s.z[j] != 0 ? pr.tau1 : pr.tau0;
        const double prec_o = gram_o + 1.0 / (tau * tau);
        const double beta_new = proj_o / prec_o + std::sqrt(s.sigma2 / prec_o) * rng.normal();
        const double prec_t = gram_t + 1.0 / (tau * tau);
        const double gamma_new = proj_t / prec_t + std::sqrt(1.0 / prec_t) * rng.normal();

        r_o.noalias() -= (beta_new - beta_old) * d.x_outcome.col(ib);
        if (m.treatment_model()) r_t.noalias() -= (gamma_new - gamma_old) * d.x_treatment.col(kt);
        s.nu[ib] = beta_new;
        s.nu[ig] = gamma_new;
    }
}

void sample_inclusion_probs(LatentState& s, const ConditionalModel& m, Rng& rng) {
    if (m.mode() != ChainMode::Selection) return;
    const auto& pr = m.prior();
    for (Eigen::Index j = 0; j < s.pi.size(); ++j) {
        const double zj = static_cast<double>(s.z[j]);
        s.pi[j] = rng.beta(pr.s * pr.q[j] + zj, pr.s * (1.0 - pr.q[j]) + 1.0 - zj);
    }
}

void sample_noise_precision(LatentState& s, const ConditionalModel& m, Rng& rng) {
    const GammaParams g = noise_precision_conditional(s, m);
    s.sigma2 = 1.0 / rng.gamma(g.shape, g.rate);
}

LatentState initial_state(const ConditionalModel& m, Rng& rng) {
    const auto& d = m.design();
    LatentState s;
    s.nu = Eigen::VectorXd::Zero(d.dim());
    s.t_star = Eigen::VectorXd::Zero(d.n);
    if (m.treatment_model()) {
        for (Eigen::Index i = 0; i < d.n; ++i) s.t_star[i] = truncated_normal_unit(rng, 0.0, d.t[i] == 1.0);
    }
    s.z = Eigen::VectorXi::Ones(d.p);
    s.pi = m.prior().q;
    s.sigma2 = m.prior().b / m.prior().a;
    return s;
}

namespace {

void check_init(const LatentState& s, const ConditionalModel& m) {
    const auto& d = m.design();
    if (s.nu.size() != d.dim() || s.t_star.size() != d.n || s.z.size() != d.p || s.pi.size() != d.p) {
        throw Error(ErrorCode::BadConfig, "initial state has wrong dimensions");
    }
    if (!(s.sigma2 > 0.0)) throw Error(ErrorCode::BadConfig, "initial sigma2 must be positive");
}

void store(PosteriorDraws& out, Eigen::Index row, const LatentState& s, bool selection) {
    out.nu.row(row) = s.nu.transpose();
    if (selection) {
        out.pi.row(row) = s.pi.transpose();
        out.z.row(row) = s.z.cast<double>().transpose();
    }
    out.sigma2[row] = s.sigma2;
}

}  // namespace

PosteriorDraws run_chain(const ConditionalModel& model, const SamplerConfig& cfg) {
    cfg.validate();
    const auto& d = model.design();
    if (d.n < 1) throw Error(ErrorCode::Degenerate, "chain needs at least one observation");

    Rng rng(cfg.seed);
    LatentState state = cfg.init ? *cfg.init : initial_state(model, rng);
    check_init(state, model);

    const bool selection = model.mode() == ChainMode::Selection;
    PosteriorDraws out;
    out.layout = d.layout;
    out.p = d.p;
    out.mode = model.mode();
    out.nu.resize(cfg.samples, d.dim());
    if (selection) {
        out.pi.resize(cfg.samples, d.p);
        out.z.resize(cfg.samples, d.p);
    }
    out.sigma2.resize(cfg.samples);

    const long total = static_cast<long>(cfg.burn_in) + static_cast<long>(cfg.samples) * cfg.thin;
    Eigen::Index kept = 0;
    for (long it = 0; it < total; ++it) {
        sample_latent_treatment(state, model, rng);
        sample_coefficients(state, model, rng);
        if (cfg.collapsed_indicators) {
            sample_indicator_blocks(state, model, rng);
        } else {
            sample_mixture_indicators(state, model, rng);
        }
        sample_inclusion_probs(state, model, rng);
        sample_noise_precision(state, model, rng);

        const long post = it - cfg.burn_in + 1;
        if (post > 0 && post % cfg.thin == 0) store(out, kept++, state, selection);
    }

    if (!out.nu.allFinite() || !out.sigma2.allFinite()) {
        throw Error(ErrorCode::NumericalFailure, "chain produced non-finite draws");
    }
    const Eigen::VectorXd bt = out.beta_t();
    out.ess_beta_t = effective_sample_size(std::span<const double>(bt.data(), static_cast<std::size_t>(bt.size())));
    if (out.ess_beta_t < 100.0) {
        out.warnings.push_back("effective sample size of beta_T is " + std::to_string(out.ess_beta_t) +
                               " (< 100)");
    }
    return out;
}

PosteriorDraws run_chain(const StandardizedDataset& data, const HierarchicalPrior& prior,
                         const SamplerConfig& cfg) {
    return run_chain(ConditionalModel(build_design(data), prior, ChainMode::Selection, cfg.treatment_model), cfg);
}

PosteriorSummary summarize(const PosteriorDraws& draws, const HierarchicalPrior& prior) {
    const auto& l = draws.layout;
    const Eigen::Index m = draws.size();
    PosteriorSummary s;
    s.q = prior.q;
    s.beta_mean = Eigen::VectorXd::Zero(draws.p);
    s.gamma_mean = Eigen::VectorXd::Zero(draws.p);
    const Eigen::VectorXd means = draws.nu.colwise().mean();
    for (std::size_t k = 0; k < l.beta_predictors.size(); ++k) s.beta_mean[l.beta_predictors[k]] = means[l.beta_index(k)];
    for (std::size_t k = 0; k < l.gamma_predictors.size(); ++k) {
        s.gamma_mean[l.gamma_predictors[k]] = means[l.gamma_index(k)];
    }
    if (draws.mode == ChainMode::Selection) {
        const Eigen::VectorXd zbar = draws.z.colwise().mean();
        s.inclusion = (prior.s * prior.q.array() + zbar.array()) / (prior.s + 1.0);
    }

    const Eigen::VectorXd bt = draws.beta_t();
    std::vector<double> v(bt.data(), bt.data() + m);
    s.beta_t_mean = means[0];
    s.beta_t_sd = m > 1 ? std::sqrt((bt.array() - s.beta_t_mean).square().sum() / static_cast<double>(m - 1)) : 0.0;
    s.beta_t_median = quantile(v, 0.5);
    s.beta_t_ci_lo = quantile(v, 0.025);
    s.beta_t_ci_hi = quantile(v, 0.975);
    s.ess_beta_t = draws.ess_beta_t > 0.0 ? draws.ess_beta_t : effective_sample_size(v);
    s.beta_t_mcse = s.beta_t_sd / std::sqrt(s.ess_beta_t);
    s.sigma2_mean = draws.sigma2.mean();
    return s;
}

double effective_sample_size(std::span<const double> x) {
    const std::size_t m = x.size();
    if (m < 4) return static_cast<double>(m);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(m);
    auto autocov = [&](std::size_t lag) {
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < m; ++i) acc += (x[i] - mean) * (x[i + lag] - mean);
        return acc / static_cast<double>(m);
    };
    const double c0 = autocov(0);
    if (!(c0 > 0.0)) return static_cast<double>(m);

    // Sum of consecutive autocorrelation pairs, truncated at the first
    // non-positive pair and forced monotone.
    double sum = 0.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; 2 * k + 1 < m; ++k) {
        double pair = (autocov(2 * k) + autocov(2 * k + 1)) / c0;
        if (pair <= 0.0) break;
        pair = std::min(pair, prev_pair);
        prev_pair = pair;
        sum += pair;
    }
    const double tau = std::max(2.0 * sum - 1.0, 1.0 / static_cast<double>(m));
    return std::min(static_cast<double>(m) / tau, static_cast<double>(m) * std::log10(static_cast<double>(m)));
}

double monte_carlo_se(std::span<const double> x) {
    const std::size_t m = x.size();
    if (m < 2) return std::numeric_limits<double>::infinity();
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(m);
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(m - 1));
    return sd / std::sqrt(effective_sample_size(x));
}

double quantile(std::vector<double> x, double prob) {
    if (x.empty()) throw Error(ErrorCode::EmptyInput, "quantile of an empty sample");
    std::sort(x.begin(), x.end());
    const double h = (static_cast<double>(x.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

void write_draws_csv(const PosteriorDraws& draws, std::ostream& out) {
    const auto& l = draws.layout;
    const bool selection = draws.mode == ChainMode::Selection;
    out << "beta_T";
    for (auto j : l.beta_predictors) out << ",beta_" << (j + 1);
    if (l.beta0) out << ",beta_0";
    for (auto j : l.gamma_predictors) out << ",gamma_" << (j + 1);
    if (l.gamma0) out << ",gamma_0";
    if (selection) {
        for (Eigen::Index j = 0; j < draws.p; ++j) out << ",pi_" << (j + 1);
    }
    out << ",sigma2\n";
    out << std::setprecision(17);
    for (Eigen::Index r = 0; r < draws.size(); ++r) {
        for (Eigen::Index c = 0; c < draws.nu.cols(); ++c) {
            if (c > 0) out << ',';
            out << draws.nu(r, c);
        }
        if (selection) {
            for (Eigen::Index j = 0; j < draws.p; ++j) out << ',' << draws.pi(r, j);
        }
        out << ',' << draws.sigma2[r] << '\n';
    }
}

}  // namespace rbce
