#include "rbce/dss.hpp"

#include "rbce/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace rbce {

IndexSet active_set(const PosteriorSummary& summary) {
    IndexSet out;
    for (Eigen::Index j = 0; j < summary.inclusion.size(); ++j) {
        if (summary.inclusion[j] >= 0.5) out.push_back(j);
    }
    return out;
}

ActiveSets active_sets(const std::vector<PosteriorSummary>& per_q) {
    ActiveSets sets;
    if (per_q.empty()) return sets;
    const Eigen::Index p = per_q.front().inclusion.size();
    std::vector<int> hits(static_cast<std::size_t>(p), 0);
    for (const auto& s : per_q) {
        sets.q.push_back(s.q.size() > 0 ? s.q[0] : 0.0);
        sets.per_q.push_back(active_set(s));
        for (auto j : sets.per_q.back()) ++hits[static_cast<std::size_t>(j)];
    }
    const int total = static_cast<int>(per_q.size());
    for (Eigen::Index j = 0; j < p; ++j) {
        const int h = hits[static_cast<std::size_t>(j)];
        if (h == total) sets.s_lower.push_back(j);
        if (h > 0) sets.s_star.push_back(j);
    }
    return sets;
}

double lasso_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& target, const Eigen::VectorXd& weights,
                       double lambda, const Eigen::VectorXd& coef) {
    const double n = static_cast<double>(x.rows());
    return (target - x * coef).squaredNorm() / n + lambda * (weights.array() * coef.array().abs()).sum();
}

double kkt_residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& target, const Eigen::VectorXd& weights,
                    double lambda, const Eigen::VectorXd& coef) {
    const double n = static_cast<double>(x.rows());
    const Eigen::VectorXd grad = (2.0 / n) * (x.transpose() * (target - x * coef));
    double worst = 0.0;
    for (Eigen::Index j = 0; j < coef.size(); ++j) {
        const double bound = lambda * weights[j];
        const double v = coef[j] == 0.0 ? std::max(std::abs(grad[j]) - bound, 0.0)
                                        : std::abs(grad[j] - bound * (coef[j] > 0.0 ? 1.0 : -1.0));
        worst = std::max(worst, v);
    }
    return worst;
}

double lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& target, const Eigen::VectorXd& weights) {
    const double n = static_cast<double>(x.rows());
    const Eigen::VectorXd g = (2.0 / n) * (x.transpose() * target).cwiseAbs();
    double out = 0.0;
    for (Eigen::Index j = 0; j < g.size(); ++j) out = std::max(out, g[j] / weights[j]);
    return out;
}

LassoFit adaptive_lasso_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& target, const Eigen::VectorXd& weights,
                            double lambda, const Eigen::VectorXd* warm_start, const LassoOptions& opts) {
    const Eigen::Index k = x.cols();
    if (weights.size() != k || target.size() != x.rows()) {
        throw Error(ErrorCode::BadConfig, "lasso inputs have mismatched shapes");
    }
    if (!(lambda >= 0.0)) throw Error(ErrorCode::BadConfig, "lambda must be non-negative");
    for (Eigen::Index j = 0; j < k; ++j) {
        if (!(weights[j] > 0.0)) throw Error(ErrorCode::BadConfig, "lasso weights must be positive");
    }

    const double n = static_cast<double>(x.rows());
    LassoFit fit;
    fit.coef = warm_start && warm_start->size() == k ? *warm_start : Eigen::VectorXd::Zero(k);
    if (k == 0) {
        fit.objective = target.squaredNorm() / n;
        return fit;
    }
    // Decide the all-zero case exactly rather than through a rounded g/w*w comparison.
    if (lambda >= lambda_max(x, target, weights)) {
        fit.coef.setZero();
        fit.sweeps = 0;
        fit.objective = target.squaredNorm() / n;
        return fit;
    }
    const Eigen::VectorXd curvature = (2.0 / n) * x.colwise().squaredNorm().transpose();
    Eigen::VectorXd resid = target - x * fit.coef;

    for (fit.sweeps = 1; fit.sweeps <= opts.max_sweeps; ++fit.sweeps) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            const double old = fit.coef[j];
            double updated = 0.0;
            if (curvature[j] > 0.0) {
                const double g = (2.0 / n) * x.col(j).dot(resid) + curvature[j] * old;
                const double thr = lambda * weights[j];
                if (g > thr) updated = (g - thr) / curvature[j];
                else if (g < -thr) updated = (g + thr) / curvature[j];
            }
            if (updated != old) {
                resid.noalias() -= (updated - old) * x.col(j);
                fit.coef[j] = updated;
                max_change = std::max(max_change, std::abs(updated - old) * std::sqrt(curvature[j]));
            }
        }
        if (max_change < 1e-13 || fit.sweeps % 50 == 0) {
            resid = target - x * fit.coef;
            if (kkt_residual(x, target, weights, lambda, fit.coef) <= opts.kkt_tolerance) break;
        }
    }
    if (fit.sweeps > opts.max_sweeps) {
        throw Error(ErrorCode::NonConvergence, "coordinate descent did not reach the KKT tolerance");
    }
    fit.objective = lasso_objective(x, target, weights, lambda, fit.coef);
    return fit;
}

LassoPath lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& target, const Eigen::VectorXd& weights,
                     int points, double min_ratio, const LassoOptions& opts) {
    if (points < 1) throw Error(ErrorCode::BadConfig, "lasso path needs at least one point");
    LassoPath path;
    path.reference_fit = x.cols() > 0 ? Eigen::VectorXd(x * x.completeOrthogonalDecomposition().solve(target))
                                      : Eigen::VectorXd::Zero(target.size());
    const double top = lambda_max(x, target, weights);
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(x.cols());
    for (int i = 0; i < points; ++i) {
        const double frac = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
        const double lambda = top * std::pow(min_ratio, frac);
        LassoFit fit = adaptive_lasso_fit(x, target, weights, lambda, &warm, opts);
        warm = fit.coef;
        path.lambdas.push_back(lambda);
        path.fitted.push_back(x * fit.coef);
        path.objectives.push_back(fit.objective);
        path.coefs.push_back(std::move(fit.coef));
    }
    return path;
}

std::size_t select_lambda_index(const LassoPath& path, double rho) {
    if (path.lambdas.empty()) throw Error(ErrorCode::EmptyPath, "lambda path is empty");
    const double total = path.reference_fit.squaredNorm();
    for (std::size_t i = 0; i < path.lambdas.size(); ++i) {
        const double lost = total > 0.0 ? (path.reference_fit - path.fitted[i]).squaredNorm() / total : 0.0;
        if (1.0 - lost >= 1.0 - rho) return i;
    }
    return path.lambdas.size() - 1;
}

double select_lambda(const LassoPath& path, const Eigen::VectorXd& target, double rho) {
    if (path.lambdas.empty()) throw Error(ErrorCode::EmptyPath, "lambda path is empty");
    if (path.reference_fit.size() != target.size()) throw Error(ErrorCode::BadConfig, "target does not match path");
    return path.lambdas[select_lambda_index(path, rho)];
}

namespace {

DssSideFit sparsify(const Eigen::MatrixXd& x_s, const Eigen::VectorXd& means_s, const IndexSet& active,
                    Eigen::Index p, const DssOptions& opts) {
    DssSideFit side;
    side.coef = Eigen::VectorXd::Zero(p);
    if (active.empty()) return side;
    const Eigen::VectorXd target = x_s * means_s;
    const Eigen::VectorXd weights = means_s.cwiseAbs().cwiseMax(opts.weight_floor).cwiseInverse();
    const LassoPath path = lasso_path(x_s, target, weights, opts.path_points, opts.min_ratio, opts.lasso);
    const std::size_t i = select_lambda_index(path, opts.rho);
    side.lambda = path.lambdas[i];
    for (std::size_t k = 0; k < active.size(); ++k) side.coef[active[k]] = path.coefs[i][static_cast<Eigen::Index>(k)];
    return side;
}

}  // namespace

DssResult dss_summarize(const SensitivityResult& sensitivity, const StandardizedDataset& data, const DssOptions& opts) {
    const Eigen::MatrixXd& x = data.inner.x;
    const Eigen::Index p = x.cols();
    DssResult out;
    out.names = data.inner.names;
    out.sets = active_sets(sensitivity.per_q);
    for (std::size_t g = 0; g < sensitivity.per_q.size(); ++g) {
        const PosteriorSummary& s = sensitivity.per_q[g];
        if (s.beta_mean.size() != p) throw Error(ErrorCode::BadData, "sensitivity result does not match the data");
        DssFit fit;
        fit.q = out.sets.q[g];
        fit.active = out.sets.per_q[g];
        const auto k = static_cast<Eigen::Index>(fit.active.size());
        Eigen::MatrixXd x_s(x.rows(), k);
        Eigen::VectorXd beta_s(k), gamma_s(k);
        for (Eigen::Index c = 0; c < k; ++c) {
            const Eigen::Index j = fit.active[static_cast<std::size_t>(c)];
            x_s.col(c) = x.col(j);
            beta_s[c] = s.beta_mean[j];
            gamma_s[c] = s.gamma_mean[j];
        }
        fit.outcome = sparsify(x_s, beta_s, fit.active, p, opts);
        fit.treatment = sparsify(x_s, gamma_s, fit.active, p, opts);
        out.per_q.push_back(std::move(fit));
    }
    return out;
}

void write_dss_csv(const DssResult& result, std::ostream& out) {
    out << "q,side,predictor,coef,selected\n";
    out << std::setprecision(17);
    for (const auto& fit : result.per_q) {
        for (const auto* side : {&fit.outcome, &fit.treatment}) {
            const char* label = side == &fit.outcome ? "outcome" : "treatment";
            for (auto j : fit.active) {
                const double c = side->coef[j];
                const std::string& name =
                    j < static_cast<Eigen::Index>(result.names.size()) ? result.names[j] : std::to_string(j + 1);
                out << fit.q << ',' << label << ',' << name << ',' << c << ',' << (c != 0.0 ? 1 : 0) << '\n';
            }
        }
    }
}

}  // namespace rbce
