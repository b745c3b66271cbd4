#pragma once

#include "rbce/model.hpp"
#include "rbce/robust.hpp"
#include "rbce/sampler.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <vector>

namespace rbce {

using IndexSet = std::vector<Eigen::Index>;

/// S(q) = { j : E_q(pi_j | W) >= 1/2 }.
IndexSet active_set(const PosteriorSummary& summary);

struct ActiveSets {
    std::vector<double> q;
    std::vector<IndexSet> per_q;
    IndexSet s_lower;  // intersection over q
    IndexSet s_star;   // union over q
};

ActiveSets active_sets(const std::vector<PosteriorSummary>& per_q);

struct LassoOptions {
    int max_sweeps = 100000;
    double kkt_tolerance = 1e-10;
};

struct LassoFit {
    Eigen::VectorXd coef;
    double objective = 0.0;
    int sweeps = 0;
};

/// (1/n) ||target - X b||^2 + lambda * sum_j w_j |b_j|
double lasso_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& target, const Eigen::VectorXd& weights,
                       double lambda, const Eigen::VectorXd& coef);

/// Largest subgradient-optimality violation over the coordinates.
double kkt_residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& target, const Eigen::VectorXd& weights,
                    double lambda, const Eigen::VectorXd& coef);

/// Smallest lambda at which the all-zero vector is optimal.
double lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& target, const Eigen::VectorXd& weights);

/// Cyclic coordinate descent with soft-thresholding. Throws NonConvergence if
/// the KKT tolerance is not met within max_sweeps.
LassoFit adaptive_lasso_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& target, const Eigen::VectorXd& weights,
                            double lambda, const Eigen::VectorXd* warm_start = nullptr,
                            const LassoOptions& opts = {});

struct LassoPath {
    std::vector<double> lambdas;  // decreasing
    std::vector<Eigen::VectorXd> coefs;
    std::vector<double> objectives;
    std::vector<Eigen::VectorXd> fitted;
    Eigen::VectorXd reference_fit;  // unpenalized fit of the target
};

LassoPath lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& target, const Eigen::VectorXd& weights,
                     int points = 100, double min_ratio = 1e-4, const LassoOptions& opts = {});

/// Index into the path of the largest lambda whose fit keeps at least
/// (1 - rho) of the reference fit's variation.
std::size_t select_lambda_index(const LassoPath& path, double rho);
double select_lambda(const LassoPath& path, const Eigen::VectorXd& target, double rho);

struct DssOptions {
    double rho = 0.01;
    int path_points = 100;
    double min_ratio = 1e-4;
    double weight_floor = 1e-8;
    LassoOptions lasso;
};

struct DssSideFit {
    double lambda = 0.0;
    Eigen::VectorXd coef;  // length p, zero outside S(q)
};

struct DssFit {
    double q = 0.0;
    IndexSet active;
    DssSideFit outcome;
    DssSideFit treatment;
};

struct DssResult {
    std::vector<DssFit> per_q;
    ActiveSets sets;
    std::vector<std::string> names;
};

/// Sparsifies the posterior-mean fit of both equations for every grid q.
DssResult dss_summarize(const SensitivityResult& sensitivity, const StandardizedDataset& data,
                        const DssOptions& opts = {});

/// Columns q, side, predictor, coef, selected; one row per (q, side, j in S(q)).
void write_dss_csv(const DssResult& result, std::ostream& out);

}  // namespace rbce
