#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rbce {

/// Observed outcomes, binary treatment decisions and predictors.
struct Dataset {
    Eigen::VectorXd y;
    Eigen::VectorXd t;  // entries exactly 0 or 1
    Eigen::MatrixXd x;  // n x p
    std::vector<std::string> names;

    Eigen::Index n() const { return y.size(); }
    Eigen::Index p() const { return x.cols(); }

    /// Throws BadData / NonFiniteInput when an invariant is violated.
    void validate() const;
};

/// Builds a dataset and validates it; default predictor names are x1..xp.
Dataset make_dataset(Eigen::VectorXd y, Eigen::VectorXd t, Eigen::MatrixXd x,
                     std::vector<std::string> names = {});

struct StandardizeOptions {
    bool center_y = true;
    bool center_x = true;
    bool scale_x = true;
    /// Center the treatment regressor column of the outcome equation. Needed
    /// for an unbiased causal coefficient whenever the outcome intercept is
    /// dropped after centering y. The probit response is never centered.
    bool center_treatment_regressor = true;
    /// Defaults to !center_y when unset.
    std::optional<bool> outcome_intercept;
    bool treatment_intercept = true;
};

struct StandardizedDataset {
    Dataset inner;
    double y_center = 0.0;
    double t_center = 0.0;
    Eigen::VectorXd x_centers;
    Eigen::VectorXd x_scales;
    bool outcome_intercept = false;
    bool treatment_intercept = true;

    /// Treatment column as it enters the outcome equation.
    Eigen::VectorXd treatment_regressor() const;
    /// Inverse transformation back to the original scale.
    Dataset unstandardize() const;
};

StandardizedDataset standardize(const Dataset& data, const StandardizeOptions& opts = {});

/// Which predictors enter each equation. The full selection model uses every
/// predictor on both sides; a refit may drop columns independently per side.
struct CoefficientLayout {
    std::vector<Eigen::Index> beta_predictors;
    std::vector<Eigen::Index> gamma_predictors;
    bool beta0 = false;
    bool gamma0 = true;

    static CoefficientLayout full(Eigen::Index p, bool beta0, bool gamma0);

    Eigen::Index outcome_dim() const {
        return 1 + static_cast<Eigen::Index>(beta_predictors.size()) + (beta0 ? 1 : 0);
    }
    Eigen::Index treatment_dim() const {
        return static_cast<Eigen::Index>(gamma_predictors.size()) + (gamma0 ? 1 : 0);
    }
    Eigen::Index dim() const { return outcome_dim() + treatment_dim(); }

    // Positions inside the stacked coefficient vector nu.
    Eigen::Index beta_t_index() const { return 0; }
    Eigen::Index beta_index(std::size_t k) const { return 1 + static_cast<Eigen::Index>(k); }
    std::optional<Eigen::Index> beta0_index() const;
    Eigen::Index gamma_index(std::size_t k) const {
        return outcome_dim() + static_cast<Eigen::Index>(k);
    }
    std::optional<Eigen::Index> gamma0_index() const;
};

/// Block design of the stacked model W = (Y, T*) ~ N(Z nu, diag(sigma2 I, I)).
struct JointDesign {
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    CoefficientLayout layout;
    Eigen::MatrixXd x_outcome;    // n x outcome_dim: [T, X_beta, 1?]
    Eigen::MatrixXd x_treatment;  // n x treatment_dim: [X_gamma, 1?]
    Eigen::VectorXd w;            // 2n; latent slots hold NaN until filled
    Eigen::VectorXd t;            // observed treatment decisions

    Eigen::Index dim() const { return layout.dim(); }
    Eigen::VectorXd::ConstSegmentReturnType y() const { return w.head(n); }
    bool latent_slot(Eigen::Index row) const { return row >= n; }

    /// Dense 2n x d matrix Z with exact zeros off the diagonal blocks.
    Eigen::MatrixXd dense() const;
    /// W with the latent utilities filled in.
    Eigen::VectorXd stacked(const Eigen::VectorXd& t_star) const;
};

JointDesign build_design(const StandardizedDataset& data);
JointDesign build_design(const StandardizedDataset& data, const CoefficientLayout& layout);

/// Hyperparameters of one precise hierarchical model.
struct HierarchicalPrior {
    double tau0 = 1e-6;
    double tau1 = 1.0;
    double a = 50.0;
    double b = 1.0;
    double s = 1.0;
    Eigen::VectorXd q;

    static HierarchicalPrior with_common_q(Eigen::Index p, double q);
    static HierarchicalPrior with_common_q(Eigen::Index p, double q, HierarchicalPrior base);
    void validate(Eigen::Index p) const;
};

/// Standard normal CDF, erfc-based.
double normal_cdf(double x);

/// P(T = 1 | x) = Phi(x . gamma + gamma0).
double probit_prob(const Eigen::Ref<const Eigen::VectorXd>& x_row,
                   const Eigen::Ref<const Eigen::VectorXd>& gamma, double gamma0);

/// CSV with header `y,t,<predictors...>`. Missing or non-numeric cells are rejected.
Dataset read_dataset_csv(const std::string& path);
Dataset read_dataset_csv(std::istream& in);
void write_dataset_csv(const Dataset& data, std::ostream& out);

}  // namespace rbce
