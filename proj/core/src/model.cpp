#include "rbce/model.hpp"

#include "rbce/error.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace rbce {

void Dataset::validate() const {
    const Eigen::Index rows = y.size();
    if (rows < 1) throw Error(ErrorCode::BadData, "dataset has no observations");
    if (t.size() != rows || x.rows() != rows) {
        throw Error(ErrorCode::BadData, "y, t and x must have the same number of rows");
    }
    if (x.cols() < 1) throw Error(ErrorCode::BadData, "dataset has no predictors");
    if (static_cast<Eigen::Index>(names.size()) != x.cols()) {
        throw Error(ErrorCode::BadData, "predictor name count does not match columns");
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (t[i] != 0.0 && t[i] != 1.0) {
            throw Error(ErrorCode::BadData, "treatment indicators must be 0 or 1");
        }
    }
    if (!y.allFinite() || !x.allFinite()) {
        throw Error(ErrorCode::NonFiniteInput, "non-finite value in outcome or predictors");
    }
}

Dataset make_dataset(Eigen::VectorXd y, Eigen::VectorXd t, Eigen::MatrixXd x,
                     std::vector<std::string> names) {
    if (names.empty()) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
    }
    Dataset d{std::move(y), std::move(t), std::move(x), std::move(names)};
    d.validate();
    return d;
}

Eigen::VectorXd StandardizedDataset::treatment_regressor() const {
    return inner.t.array() - t_center;
}

Dataset StandardizedDataset::unstandardize() const {
    Dataset out = inner;
    out.y.array() += y_center;
    for (Eigen::Index j = 0; j < out.x.cols(); ++j) {
        out.x.col(j) = out.x.col(j).array() * x_scales[j] + x_centers[j];
    }
    return out;
}

StandardizedDataset standardize(const Dataset& data, const StandardizeOptions& opts) {
    data.validate();
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();

    StandardizedDataset out;
    out.inner = data;
    out.x_centers = Eigen::VectorXd::Zero(p);
    out.x_scales = Eigen::VectorXd::Ones(p);
    out.outcome_intercept = opts.outcome_intercept.value_or(!opts.center_y);
    out.treatment_intercept = opts.treatment_intercept;

    for (Eigen::Index j = 0; j < p; ++j) {
        auto col = out.inner.x.col(j);
        const double mean = col.mean();
        if (opts.center_x) {
            out.x_centers[j] = mean;
            col.array() -= mean;
        }
        if (opts.scale_x) {
            const double ss = (col.array() - (opts.center_x ? 0.0 : mean)).square().sum();
            const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
            if (!(sd > 0.0) || sd <= 1e-12 * (1.0 + std::abs(mean))) throw ConstantColumnError(j);
            out.x_scales[j] = sd;
            col.array() /= sd;
        }
    }
    if (opts.center_y) {
        out.y_center = data.y.mean();
        out.inner.y.array() -= out.y_center;
    }
    if (opts.center_treatment_regressor && opts.center_y) {
        out.t_center = data.t.mean();
    }
    return out;
}

CoefficientLayout CoefficientLayout::full(Eigen::Index p, bool beta0, bool gamma0) {
    CoefficientLayout l;
    for (Eigen::Index j = 0; j < p; ++j) {
        l.beta_predictors.push_back(j);
        l.gamma_predictors.push_back(j);
    }
    l.beta0 = beta0;
    l.gamma0 = gamma0;
    return l;
}

std::optional<Eigen::Index> CoefficientLayout::beta0_index() const {
    if (!beta0) return std::nullopt;
    return 1 + static_cast<Eigen::Index>(beta_predictors.size());
}

std::optional<Eigen::Index> CoefficientLayout::gamma0_index() const {
    if (!gamma0) return std::nullopt;
    return outcome_dim() + static_cast<Eigen::Index>(gamma_predictors.size());
}

Eigen::MatrixXd JointDesign::dense() const {
    const Eigen::Index d_o = layout.outcome_dim();
    const Eigen::Index d_t = layout.treatment_dim();
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(2 * n, d_o + d_t);
    z.topLeftCorner(n, d_o) = x_outcome;
    z.bottomRightCorner(n, d_t) = x_treatment;
    return z;
}

Eigen::VectorXd JointDesign::stacked(const Eigen::VectorXd& t_star) const {
    Eigen::VectorXd out = w;
    out.tail(n) = t_star;
    return out;
}

JointDesign build_design(const StandardizedDataset& data) {
    return build_design(data, CoefficientLayout::full(data.inner.p(), data.outcome_intercept,
                                                      data.treatment_intercept));
}

JointDesign build_design(const StandardizedDataset& data, const CoefficientLayout& layout) {
    const Eigen::Index n = data.inner.n();
    const Eigen::Index p = data.inner.p();
    for (auto j : layout.beta_predictors) {
        if (j < 0 || j >= p) throw Error(ErrorCode::BadConfig, "outcome predictor index out of range");
    }
    for (auto j : layout.gamma_predictors) {
        if (j < 0 || j >= p) throw Error(ErrorCode::BadConfig, "treatment predictor index out of range");
    }

    JointDesign d;
    d.n = n;
    d.p = p;
    d.layout = layout;
    d.t = data.inner.t;

    d.x_outcome.resize(n, layout.outcome_dim());
    d.x_outcome.col(0) = data.treatment_regressor();
    for (std::size_t k = 0; k < layout.beta_predictors.size(); ++k) {
        d.x_outcome.col(layout.beta_index(k)) = data.inner.x.col(layout.beta_predictors[k]);
    }
    if (auto i0 = layout.beta0_index()) d.x_outcome.col(*i0).setOnes();

    d.x_treatment.resize(n, layout.treatment_dim());
    for (std::size_t k = 0; k < layout.gamma_predictors.size(); ++k) {
        d.x_treatment.col(static_cast<Eigen::Index>(k)) = data.inner.x.col(layout.gamma_predictors[k]);
    }
    if (layout.gamma0) d.x_treatment.col(d.x_treatment.cols() - 1).setOnes();

    d.w.resize(2 * n);
    d.w.head(n) = data.inner.y;
    d.w.tail(n).setConstant(std::numeric_limits<double>::quiet_NaN());
    return d;
}

HierarchicalPrior HierarchicalPrior::with_common_q(Eigen::Index p, double q) {
    return with_common_q(p, q, HierarchicalPrior{});
}

HierarchicalPrior HierarchicalPrior::with_common_q(Eigen::Index p, double q, HierarchicalPrior base) {
    base.q = Eigen::VectorXd::Constant(p, q);
    return base;
}

void HierarchicalPrior::validate(Eigen::Index p) const {
    if (!(tau0 > 0.0) || !(tau1 > 0.0) || !(a > 0.0) || !(b > 0.0) || !(s > 0.0)) {
        throw Error(ErrorCode::BadConfig, "prior hyperparameters must be positive");
    }
    if (!(tau0 <= tau1)) throw Error(ErrorCode::BadConfig, "spike sd must not exceed slab sd");
    if (q.size() != p) throw Error(ErrorCode::BadConfig, "prior mean vector q has wrong length");
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!(q[j] > 0.0 && q[j] < 1.0)) {
            throw Error(ErrorCode::BadConfig, "prior inclusion means must lie in (0, 1)");
        }
    }
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double probit_prob(const Eigen::Ref<const Eigen::VectorXd>& x_row,
                   const Eigen::Ref<const Eigen::VectorXd>& gamma, double gamma0) {
    return normal_cdf(x_row.dot(gamma) + gamma0);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        std::size_t start = 0;
        while (start < cell.size() && cell[start] == ' ') ++start;
        cells.push_back(cell.substr(start));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    if (cell.empty()) {
        throw Error(ErrorCode::BadData, "missing value at row " + std::to_string(row) +
                                            ", column " + std::to_string(col));
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != cell.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::BadData, "non-numeric or missing value '" + cell + "' at row " +
                                            std::to_string(row) + ", column " + std::to_string(col));
    }
    return v;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::BadData, "empty data file");
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "y" || header[1] != "t") {
        throw Error(ErrorCode::BadData, "header must start with columns y,t followed by predictors");
    }
    const std::size_t cols = header.size();
    std::vector<std::vector<double>> rows;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != cols) {
            throw Error(ErrorCode::BadData, "row " + std::to_string(row_no) + " has " +
                                                std::to_string(cells.size()) + " cells, expected " +
                                                std::to_string(cols));
        }
        std::vector<double> values(cols);
        for (std::size_t c = 0; c < cols; ++c) values[c] = parse_cell(cells[c], row_no, c + 1);
        rows.push_back(std::move(values));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(cols - 2);
    Eigen::VectorXd y(n), t(n);
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        y[i] = rows[i][0];
        t[i] = rows[i][1];
        for (Eigen::Index j = 0; j < p; ++j) x(i, j) = rows[i][j + 2];
    }
    return make_dataset(std::move(y), std::move(t), std::move(x),
                        std::vector<std::string>(header.begin() + 2, header.end()));
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::BadData, "cannot open data file '" + path + "'");
    return read_dataset_csv(in);
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
    out << "y,t";
    for (const auto& name : data.names) out << ',' << name;
    out << '\n';
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        out << data.y[i] << ',' << static_cast<int>(data.t[i]);
        for (Eigen::Index j = 0; j < data.p(); ++j) out << ',' << data.x(i, j);
        out << '\n';
    }
}

}  // namespace rbce
