#include "rbce/simbench.hpp"

#include "rbce/error.hpp"
#include "rbce/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace rbce {

StudyCase parse_study_case(const std::string& s) {
    if (s == "1a") return StudyCase::Case1a;
    if (s == "1b") return StudyCase::Case1b;
    if (s == "2a") return StudyCase::Case2a;
    if (s == "2b") return StudyCase::Case2b;
    throw Error(ErrorCode::BadConfig, "unknown study case '" + s + "' (expected 1a, 1b, 2a or 2b)");
}

std::string to_string(StudyCase c) {
    switch (c) {
        case StudyCase::Case1a: return "1a";
        case StudyCase::Case1b: return "1b";
        case StudyCase::Case2a: return "2a";
        case StudyCase::Case2b: return "2b";
    }
    return "1a";
}

bool varies_n(StudyCase c) { return c == StudyCase::Case1a || c == StudyCase::Case1b; }

SupportPattern support_of(StudyCase c) {
    const bool outcome_only_extra = c == StudyCase::Case1b || c == StudyCase::Case2b;
    return {outcome_only_extra ? 15 : 10, 10};
}

std::vector<bool> TruthSpec::active() const {
    std::vector<bool> out(static_cast<std::size_t>(beta.size()));
    for (Eigen::Index j = 0; j < beta.size(); ++j) out[static_cast<std::size_t>(j)] = beta[j] != 0.0 || gamma[j] != 0.0;
    return out;
}

TruthSpec truth_magnitudes(SupportPattern support, Eigen::Index p, std::uint64_t seed, MagnitudeMode mode) {
    TruthSpec t;
    t.beta = Eigen::VectorXd::Zero(p);
    t.gamma = Eigen::VectorXd::Zero(p);
    Rng rng(seed);
    auto fill = [&](Eigen::VectorXd& v, Eigen::Index count) {
        for (Eigen::Index j = 0; j < std::min(count, p); ++j) {
            if (mode == MagnitudeMode::Alternating) {
                v[j] = j % 2 == 0 ? 1.0 : -1.0;
            } else {
                const double mag = 0.5 + rng.uniform();
                v[j] = rng.uniform() < 0.5 ? -mag : mag;
            }
        }
    };
    fill(t.beta, support.beta);
    fill(t.gamma, support.gamma);
    return t;
}

TruthSpec truth_magnitudes(StudyCase c, Eigen::Index p, std::uint64_t seed, MagnitudeMode mode) {
    return truth_magnitudes(support_of(c), p, seed, mode);
}

Eigen::MatrixXd gen_design(Eigen::Index n, Eigen::Index p, double rho, Rng& rng) {
    if (n < 1 || p < 1) throw Error(ErrorCode::BadConfig, "design needs n, p >= 1");
    if (!(std::abs(rho) < 1.0)) throw Error(ErrorCode::BadConfig, "AR(1) correlation must satisfy |rho| < 1");
    // Stationary AR(1) across columns has covariance rho^|i-j|.
    const double innovation = std::sqrt(1.0 - rho * rho);
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        for (Eigen::Index j = 1; j < p; ++j) x(i, j) = rho * x(i, j - 1) + innovation * rng.normal();
    }
    return x;
}

Eigen::MatrixXd gen_design(Eigen::Index n, Eigen::Index p, double rho, std::uint64_t seed) {
    Rng rng(seed);
    return gen_design(n, p, rho, rng);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> gen_response(const Eigen::MatrixXd& x, const TruthSpec& truth, Rng& rng) {
    if (truth.beta.size() != x.cols() || truth.gamma.size() != x.cols()) {
        throw Error(ErrorCode::BadConfig, "truth dimensions do not match the design");
    }
    const Eigen::Index n = x.rows();
    const Eigen::VectorXd eta = x * truth.gamma;
    const Eigen::VectorXd mu = x * truth.beta;
    Eigen::VectorXd t(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double prob = 1.0 / (1.0 + std::exp(-eta[i]));
        t[i] = rng.uniform() < prob ? 1.0 : 0.0;
        y[i] = truth.beta_t * t[i] + mu[i] + truth.noise_sd * rng.normal();
    }
    return {std::move(t), std::move(y)};
}

Dataset simulate_dataset(Eigen::Index n, const TruthSpec& truth, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x = gen_design(n, truth.beta.size(), truth.ar_rho, rng);
    auto [t, y] = gen_response(x, truth, rng);
    return make_dataset(std::move(y), std::move(t), std::move(x));
}

std::vector<int> StudyConfig::default_grid() {
    std::vector<int> g;
    for (int k = 1; k <= 11; ++k) g.push_back(20 + 5 * k);
    return g;
}

void StudyConfig::validate() const {
    if (grid.empty()) throw Error(ErrorCode::BadConfig, "study grid is empty");
    if (replicates < 1) throw Error(ErrorCode::BadConfig, "study needs at least one replicate");
    for (int v : grid) {
        if (v < 2) throw Error(ErrorCode::BadConfig, "study grid values must be at least 2");
        const SupportPattern s = support_of(study);
        if (!varies_n(study) && v < std::max(s.beta, s.gamma) + 1) {
            throw Error(ErrorCode::BadConfig, "case 2 needs p larger than the true support");
        }
    }
    sampler.validate();
}

namespace {

constexpr int kFixedN = 40;  // case 2
constexpr int kFixedP = 50;  // case 1

std::uint64_t case_id(StudyCase c) { return static_cast<std::uint64_t>(c) + 1; }

}  // namespace

ReplicateOutcome run_replicate(const StudyConfig& cfg, int grid_value, int replicate) {
    const Eigen::Index n = varies_n(cfg.study) ? grid_value : kFixedN;
    const Eigen::Index p = varies_n(cfg.study) ? kFixedP : grid_value;
    const TruthSpec truth =
        truth_magnitudes(cfg.study, p, derive_seed(cfg.master_seed, {case_id(cfg.study), 0x7275746855ULL,
                                                                     static_cast<std::uint64_t>(p)}),
                         cfg.magnitudes);
    const auto cell = static_cast<std::uint64_t>(grid_value);
    const auto rep = static_cast<std::uint64_t>(replicate);
    const Dataset raw = simulate_dataset(n, truth, derive_seed(cfg.master_seed, {case_id(cfg.study), cell, rep}));
    const StandardizedDataset data = standardize(raw, cfg.standardize);
    const Elicitation e = elicit_prior_set(data.inner.x, data.inner.y, cfg.correlation, cfg.prior_grid);

    SamplerConfig sc = cfg.sampler;
    sc.seed = derive_seed(cfg.master_seed, {case_id(cfg.study), 0x636861696eULL});
    SensitivityOptions so;
    so.replicate = (cell << 20) | rep;
    so.threads = 1;
    const SensitivityResult r = sensitivity_fit(data, cfg.prior, e.prior_set, sc, so);

    ReplicateOutcome out;
    out.grid_value = grid_value;
    out.replicate = replicate;
    out.beta_t_mean = r.beta_t_mean;
    out.beta_t_median = r.beta_t_median;
    out.beta_t_ci = r.beta_t_ci;
    out.covers = r.beta_t_ci.contains(truth.beta_t);
    out.prior_set = e.prior_set;
    const auto active = truth.active();
    for (Eigen::Index j = 0; j < p; ++j) {
        const bool truly = active[static_cast<std::size_t>(j)];
        truly ? ++out.true_active : ++out.true_inactive;
        switch (r.decisions[static_cast<std::size_t>(j)]) {
            case Decision::Select: truly ? ++out.correct : ++out.fp; break;
            case Decision::Reject: truly ? ++out.fn : ++out.correct; break;
            case Decision::Abstain: ++out.id; break;
        }
    }
    return out;
}

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double mse_of(const std::vector<double>& v, double truth) {
    double s = 0.0;
    for (double x : v) s += (x - truth) * (x - truth);
    return s / static_cast<double>(v.size());
}

}  // namespace

MetricsRow aggregate_cell(int grid_value, const std::vector<ReplicateOutcome>& reps, double beta_t_true,
                          const LossWeights& loss) {
    if (reps.empty()) throw Error(ErrorCode::EmptyInput, "no replicates to aggregate");
    MetricsRow row;
    row.grid_value = grid_value;
    std::vector<double> lo, hi;
    double covered = 0.0, fp = 0.0, fn = 0.0, id = 0.0, tp = 0.0, tn = 0.0;
    for (const auto& r : reps) {
        lo.push_back(r.beta_t_mean.lo);
        hi.push_back(r.beta_t_mean.hi);
        covered += r.covers ? 1.0 : 0.0;
        fp += r.fp;
        fn += r.fn;
        id += r.id;
        tp += r.true_active;
        tn += r.true_inactive;
    }
    const double m = static_cast<double>(reps.size());
    row.mean_lo = mean_of(lo);
    row.mean_hi = mean_of(hi);
    row.median_lo = quantile(lo, 0.5);
    row.median_hi = quantile(hi, 0.5);
    row.sd_lo = sd_of(lo);
    row.sd_hi = sd_of(hi);
    row.mse_lo = mse_of(lo, beta_t_true);
    row.mse_hi = mse_of(hi, beta_t_true);
    row.ci_pct = 100.0 * covered / m;
    row.fp = fp / m;
    row.fn = fn / m;
    row.id = id / m;
    const double p = (tp + tn) / m;
    row.loss = misspecification_loss(row.fp, row.fn, row.id, tn / m, tp / m, p, loss);
    return row;
}

StudyResult run_study(const StudyConfig& cfg) {
    cfg.validate();
    StudyResult result;
    result.config = cfg;
    const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
    const std::size_t cells = cfg.grid.size();
    std::vector<ReplicateOutcome> outcomes(cells * reps);
    parallel_for(outcomes.size(), resolve_threads(cfg.threads), [&](std::size_t k) {
        const std::size_t c = k / reps;
        const int r = static_cast<int>(k % reps);
        try {
            outcomes[k] = run_replicate(cfg, cfg.grid[c], r);
        } catch (const Error& e) {
            throw Error(e.code(), "study cell " + std::to_string(cfg.grid[c]) + ", replicate " + std::to_string(r) +
                                      ": " + e.what());
        }
    });
    const double beta_t_true = truth_magnitudes(cfg.study, 1, 0).beta_t;
    for (std::size_t c = 0; c < cells; ++c) {
        std::vector<ReplicateOutcome> cell(outcomes.begin() + static_cast<std::ptrdiff_t>(c * reps),
                                           outcomes.begin() + static_cast<std::ptrdiff_t>((c + 1) * reps));
        result.rows.push_back(aggregate_cell(cfg.grid[c], cell, beta_t_true, cfg.loss));
    }
    result.replicates = std::move(outcomes);
    return result;
}

namespace {

std::string grid_label(const StudyResult& r) { return varies_n(r.config.study) ? "n" : "p"; }

}  // namespace

void write_accuracy_csv(const StudyResult& r, std::ostream& out) {
    out << grid_label(r) << ",mean_lo,mean_hi,median_lo,median_hi\n" << std::setprecision(10);
    for (const auto& row : r.rows) {
        out << row.grid_value << ',' << row.mean_lo << ',' << row.mean_hi << ',' << row.median_lo << ','
            << row.median_hi << '\n';
    }
}

void write_dispersion_csv(const StudyResult& r, std::ostream& out) {
    out << grid_label(r) << ",sd_lo,sd_hi,mse_lo,mse_hi,ci_pct\n" << std::setprecision(10);
    for (const auto& row : r.rows) {
        out << row.grid_value << ',' << row.sd_lo << ',' << row.sd_hi << ',' << row.mse_lo << ',' << row.mse_hi << ','
            << row.ci_pct << '\n';
    }
}

void write_selection_csv(const StudyResult& r, std::ostream& out) {
    out << grid_label(r) << ",fp,fn,id,loss\n" << std::setprecision(10);
    for (const auto& row : r.rows) {
        out << row.grid_value << ',' << row.fp << ',' << row.fn << ',' << row.id << ',' << row.loss << '\n';
    }
}

namespace {

constexpr const char* kReplicateHeader =
    "grid_value,replicate,mean_lo,mean_hi,median_lo,median_hi,ci_lo,ci_hi,covers,fp,fn,id,correct,"
    "true_active,true_inactive,q_low,q_high";

}  // namespace

void write_replicates_csv(const std::vector<ReplicateOutcome>& reps, std::ostream& out) {
    out << kReplicateHeader << '\n' << std::setprecision(17);
    for (const auto& r : reps) {
        out << r.grid_value << ',' << r.replicate << ',' << r.beta_t_mean.lo << ',' << r.beta_t_mean.hi << ','
            << r.beta_t_median.lo << ',' << r.beta_t_median.hi << ',' << r.beta_t_ci.lo << ',' << r.beta_t_ci.hi << ','
            << (r.covers ? 1 : 0) << ',' << r.fp << ',' << r.fn << ',' << r.id << ',' << r.correct << ','
            << r.true_active << ',' << r.true_inactive << ',' << r.prior_set.q_low << ',' << r.prior_set.q_high
            << '\n';
    }
}

std::vector<ReplicateOutcome> read_replicates_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::BadData, "empty replicate file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kReplicateHeader) throw Error(ErrorCode::BadData, "unexpected replicate file header");
    std::vector<ReplicateOutcome> reps;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> v;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                v.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw Error(ErrorCode::BadData, "bad replicate cell '" + cell + "'");
            }
        }
        if (v.size() != 17) throw Error(ErrorCode::BadData, "replicate row has wrong width");
        ReplicateOutcome r;
        r.grid_value = static_cast<int>(v[0]);
        r.replicate = static_cast<int>(v[1]);
        r.beta_t_mean = {v[2], v[3]};
        r.beta_t_median = {v[4], v[5]};
        r.beta_t_ci = {v[6], v[7]};
        r.covers = v[8] != 0.0;
        r.fp = static_cast<int>(v[9]);
        r.fn = static_cast<int>(v[10]);
        r.id = static_cast<int>(v[11]);
        r.correct = static_cast<int>(v[12]);
        r.true_active = static_cast<int>(v[13]);
        r.true_inactive = static_cast<int>(v[14]);
        r.prior_set.q_low = v[15];
        r.prior_set.q_high = v[16];
        reps.push_back(r);
    }
    return reps;
}

void write_long_csv(const std::vector<ReplicateOutcome>& reps, std::ostream& out) {
    out << "grid_value,replicate,quantity,value\n" << std::setprecision(17);
    for (const auto& r : reps) {
        const std::pair<const char*, double> items[] = {
            {"mean_lo", r.beta_t_mean.lo},     {"mean_hi", r.beta_t_mean.hi},
            {"median_lo", r.beta_t_median.lo}, {"median_hi", r.beta_t_median.hi},
            {"ci_lo", r.beta_t_ci.lo},         {"ci_hi", r.beta_t_ci.hi},
            {"covers", r.covers ? 1.0 : 0.0},  {"fp", static_cast<double>(r.fp)},
            {"fn", static_cast<double>(r.fn)}, {"id", static_cast<double>(r.id)},
            {"q_low", r.prior_set.q_low},      {"q_high", r.prior_set.q_high},
        };
        for (const auto& [name, value] : items) {
            out << r.grid_value << ',' << r.replicate << ',' << name << ',' << value << '\n';
        }
    }
}

}  // namespace rbce
