#include "cli.hpp"

#include "rbce/dss.hpp"
#include "rbce/error.hpp"
#include "rbce/parallel.hpp"
#include "rbce/refit.hpp"
#include "rbce/report.hpp"
#include "rbce/robust.hpp"
#include "rbce/simbench.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

namespace rbce::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Outputs are rendered in memory and only written once a command has fully
// succeeded, so a failure never leaves a partial artifact behind.
struct Artifacts {
    std::vector<std::pair<std::string, std::string>> files;

    void add(std::string path, std::string content) { files.emplace_back(std::move(path), std::move(content)); }

    void commit() const {
        std::vector<std::string> staged;
        auto unstage = [&] {
            for (const auto& s : staged) std::remove(s.c_str());
        };
        for (const auto& [path, content] : files) {
            const std::string tmp = path + ".partial";
            std::ofstream f(tmp, std::ios::binary);
            f << content;
            f.close();
            if (!f) {
                std::remove(tmp.c_str());
                unstage();
                throw Error(ErrorCode::BadConfig, "cannot write '" + path + "'");
            }
            staged.push_back(tmp);
        }
        for (std::size_t i = 0; i < files.size(); ++i) fs::rename(staged[i], files[i].first);
    }
};

struct SamplerFlags {
    int burn_in = 500;
    int samples = 2500;
    int thin = 1;
    std::uint64_t seed = 0;

    void attach(CLI::App* app) {
        app->add_option("--burn-in", burn_in, "Discarded iterations per chain")->capture_default_str();
        app->add_option("--samples", samples, "Retained draws per chain")->capture_default_str();
        app->add_option("--thin", thin, "Keep every k-th draw")->capture_default_str();
        app->add_option("--seed", seed, "Master seed")->capture_default_str();
    }

    SamplerConfig config() const {
        SamplerConfig c;
        c.burn_in = burn_in;
        c.samples = samples;
        c.thin = thin;
        c.seed = seed;
        return c;
    }
};

struct PriorFlags {
    HierarchicalPrior prior;

    void attach(CLI::App* app) {
        app->add_option("--tau0", prior.tau0, "Spike standard deviation")->capture_default_str();
        app->add_option("--tau1", prior.tau1, "Slab standard deviation")->capture_default_str();
        app->add_option("--a", prior.a, "Gamma shape of the noise precision")->capture_default_str();
        app->add_option("--b", prior.b, "Gamma rate of the noise precision")->capture_default_str();
        app->add_option("--s", prior.s, "Beta prior concentration")->capture_default_str();
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::BadData, "cannot open '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

SensitivityResult load_sensitivity(const std::string& path) {
    std::istringstream in(read_file(path));
    return read_sensitivity_json(in);
}

StandardizedDataset load_data(const std::string& path) { return standardize(read_dataset_csv(path)); }

/// One CSV for all grid points, with a leading q column.
std::string combined_draws(const PriorSet& set, const std::vector<PosteriorDraws>& draws) {
    std::ostringstream out;
    out << std::setprecision(17);
    for (std::size_t g = 0; g < draws.size(); ++g) {
        std::ostringstream one;
        write_draws_csv(draws[g], one);
        std::istringstream lines(one.str());
        std::string line;
        std::getline(lines, line);
        if (g == 0) out << "q," << line << '\n';
        while (std::getline(lines, line)) out << set.grid[g] << ',' << line << '\n';
    }
    return out.str();
}

IndexSet to_zero_based(const std::vector<long>& one_based, const char* what) {
    IndexSet out;
    for (long j : one_based) {
        if (j < 1) throw Error(ErrorCode::BadConfig, std::string(what) + " indices are 1-based");
        out.push_back(static_cast<Eigen::Index>(j - 1));
    }
    return out;
}

std::string csv_of(const std::function<void(std::ostream&)>& write) {
    std::ostringstream s;
    write(s);
    return s.str();
}

// --config file handling: keys mirror long flag names; a nested object named
// after the subcommand overrides top-level keys; explicit flags win.
std::vector<std::string> config_arguments(const std::string& path, const std::string& command,
                                          const std::vector<std::string>& given) {
    json cfg;
    try {
        cfg = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadConfig, "config file '" + path + "': " + e.what());
    }
    if (!cfg.is_object()) throw Error(ErrorCode::BadConfig, "config file must hold a JSON object");
    std::map<std::string, json> merged;
    for (const auto& [k, v] : cfg.items()) {
        if (!v.is_object()) merged[k] = v;
    }
    if (cfg.contains(command) && cfg[command].is_object()) {
        for (const auto& [k, v] : cfg[command].items()) merged[k] = v;
    }
    auto given_flag = [&](const std::string& flag) {
        return std::any_of(given.begin(), given.end(),
                           [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    };
    std::vector<std::string> out;
    for (const auto& [key, value] : merged) {
        const std::string flag = "--" + key;
        if (key == "config" || given_flag(flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) out.push_back(flag);
            continue;
        }
        out.push_back(flag);
        auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
        if (value.is_array()) {
            std::string joined;
            for (const auto& v : value) joined += (joined.empty() ? "" : ",") + scalar(v);
            out.push_back(joined);
        } else {
            out.push_back(scalar(value));
        }
    }
    return out;
}

std::vector<std::string> with_config(const std::vector<std::string>& args) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (!path) return args;
    const auto cmd = std::find_if(args.begin(), args.end(), [](const std::string& a) {
        return a == "fit" || a == "dss" || a == "refit" || a == "simulate" || a == "report";
    });
    if (cmd == args.end()) return args;
    std::vector<std::string> out(args.begin(), cmd + 1);
    const auto extra = config_arguments(*path, *cmd, args);
    out.insert(out.end(), extra.begin(), extra.end());
    out.insert(out.end(), cmd + 1, args.end());
    return out;
}

int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::BadConfig:
            return kBadConfig;
        case ErrorCode::BadData:
        case ErrorCode::ConstantColumn:
        case ErrorCode::NonFiniteInput:
        case ErrorCode::EmptyInput:
            return kBadData;
        case ErrorCode::NumericalFailure:
        case ErrorCode::Degenerate:
        case ErrorCode::DivisionByZero:
        case ErrorCode::NonConvergence:
        case ErrorCode::EmptyPath:
        case ErrorCode::GridTooCoarse:
            return kNumericalFailure;
    }
    return kUnexpected;
}

std::string category_for(int code) {
    switch (code) {
        case kBadConfig: return "BadConfig";
        case kBadData: return "BadData";
        case kNumericalFailure: return "NumericalFailure";
        default: return "Unexpected";
    }
}

void error_line(std::ostream& err, int code, std::string_view detail, const std::string& message) {
    err << nlohmann::ordered_json{{"error", category_for(code)}, {"code", code}, {"detail", detail}, {"message", message}}.dump()
        << '\n';
}

}  // namespace

int execute(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Robust Bayesian causal-effect estimation with cautious variable selection", "rbce"};
    app.require_subcommand(1);
    app.fallthrough();  // --config and --threads may follow the subcommand
    std::string config_path;
    app.add_option("--config", config_path, "JSON file whose keys mirror the long flags")->check(CLI::ExistingFile);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: RBCE_THREADS, else all cores)");

    Artifacts artifacts;
    std::function<void()> action;

    // fit
    auto* fit = app.add_subcommand("fit", "Sensitivity analysis over the prior set");
    std::string fit_data, fit_out, fit_draws;
    double c_low = 0.15, c_high = 0.35;
    std::optional<double> q_low, q_high;
    int grid = 11;
    SamplerFlags fit_sampler;
    PriorFlags fit_prior;
    fit->add_option("--data", fit_data, "Data CSV (y,t,predictors...)")->required();
    fit->add_option("--out", fit_out, "Sensitivity report (JSON)")->required();
    fit->add_option("--draws", fit_draws, "Optional draw dump for every grid point (CSV)");
    fit->add_option("--c-low", c_low, "Lower marginal-correlation threshold")->capture_default_str();
    fit->add_option("--c-high", c_high, "Upper marginal-correlation threshold")->capture_default_str();
    fit->add_option("--q-low", q_low, "Explicit lower prior inclusion mean (skips elicitation)");
    fit->add_option("--q-high", q_high, "Explicit upper prior inclusion mean");
    fit->add_option("--grid", grid, "Grid points over the prior set")->capture_default_str();
    fit_sampler.attach(fit);
    fit_prior.attach(fit);
    fit->callback([&] {
        action = [&] {
            const StandardizedDataset data = load_data(fit_data);
            std::vector<std::string> notes;
            PriorSet set;
            if (q_low || q_high) {
                if (!q_low || !q_high) throw Error(ErrorCode::BadConfig, "--q-low and --q-high go together");
                set = PriorSet::make(*q_low, *q_high, grid);
            } else {
                Elicitation e = elicit_prior_set(data.inner.x, data.inner.y, {c_low, c_high}, grid);
                set = e.prior_set;
                if (e.warning) notes.push_back(*e.warning);
            }
            std::vector<PosteriorDraws> draws;
            SensitivityOptions so;
            so.threads = resolve_threads(threads);
            if (!fit_draws.empty()) so.keep_draws = &draws;
            SensitivityResult r = sensitivity_fit(data, fit_prior.prior, set, fit_sampler.config(), so);
            r.warnings.insert(r.warnings.begin(), notes.begin(), notes.end());
            artifacts.add(fit_out, csv_of([&](std::ostream& o) { write_sensitivity_json(r, o); }));
            if (!fit_draws.empty()) artifacts.add(fit_draws, combined_draws(set, draws));
            std::size_t sel = 0, rej = 0, abst = 0;
            for (auto d : r.decisions) (d == Decision::Select ? sel : d == Decision::Reject ? rej : abst)++;
            out << "q in [" << set.q_low << ", " << set.q_high << "], " << set.grid.size() << " grid points\n"
                << "beta_T posterior mean in [" << r.beta_t_mean.lo << ", " << r.beta_t_mean.hi << "], 95% CI ["
                << r.beta_t_ci.lo << ", " << r.beta_t_ci.hi << "]\n"
                << "select " << sel << ", reject " << rej << ", abstain " << abst << '\n';
            for (const auto& w : r.warnings) out << "warning: " << w << '\n';
        };
    });

    // dss
    auto* dss = app.add_subcommand("dss", "Sparsify the per-prior posterior-mean fits");
    std::string dss_sens, dss_data, dss_out;
    DssOptions dss_opts;
    dss->add_option("--sensitivity", dss_sens, "Report written by fit")->required();
    dss->add_option("--data", dss_data, "The data CSV the report was fitted on")->required();
    dss->add_option("--out", dss_out, "DSS coefficients (CSV)")->required();
    dss->add_option("--rho", dss_opts.rho, "Tolerated loss of explained variation")->capture_default_str();
    dss->callback([&] {
        action = [&] {
            const SensitivityResult sens = load_sensitivity(dss_sens);
            const DssResult r = dss_summarize(sens, load_data(dss_data), dss_opts);
            artifacts.add(dss_out, csv_of([&](std::ostream& o) { write_dss_csv(r, o); }));
            out << "surely selected: " << r.sets.s_lower.size() << ", not surely removed: " << r.sets.s_star.size()
                << '\n';
        };
    });

    // refit
    auto* rf = app.add_subcommand("refit", "Slab-only refit on a chosen variable set");
    std::string rf_data, rf_out, rf_sens;
    std::vector<long> keep_beta, keep_gamma;
    SamplerFlags rf_sampler;
    PriorFlags rf_prior;
    rf->add_option("--data", rf_data, "Data CSV")->required();
    rf->add_option("--out", rf_out, "Draws (CSV)")->required();
    rf->add_option("--keep-beta", keep_beta, "1-based predictors kept in the outcome equation")->delimiter(',');
    rf->add_option("--keep-gamma", keep_gamma, "1-based predictors kept in the treatment equation")->delimiter(',');
    rf->add_option("--sensitivity", rf_sens, "Keep the surely selected set of this report on both sides");
    rf_sampler.attach(rf);
    rf_prior.attach(rf);
    rf->callback([&] {
        action = [&] {
            const StandardizedDataset data = load_data(rf_data);
            RefitSpec spec;
            if (!rf_sens.empty()) {
                if (!keep_beta.empty() || !keep_gamma.empty()) {
                    throw Error(ErrorCode::BadConfig, "use either --sensitivity or explicit --keep lists");
                }
                const SensitivityResult sens = load_sensitivity(rf_sens);
                if (static_cast<Eigen::Index>(sens.inclusion.size()) != data.inner.p()) {
                    throw Error(ErrorCode::BadData, "sensitivity report does not match the data");
                }
                spec.keep_beta = spec.keep_gamma = IndexSet(sens.s_lower.begin(), sens.s_lower.end());
            } else {
                spec.keep_beta = to_zero_based(keep_beta, "--keep-beta");
                spec.keep_gamma = to_zero_based(keep_gamma, "--keep-gamma");
            }
            const PosteriorDraws d = refit(data, spec, rf_prior.prior, rf_sampler.config());
            artifacts.add(rf_out, csv_of([&](std::ostream& o) { write_draws_csv(d, o); }));
            const Eigen::VectorXd bt = d.beta_t();
            out << "beta_T posterior mean " << bt.mean() << " over " << bt.size() << " draws\n";
            for (const auto& w : d.warnings) out << "warning: " << w << '\n';
        };
    });

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run a simulation study");
    std::string sim_case = "1a", sim_dir = ".", sim_prefix, magnitudes = "alternating";
    std::vector<int> sim_grid;
    StudyConfig study;
    sim->add_option("--case", sim_case, "Study case: 1a, 1b, 2a or 2b")->capture_default_str();
    sim->add_option("--grid", sim_grid, "n values (case 1) or p values (case 2)")->delimiter(',');
    sim->add_option("--replicates", study.replicates, "Replicates per grid value")->capture_default_str();
    sim->add_option("--seed", study.master_seed, "Master seed")->capture_default_str();
    sim->add_option("--c-low", study.correlation.lo, "Lower correlation threshold")->capture_default_str();
    sim->add_option("--c-high", study.correlation.hi, "Upper correlation threshold")->capture_default_str();
    sim->add_option("--prior-grid", study.prior_grid, "Grid points over the prior set")->capture_default_str();
    sim->add_option("--burn-in", study.sampler.burn_in, "Discarded iterations per chain")->capture_default_str();
    sim->add_option("--samples", study.sampler.samples, "Retained draws per chain")->capture_default_str();
    sim->add_option("--magnitudes", magnitudes, "Nonzero truth: alternating or uniform")
        ->check(CLI::IsMember({"alternating", "uniform"}))
        ->capture_default_str();
    sim->add_option("--out-dir", sim_dir, "Directory for the study CSVs")->capture_default_str();
    sim->add_option("--prefix", sim_prefix, "File name prefix");
    sim->callback([&] {
        action = [&] {
            study.study = parse_study_case(sim_case);
            study.grid = sim_grid.empty() ? StudyConfig::default_grid() : sim_grid;
            study.magnitudes = magnitudes == "uniform" ? MagnitudeMode::Uniform : MagnitudeMode::Alternating;
            study.threads = resolve_threads(threads);
            if (!fs::is_directory(sim_dir)) throw Error(ErrorCode::BadConfig, "no such directory '" + sim_dir + "'");
            const StudyResult r = run_study(study);
            const fs::path base(sim_dir);
            auto path = [&](const char* name) { return (base / (sim_prefix + name)).string(); };
            artifacts.add(path("accuracy.csv"), csv_of([&](std::ostream& o) { write_accuracy_csv(r, o); }));
            artifacts.add(path("dispersion.csv"), csv_of([&](std::ostream& o) { write_dispersion_csv(r, o); }));
            artifacts.add(path("selection.csv"), csv_of([&](std::ostream& o) { write_selection_csv(r, o); }));
            artifacts.add(path("replicates.csv"),
                          csv_of([&](std::ostream& o) { write_replicates_csv(r.replicates, o); }));
            out << "case " << to_string(study.study) << ": " << r.rows.size() << " cells x " << study.replicates
                << " replicates\n";
        };
    });

    // report
    auto* rep = app.add_subcommand("report", "Merge replicate files into one long CSV for plotting");
    std::vector<std::string> rep_inputs;
    std::string rep_out;
    rep->add_option("--replicates", rep_inputs, "replicates.csv files written by simulate")->required();
    rep->add_option("--out", rep_out, "Long-format CSV")->required();
    rep->callback([&] {
        action = [&] {
            std::vector<ReplicateOutcome> all;
            for (const auto& path : rep_inputs) {
                std::istringstream in(read_file(path));
                auto reps = read_replicates_csv(in);
                all.insert(all.end(), reps.begin(), reps.end());
            }
            artifacts.add(rep_out, csv_of([&](std::ostream& o) { write_long_csv(all, o); }));
            out << all.size() << " replicate rows\n";
        };
    });

    try {
        std::vector<std::string> args = with_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
        action();
        artifacts.commit();
        return kOk;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        error_line(err, kBadConfig, "UsageError", e.what());
        return kBadConfig;
    } catch (const Error& e) {
        const int code = exit_code_for(e.code());
        error_line(err, code, to_string(e.code()), e.what());
        return code;
    } catch (const std::exception& e) {
        error_line(err, kUnexpected, "Unexpected", e.what());
        return kUnexpected;
    }
}

}  // namespace rbce::cli
