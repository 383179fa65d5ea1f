#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ppm/ppm.hpp"

namespace fs = std::filesystem;

namespace {

struct GridOptions {
    double lower = 0.2;
    std::optional<double> upper;
    int size = 11;
    std::optional<double> step;
    std::vector<std::size_t> explicit_m;
    std::optional<std::size_t> random_subset;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--grid-lower", lower, "Smallest M as a fraction of the per-fold training size")
            ->capture_default_str();
        cmd->add_option("--grid-upper", upper, "Largest M fraction (default 0.5 for alpha <= 0.5, else 0.7)");
        cmd->add_option("--grid-size", size, "Number of equally spaced grid points")->capture_default_str();
        cmd->add_option("--grid-step", step, "Spacing of grid points as a fraction (overrides --grid-size)");
        cmd->add_option("--grid-m", explicit_m, "Explicit list of M values (overrides the fraction grid)");
        cmd->add_option("--grid-subset", random_subset, "Evaluate a seeded random subset of this many grid points");
    }

    void apply(ppm::TuningConfig& cfg) const
    {
        cfg.grid_lower_frac = lower;
        cfg.grid_upper_frac = upper;
        cfg.grid_size = size;
        cfg.grid_step_frac = step;
        cfg.explicit_grid = explicit_m;
        cfg.random_subset = random_subset;
    }
};

struct CvOptions {
    int K = 10;
    int v = 20;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--K", K, "Number of folds")->capture_default_str();
        cmd->add_option("--v", v, "Number of repeats of K-fold cross-validation")->capture_default_str();
    }
};

struct DataOptions {
    std::string path;
    std::string outcome = "y";

    void add(CLI::App* cmd)
    {
        cmd->add_option("--data", path, "Input CSV (header row, outcome coded 0/1)")->required();
        cmd->add_option("--outcome", outcome, "Name of the outcome column")->capture_default_str();
    }

    ppm::Dataset load() const { return ppm::load_csv(path, outcome); }
};

void ensure_dir(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw ppm::DataError(dir + ": cannot create output directory: " + ec.message());
}

std::string join(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

void write_manifest(const CLI::App* cmd, const std::string& path)
{
    std::ostringstream out;
    out << "# ppm " << cmd->get_name() << "; rerun with: ppm --config <this file>\n";
    out << "[" << cmd->get_name() << "]\n";
    // Unset optional values come out as "" and would read back as zero.
    std::istringstream body(cmd->config_to_str(true, false));
    for (std::string line; std::getline(body, line);)
        if (!line.ends_with("=\"\"") && !line.ends_with("=[]"))
            out << line << '\n';
    ppm::write_text(path, out.str());
}

template <class Fn>
std::string render(Fn&& fn)
{
    std::ostringstream out;
    fn(out);
    return out.str();
}

std::string dump(const ppm::Json& j) { return j.dump(2) + "\n"; }

ppm::Dataset standardized(const ppm::Dataset& d) { return d.standardized ? d : ppm::standardize(d); }

int exit_with(const char* kind, const std::string& msg, int code)
{
    ppm::Json err = {{"error", kind}, {"message", msg}, {"exit_code", code}};
    std::cerr << err.dump() << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Personalized predictive models: similarity-based subpopulation fitting, tuning and validation"};
    app.require_subcommand(1);
    app.fallthrough();

    unsigned threads = 0;
    bool quiet = false, verbose = false;
    app.add_option("--threads", threads, "Worker threads (0 = all available cores)")->capture_default_str();
    app.add_flag("--quiet", quiet, "Suppress warnings");
    app.add_flag("--verbose", verbose, "Progress messages");
    app.set_config("--config", "", "Read options from a TOML file, e.g. a manifest written by an earlier run");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate a two-cluster simulated dataset");
    sim->configurable();
    std::string sim_scenario, sim_out, sim_library;
    std::size_t sim_n = 10000;
    std::optional<std::size_t> sim_n1, sim_n2;
    std::uint64_t sim_seed = 1;
    sim->add_option("--scenario", sim_scenario, "Scenario id, e.g. linear-20-moderate")->required();
    sim->add_option("--n", sim_n, "Total rows, split evenly between the clusters")->capture_default_str();
    sim->add_option("--n1", sim_n1, "Rows in cluster 1 (overrides --n)");
    sim->add_option("--n2", sim_n2, "Rows in cluster 2 (overrides --n)");
    sim->add_option("--seed", sim_seed, "Master seed")->capture_default_str();
    sim->add_option("--library", sim_library, "Alternative scenario library JSON");
    sim->add_option("--out", sim_out, "Output CSV path")->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Cross-validated performance measures as a function of M");
    sweep->configurable();
    DataOptions sweep_data;
    CvOptions sweep_cv;
    GridOptions sweep_grid;
    std::vector<std::string> sweep_measures;
    std::uint64_t sweep_seed = 1;
    double sweep_span = ppm::default_loess_span;
    std::string sweep_out;
    bool sweep_svg = false;
    sweep_data.add(sweep);
    sweep_cv.add(sweep);
    sweep_grid.add(sweep);
    sweep->add_option("--measures", sweep_measures, "Measures to evaluate (default: all)");
    sweep->add_option("--seed", sweep_seed, "Master seed")->capture_default_str();
    sweep->add_option("--span", sweep_span, "LOESS span for ICI")->capture_default_str();
    sweep->add_option("--out", sweep_out, "Output directory")->required();
    sweep->add_flag("--svg", sweep_svg, "Also write sweep.svg");

    // tune
    auto* tune = app.add_subcommand("tune", "Choose M by minimizing a mixture loss under repeated K-fold CV");
    tune->configurable();
    DataOptions tune_data;
    CvOptions tune_cv;
    GridOptions tune_grid;
    std::string tune_loss = "ici+spread";
    std::vector<double> tune_alphas{0.5};
    std::uint64_t tune_seed = 1;
    double tune_span = ppm::default_loess_span;
    std::string tune_out;
    bool tune_svg = false;
    tune_data.add(tune);
    tune_cv.add(tune);
    tune_grid.add(tune);
    tune->add_option("--loss", tune_loss, "Mixture loss C+D, C in {ici, cal}, D in {spread, auprc, auroc}")
        ->capture_default_str();
    tune->add_option("--alpha", tune_alphas, "Calibration weight(s) in [0, 1]")->capture_default_str();
    tune->add_option("--seed", tune_seed, "Master seed")->capture_default_str();
    tune->add_option("--span", tune_span, "LOESS span for ICI")->capture_default_str();
    tune->add_option("--out", tune_out, "Output directory")->required();
    tune->add_flag("--svg", tune_svg, "Also write tuning.svg");

    // validate
    auto* val = app.add_subcommand("validate", "Bootstrap validation of an M proportion on a hold-out set");
    val->configurable();
    DataOptions val_data;
    double val_m_prop = 1.0;
    ppm::ValidationConfig val_cfg;
    std::uint64_t val_seed = 1;
    bool val_no_jack = false;
    std::string val_out;
    val_data.add(val);
    val->add_option("--m-prop", val_m_prop, "Subpopulation size as a proportion of the training rows")
        ->capture_default_str();
    val->add_option("--B", val_cfg.B, "Bootstrap replicates")->capture_default_str();
    val->add_option("--train-frac", val_cfg.train_frac, "Training share of each resample")->capture_default_str();
    val->add_option("--level", val_cfg.level, "Confidence level")->capture_default_str();
    val->add_option("--span", val_cfg.loess_span, "LOESS span for ICI")->capture_default_str();
    val->add_option("--seed", val_seed, "Master seed")->capture_default_str();
    val->add_flag("--no-jackknife", val_no_jack, "Fix the BCa acceleration at 0");
    val->add_option("--out", val_out, "Output directory")->required();

    // study
    auto* study = app.add_subcommand("study", "Repeated hold-out study: tune per alpha, then validate");
    study->configurable();
    DataOptions study_data;
    CvOptions study_cv;
    GridOptions study_grid;
    ppm::StudyConfig study_cfg;
    std::string study_loss = "ici+spread";
    std::string study_standardize = "trte";
    std::string study_out;
    bool study_no_jack = false;
    study_data.add(study);
    study_cv.add(study);
    study_grid.add(study);
    study->add_option("--loss", study_loss, "Mixture loss C+D")->capture_default_str();
    study->add_option("--alpha", study_cfg.alphas, "Calibration weights")->capture_default_str();
    study->add_option("--Z", study_cfg.Z, "Number of hold-out repeats")->capture_default_str();
    study->add_option("--q", study_cfg.q, "Hold-out (validation) proportion")->capture_default_str();
    study->add_option("--B", study_cfg.validation.B, "Bootstrap replicates")->capture_default_str();
    study->add_option("--train-frac", study_cfg.validation.train_frac, "Training share of each resample")
        ->capture_default_str();
    study->add_option("--level", study_cfg.validation.level, "Confidence level")->capture_default_str();
    study->add_option("--span", study_cfg.spec_template.loess_span, "LOESS span for ICI")->capture_default_str();
    study->add_option("--seed", study_cfg.seed, "Master seed")->capture_default_str();
    study->add_option("--standardize", study_standardize,
                      "full: scale the whole dataset once; trte: scale on TrTe, apply (clamped) to hold-out")
        ->check(CLI::IsMember({"full", "trte"}))
        ->capture_default_str();
    study->add_flag("--no-jackknife", study_no_jack, "Fix the BCa acceleration at 0");
    study->add_option("--out", study_out, "Output directory")->required();

    // report
    auto* rep = app.add_subcommand("report", "Print or convert a study.json");
    rep->configurable();
    std::string rep_in, rep_format = "text", rep_out;
    rep->add_option("--study", rep_in, "study.json written by `ppm study`")->required();
    rep->add_option("--format", rep_format, "text, table (wide CSV) or long (CSV)")
        ->check(CLI::IsMember({"text", "table", "long"}))
        ->capture_default_str();
    rep->add_option("--out", rep_out, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return exit_with("config", e.what(), 2);
    }

    ppm::set_log_level(quiet ? ppm::LogLevel::quiet : verbose ? ppm::LogLevel::info : ppm::LogLevel::warning);

    try {
        if (*sim) {
            const auto id = ppm::parse_scenario_id(sim_scenario);
            const std::size_t n1 = sim_n1.value_or((sim_n + 1) / 2);
            const std::size_t n2 = sim_n2.value_or(sim_n / 2);
            const ppm::Dataset d =
                sim_library.empty() ? ppm::scenario(id, n1, n2, sim_seed)
                                    : ppm::scenario(id, n1, n2, sim_seed, ppm::ScenarioLibrary::load(sim_library));
            ppm::write_csv(d, sim_out);
            write_manifest(sim, sim_out + ".manifest.toml");
            std::cout << "wrote " << sim_out << " (" << d.rows() << " rows, prevalence "
                      << ppm::format_double(d.prevalence()) << ")\n";
        } else if (*sweep) {
            const ppm::Dataset d = standardized(sweep_data.load());
            ppm::TuningConfig cfg;
            cfg.K = sweep_cv.K;
            cfg.v = sweep_cv.v;
            cfg.seed = sweep_seed;
            cfg.threads = threads;
            sweep_grid.apply(cfg);
            if (!cfg.grid_upper_frac)
                cfg.grid_upper_frac = 0.7;
            ppm::validate_tuning_config(cfg);
            std::vector<ppm::Measure> measures;
            for (const auto& m : sweep_measures)
                measures.push_back(ppm::parse_measure(m));
            if (measures.empty())
                measures.assign(ppm::all_measures.begin(), ppm::all_measures.end());
            const std::size_t n_train = ppm::per_fold_train_size(d.rows(), cfg.K);
            const auto lat = ppm::cv_prediction_lattice(d, ppm::build_grid(n_train, cfg, 1.0), cfg);
            const auto rows = ppm::sweep_measures(lat, measures, sweep_span);
            ensure_dir(sweep_out);
            ppm::write_text(join(sweep_out, "sweep.csv"), render([&](std::ostream& o) { ppm::write_sweep_csv(o, rows); }));
            if (sweep_svg)
                ppm::write_text(join(sweep_out, "sweep.svg"), ppm::sweep_svg(rows, n_train));
            write_manifest(sweep, join(sweep_out, "manifest.toml"));
            std::cout << "wrote " << join(sweep_out, "sweep.csv") << "\n";
        } else if (*tune) {
            const ppm::Dataset d = standardized(tune_data.load());
            ppm::TuningConfig cfg;
            cfg.K = tune_cv.K;
            cfg.v = tune_cv.v;
            cfg.seed = tune_seed;
            cfg.threads = threads;
            tune_grid.apply(cfg);
            const auto spec = ppm::parse_loss_spec(tune_loss, 0.5, tune_span);
            const auto results = ppm::tune_alphas(d, spec, tune_alphas, cfg);
            ppm::Json j = ppm::Json::array();
            for (const auto& r : results)
                j.push_back(ppm::to_json(r));
            ensure_dir(tune_out);
            ppm::write_text(join(tune_out, "tuning.json"), dump(j));
            ppm::write_text(join(tune_out, "tuning.csv"),
                            render([&](std::ostream& o) { ppm::write_tuning_csv(o, results); }));
            if (tune_svg)
                ppm::write_text(join(tune_out, "tuning.svg"), ppm::tuning_svg(results));
            write_manifest(tune, join(tune_out, "manifest.toml"));
            for (const auto& r : results)
                std::cout << "alpha=" << ppm::format_double(r.alpha) << " M_opt=" << r.m_opt
                          << " m_prop_opt=" << ppm::format_double(r.m_prop_opt) << "\n";
        } else if (*val) {
            const ppm::Dataset d = standardized(val_data.load());
            val_cfg.threads = threads;
            val_cfg.jackknife = !val_no_jack;
            const auto run = ppm::bootstrap_validate(d, val_m_prop, val_cfg, val_seed);
            for (const auto& w : run.warnings)
                ppm::log_warning(w);
            ensure_dir(val_out);
            ppm::write_text(join(val_out, "validation.json"), dump(ppm::to_json(run)));
            ppm::write_text(join(val_out, "validation.csv"),
                            render([&](std::ostream& o) { ppm::write_bootstrap_csv(o, run); }));
            write_manifest(val, join(val_out, "manifest.toml"));
            std::cout << "wrote " << join(val_out, "validation.json") << "\n";
        } else if (*study) {
            const ppm::Dataset d = study_data.load();
            study_cfg.spec_template = ppm::parse_loss_spec(study_loss, 0.5, study_cfg.spec_template.loess_span);
            study_cfg.validation.loess_span = study_cfg.spec_template.loess_span;
            study_cfg.validation.threads = threads;
            study_cfg.validation.jackknife = !study_no_jack;
            study_cfg.tuning.K = study_cv.K;
            study_cfg.tuning.v = study_cv.v;
            study_cfg.tuning.threads = threads;
            study_grid.apply(study_cfg.tuning);
            study_cfg.standardize = study_standardize == "full" ? ppm::StandardizeMode::full : ppm::StandardizeMode::trte;
            const auto report = ppm::run_study(d, study_cfg);
            std::set<std::string> seen;
            for (const auto& row : report.rows)
                for (const auto& note : row.notes)
                    if (seen.insert("z=" + std::to_string(row.z) + ": " + note).second)
                        ppm::log_warning("z=" + std::to_string(row.z) + ": " + note);
            const ppm::Json j = ppm::to_json(report);
            ensure_dir(study_out);
            ppm::write_text(join(study_out, "study.json"), dump(j));
            ppm::write_text(join(study_out, "study_long.csv"),
                            render([&](std::ostream& o) { ppm::write_study_long_csv(o, j); }));
            ppm::write_text(join(study_out, "study_table.csv"),
                            render([&](std::ostream& o) { ppm::write_study_table_csv(o, j); }));
            write_manifest(study, join(study_out, "manifest.toml"));
            std::cout << "wrote " << report.rows.size() << " rows to " << join(study_out, "study_table.csv") << "\n";
        } else if (*rep) {
            const ppm::Json j = ppm::read_json(rep_in);
            std::string text;
            if (rep_format == "table")
                text = render([&](std::ostream& o) { ppm::write_study_table_csv(o, j); });
            else if (rep_format == "long")
                text = render([&](std::ostream& o) { ppm::write_study_long_csv(o, j); });
            else
                text = ppm::study_text_table(j);
            if (rep_out.empty())
                std::cout << text;
            else
                ppm::write_text(rep_out, text);
        }
    } catch (const ppm::ConfigError& e) {
        return exit_with("config", e.what(), 2);
    } catch (const std::exception& e) {
        return exit_with("runtime", e.what(), 1);
    }
    return 0;
}
