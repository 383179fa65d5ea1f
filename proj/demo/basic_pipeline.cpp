// End-to-end walk through the library on a small simulated data set:
// simulate, hold out a validation set, tune M for one alpha, then compare
// the tuned personalized model with the global model by bootstrap.

#include <cstdio>
#include <iostream>

#include "ppm/ppm.hpp"

int main(int argc, char** argv)
{
    const std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 42;
    ppm::set_log_level(ppm::LogLevel::quiet);

    const auto id = ppm::parse_scenario_id("linear-20-moderate");
    const ppm::Dataset data = ppm::scenario(id, 1000, 1000, seed);
    std::printf("scenario %s: %zu rows, %zu predictors\n", id.str().c_str(), data.rows(), data.cols());

    const auto split = ppm::split_holdout(data, 0.2, ppm::derive_seed(seed, {ppm::stream::holdout}));

    ppm::TuningConfig tcfg;
    tcfg.K = 3;
    tcfg.v = 1;
    tcfg.grid_size = 4;
    tcfg.seed = seed;
    const auto spec = ppm::parse_loss_spec("ici+spread", 0.5);
    const ppm::TuningResult tuned = ppm::tune_m(split.trte, spec, tcfg);

    std::printf("\n%-8s %-8s %-10s %-10s\n", "M", "m_prop", "mean_loss", "sd_loss");
    for (const auto& row : tuned.loss_by_m) {
        const double prop = static_cast<double>(row.M) / static_cast<double>(tuned.n_train_per_fold);
        std::printf("%-8zu %-8.3f %-10.4f %-10.4f\n", row.M, prop, row.mean_loss, row.sd_loss);
    }
    std::printf("selected M = %zu (proportion %.3f)\n", tuned.m_opt, tuned.m_prop_opt);

    ppm::ValidationConfig vcfg;
    vcfg.B = 200;
    vcfg.jackknife = false;
    const auto boot_seed = ppm::derive_seed(seed, {ppm::stream::bootstrap});
    const auto ppm_run = ppm::bootstrap_validate(split.validation, tuned.m_prop_opt, vcfg, boot_seed);
    const auto full_run = ppm::bootstrap_validate(split.validation, 1.0, vcfg, boot_seed);

    std::printf("\nvalidation fits: M = %zu (personalized) and %zu (global) training rows\n", ppm_run.M_point,
                full_run.M_point);
    std::printf("\n%-18s %-28s %-28s\n", "measure", "personalized", "global");
    for (ppm::Measure m : ppm::all_measures) {
        auto cell = [&](const ppm::BootstrapRun& run) {
            const auto& s = run.summary(m);
            char buf[64];
            if (s.point && s.interval)
                std::snprintf(buf, sizeof buf, "%.3f [%.3f, %.3f]", *s.point, s.interval->lower, s.interval->upper);
            else
                std::snprintf(buf, sizeof buf, "NA");
            return std::string(buf);
        };
        std::printf("%-18s %-28s %-28s\n", std::string(ppm::measure_name(m)).c_str(), cell(ppm_run).c_str(),
                    cell(full_run).c_str());
    }
    for (const auto* run : {&ppm_run, &full_run})
        for (ppm::Measure m : ppm::all_measures)
            if (!run->summary(m).note.empty())
                std::printf("note (%s, %s): %s\n", run == &ppm_run ? "personalized" : "global",
                            std::string(ppm::measure_name(m)).c_str(), run->summary(m).note.c_str());
    return 0;
}
