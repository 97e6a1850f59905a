#include <CLI11.hpp>

#include <cstdint>
#include <functional>
#include <string>

#include "cli_support.hpp"
#include "mltrl/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Line-length design and analysis for multiline TRL calibration"};
    app.set_version_flag("--version", std::string(mltrl::kVersion));
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* desc;
        std::function<int(const mltrl::cli::CommonOptions&)> run;
    };
    const Sub subs[] = {
        {"analyze", "Effective-phase curve and band report for a given line set",
         mltrl::cli::run_analyze},
        {"design-optimize", "Optimize line lengths under constraints",
         mltrl::cli::run_design_optimize},
        {"design-ruler", "Sparse-ruler line lengths and covered bands",
         mltrl::cli::run_design_ruler},
        {"linecount", "Recommended number of lines for a frequency range",
         mltrl::cli::run_linecount},
        {"trl-band", "Classical two-line band arithmetic",
         mltrl::cli::run_trl_band},
        {"mc-sens",
         "Monte Carlo sensitivity of the error-term extraction (cross-section "
         "variations are modeled as direct permittivity perturbations)",
         mltrl::cli::run_mc_sens},
    };

    struct Bound {
        mltrl::cli::CommonOptions opts;
        std::function<int(const mltrl::cli::CommonOptions&)> run;
        CLI::App* cmd = nullptr;
        std::int64_t seed_raw = -1;
    };
    std::vector<std::shared_ptr<Bound>> bound;

    for (const auto& sub : subs) {
        auto b = std::make_shared<Bound>();
        b->run = sub.run;
        b->cmd = app.add_subcommand(sub.name, sub.desc);
        b->cmd->add_option("--config", b->opts.config_path, "JSON configuration file")
            ->required();
        b->cmd->add_option("--out", b->opts.out_dir, "Output directory")
            ->default_val(".");
        b->cmd->add_option("--seed", b->seed_raw,
                           "Random seed override (wins over the config)");
        b->cmd->add_option("--threads", b->opts.threads,
                           "Worker threads (0 = hardware)");
        bound.push_back(b);
    }

    CLI11_PARSE(app, argc, argv);

    for (const auto& b : bound) {
        if (b->cmd->parsed()) {
            if (b->cmd->count("--seed"))
                b->opts.seed = static_cast<std::uint64_t>(b->seed_raw);
            return b->run(b->opts);
        }
    }
    return 1;
}
