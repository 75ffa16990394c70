// riskdex: composite risk index pipeline CLI.

#include "riskdex/pipeline.hpp"

#include "CLI11.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

namespace {

constexpr int kUsageExit = 64;

constexpr const char *kExitCodes = R"(Exit codes:
  0   success
  1   unexpected internal error
  2   configuration error (bad key, missing column)
  3   input data error (CSV, GeoJSON, gates)
  4   adequacy gate failed (--strict-adequacy)
  5   normalisation / correlation error (constant column, singular matrix)
  6   factor model error (non-convergence, zero loadings)
  7   canonical correlation error (singular block, degenerate weights)
  8   index / ranking error (weights, k-means, correlation)
  9   regression error (rank-deficient design, singular residuals)
  10  output error (I/O, region without geometry)
  64  usage error

Environment:
  RISKDEX_LOG_LEVEL   trace|debug|info|warn|error|off (default warn)
  SOURCE_DATE_EPOCH   if set, recorded as the report timestamp)";

struct Overrides {
    std::string config;
    bool strict_adequacy = false;
    int bins = 0;
    std::string out;
};

void add_common_options(CLI::App *cmd, Overrides &o) {
    cmd->add_option("-c,--config", o.config, "pipeline config (YAML)")->required()->check(CLI::ExistingFile);
    cmd->add_flag("--strict-adequacy", o.strict_adequacy, "abort when Bartlett/KMO adequacy fails");
    cmd->add_option("--bins", o.bins, "number of risk ranks (default from config, else 5)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "output directory (overrides config)");
}

void configure_logging() {
    auto logger = spdlog::stderr_color_mt("riskdex");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("%^[%l]%$ %v");
    const char *level = std::getenv("RISKDEX_LOG_LEVEL");
    spdlog::set_level(level != nullptr ? spdlog::level::from_str(level) : spdlog::level::warn);
}

} // namespace

int main(int argc, char **argv) {
    configure_logging();

    CLI::App app{"riskdex - composite pandemic-risk index for administrative regions"};
    app.footer(kExitCodes);
    app.require_subcommand(1);

    Overrides overrides;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"run", "run the full pipeline and write every artifact"},
        {"normalize", "write the min-max normalised indicator and hazard table"},
        {"adequacy", "write Bartlett sphericity and KMO diagnostics"},
        {"cfa", "write per-factor loadings and indicator weights"},
        {"cca", "write canonical correlation, factor and hazard weights"},
        {"index", "write scores, ranked GeoJSON and risk/hazard correlations"},
        {"regress", "write the multivariate regression and MANOVA report"},
    };
    for (const auto &[name, help] : commands) {
        add_common_options(app.add_subcommand(name, help), overrides);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kUsageExit;
    }

    const auto *selected = app.get_subcommands().front();
    const auto stage = riskdex::parse_stage(selected->get_name());
    if (!stage) {
        std::cerr << "unknown subcommand " << selected->get_name() << "\n";
        return kUsageExit;
    }

    try {
        auto config = riskdex::load_config(overrides.config);
        if (overrides.strict_adequacy) {
            config.strict_adequacy = true;
        }
        if (overrides.bins > 0) {
            config.bins = overrides.bins;
        }
        if (!overrides.out.empty()) {
            config.output_dir = overrides.out;
        }
        for (const auto &path : riskdex::run_pipeline(config, *stage)) {
            std::cout << path.string() << "\n";
        }
    } catch (const riskdex::Error &e) {
        spdlog::error("{}", e.what());
        return riskdex::exit_code(e.code());
    } catch (const std::exception &e) {
        spdlog::error("internal error: {}", e.what());
        return 1;
    }
    return 0;
}
