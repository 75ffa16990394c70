// riskdex-synth: writes a synthetic fixture with planted factor structure.

#include "riskdex/synthetic.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char **argv) {
    CLI::App app{"riskdex-synth - generate a planted-truth fixture (indicators, regions, gates, config)"};
    riskdex::synthetic::Options options;
    std::string dir;
    app.add_option("dir", dir, "output directory")->required();
    app.add_option("-n,--regions", options.regions, "number of regions")->check(CLI::Range(8, 100000));
    app.add_option("--seed", options.seed, "random seed");
    app.add_option("--noise", options.hazard_noise, "hazard noise relative to signal sd");
    CLI11_PARSE(app, argc, argv);

    try {
        const auto fixture = riskdex::synthetic::write_fixture(dir, options);
        std::cout << fixture.config.string() << "\n";
    } catch (const std::exception &e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
