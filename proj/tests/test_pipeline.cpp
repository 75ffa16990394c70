#include "doctest.h"

#include "riskdex/error.hpp"
#include "riskdex/pipeline.hpp"

#include "json.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace riskdex;

namespace {

const fs::path kFixture = RISKDEX_FIXTURE_DIR;

int run_cli(const std::string &args) {
    const std::string command = std::string(RISKDEX_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json read_json(const fs::path &p) { return nlohmann::json::parse(slurp(p)); }

fs::path scratch(const std::string &name) {
    const auto dir = fs::temp_directory_path() / ("riskdex_pipeline_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string fixture_config_with(const std::string &replace, const std::string &with) {
    std::string text = slurp(kFixture / "config.yaml");
    const auto pos = text.find(replace);
    REQUIRE(pos != std::string::npos);
    text.replace(pos, replace.size(), with);
    return text;
}

} // namespace

TEST_CASE("full run on the bundled fixture writes the artifacts") {
    const auto out = scratch("run");
    CHECK(run_cli("run -c " + (kFixture / "config.yaml").string() + " --out " + out.string()) == 0);
    for (const char *name : {"scores.csv", "regions_ranked.geojson", "report.json", "normalized.csv", "cca.json",
                             "manova.txt"}) {
        CHECK(fs::exists(out / name));
    }
    const auto report = read_json(out / "report.json");
    CHECK(report["canonical"]["rho"].get<double>() > 0.0);
    CHECK(report["run"]["config_hash"].get<std::string>().size() == 64);
}

TEST_CASE("each stage reproduces its section of the full report") {
    const auto full = scratch("full");
    const auto config = (kFixture / "config.yaml").string();
    REQUIRE(run_cli("run -c " + config + " --out " + full.string()) == 0);
    const auto report = read_json(full / "report.json");

    const auto staged = scratch("staged");
    for (const char *stage : {"normalize", "adequacy", "cfa", "cca", "index", "regress"}) {
        REQUIRE(run_cli(std::string(stage) + " -c " + config + " --out " + staged.string()) == 0);
    }
    CHECK(read_json(staged / "cca.json")["canonical"] == report["canonical"]);
    CHECK(read_json(staged / "cfa.json")["factor_models"] == report["factor_models"]);
    CHECK(read_json(staged / "adequacy.json")["adequacy"] == report["adequacy"]);
    CHECK(read_json(staged / "correlations.json")["correlations"] == report["correlations"]);
    CHECK(read_json(staged / "manova.json")["manova"] == report["manova"]);
    CHECK_FALSE(fs::exists(staged / "report.json"));

    for (const auto &entry : fs::directory_iterator(staged)) {
        const auto name = entry.path().filename();
        CHECK_MESSAGE(slurp(entry.path()) == slurp(full / name), name.string());
    }
}

TEST_CASE("missing column fails validation with exit 2") {
    const auto dir = scratch("missing");
    std::ofstream(dir / "config.yaml") << fixture_config_with("handwashing", "not_a_column");
    for (const char *f : {"indicators.csv", "regions.geojson", "gates.csv"}) {
        fs::copy_file(kFixture / f, dir / f);
    }
    CHECK(run_cli("run -c " + (dir / "config.yaml").string()) == 2);
    CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("strict adequacy rejects identity-correlation data") {
    // Columns of a 16x16 Sylvester-Hadamard matrix are mutually orthogonal.
    const auto dir = scratch("strict");
    std::ofstream csv(dir / "indicators.csv");
    csv << "region_id,a,b,c,d,e,f,h1,h2\n";
    for (unsigned i = 0; i < 16; ++i) {
        csv << "R" << i;
        for (unsigned j = 1; j <= 8; ++j) {
            csv << "," << ((__builtin_popcount(i & j) % 2) ? -1 : 1);
        }
        csv << "\n";
    }
    csv.close();
    std::ofstream(dir / "config.yaml") << "indicators: indicators.csv\n"
                                          "factors:\n"
                                          "  - name: f1\n    indicators: [a, b, c]\n"
                                          "  - name: f2\n    indicators: [d, e, f]\n"
                                          "hazards: [h1, h2]\n";
    CHECK(run_cli("adequacy -c " + (dir / "config.yaml").string() + " --strict-adequacy") == 4);
    const auto report = read_json([&] {
        REQUIRE(run_cli("adequacy -c " + (dir / "config.yaml").string() + " --out " + (dir / "o").string()) == 0);
        return dir / "o" / "adequacy.json";
    }());
    CHECK(report["adequacy"]["joint"]["passed"] == false);
}

TEST_CASE("usage errors") {
    CHECK(run_cli("frobnicate -c x.yaml") == 64);
    CHECK(run_cli("") == 64);
    CHECK(run_cli("run") == 64);
}

TEST_CASE("config grammar") {
    const auto config = load_config(kFixture / "config.yaml");
    CHECK(config.spec.factors.size() == 3);
    CHECK(config.spec.hazard_columns == std::vector<std::string>{"confirmed", "pdp", "odp"});
    CHECK(config.tourist_column == "foreign_tourists");
    CHECK(config.bins == 5);
    CHECK(config.indicators == kFixture / "indicators.csv");

    CHECK_THROWS_AS((void)parse_config("indicators: a.csv\nbogus: 1\nfactors: []\nhazards: [h]\n"), Error);
    CHECK_THROWS_AS((void)parse_config("indicators: a.csv\nfactors: [\n"), Error);
    CHECK(parse_stage("run") == Stage::all);
    CHECK_FALSE(parse_stage("frobnicate"));
}

TEST_CASE("config hash tracks config fields and input bytes") {
    const auto dir = scratch("hash");
    for (const char *f : {"indicators.csv", "regions.geojson", "gates.csv", "config.yaml"}) {
        fs::copy_file(kFixture / f, dir / f);
    }
    auto config = load_config(dir / "config.yaml");
    const auto base = config_hash(config);
    CHECK(config_hash(load_config(dir / "config.yaml")) == base);

    auto changed = config;
    changed.bins = 4;
    CHECK(config_hash(changed) != base);
    changed = config;
    changed.strict_adequacy = true;
    CHECK(config_hash(changed) != base);
    changed = config;
    changed.output_dir = dir / "elsewhere";
    CHECK(config_hash(changed) == base);

    std::ofstream(dir / "gates.csv", std::ios::app) << "GX,-4.5,100.5,1,25\n";
    CHECK(config_hash(config) != base);
}
