#include "riskdex/pipeline.hpp"

#include "riskdex/csv.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#ifndef RISKDEX_VERSION
#define RISKDEX_VERSION "0.0.0"
#endif

namespace riskdex {
namespace {

namespace fs = std::filesystem;

const std::set<std::string> kConfigKeys{
    "indicators",     "regions",         "gates",           "output",
    "missing_policy", "strict_adequacy", "bins",            "normalize_regression",
    "adequacy_scope", "tourist_column",  "fit_method",      "principal_axis_fallback",
    "factors",        "hazards",         "max_iterations"};

fs::path resolve(const fs::path &base, const std::string &value) {
    const fs::path p(value);
    return p.is_absolute() || base.empty() ? p : base / p;
}

template <typename T> T scalar(const YAML::Node &node, const std::string &key) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception &) {
        throw Error(ErrorCode::InvalidConfig, "bad value for '" + key + "'");
    }
}

std::vector<std::string> string_list(const YAML::Node &node, const std::string &key) {
    if (!node.IsSequence()) {
        throw Error(ErrorCode::InvalidConfig, "'" + key + "' must be a list");
    }
    std::vector<std::string> out;
    for (const auto &item : node) {
        out.push_back(scalar<std::string>(item, key));
    }
    return out;
}

std::string read_bytes(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string sha256_hex(const std::string &data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::IoFailure, "SHA-256 digest failed");
    }
    std::string hex;
    for (unsigned int i = 0; i < length; ++i) {
        hex += fmt::format("{:02x}", digest[i]);
    }
    return hex;
}

std::optional<std::string> reproducible_timestamp() {
    const char *epoch = std::getenv("SOURCE_DATE_EPOCH");
    if (epoch == nullptr || *epoch == '\0') {
        return std::nullopt;
    }
    char *end = nullptr;
    const long long seconds = std::strtoll(epoch, &end, 10);
    if (end == epoch || *end != '\0') {
        return std::nullopt;
    }
    const auto t = static_cast<std::time_t>(seconds);
    std::tm utc{};
    gmtime_r(&t, &utc);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return std::string(buffer);
}

void warn(PipelineResult &result, std::string stage, std::string kind, std::string message) {
    spdlog::warn("[{}] {}: {}", stage, kind, message);
    result.warnings.push_back({std::move(stage), std::move(kind), std::move(message)});
}

void run_adequacy(const PipelineConfig &config, PipelineResult &result) {
    const auto &spec = config.spec;
    if (config.adequacy_scope == AdequacyScope::joint) {
        result.adequacy.push_back(adequacy(result.normalized.table.matrix(spec.indicators()), "joint"));
    } else {
        for (const auto &block : spec.factors) {
            result.adequacy.push_back(adequacy(result.normalized.table.matrix(block.indicators), block.name));
        }
    }
    for (const auto &report : result.adequacy) {
        if (report.passed) {
            continue;
        }
        const auto message = fmt::format("{}: Bartlett p = {:.4g}, KMO = {:.4f}", report.scope,
                                         report.bartlett_p, report.kmo);
        if (config.strict_adequacy) {
            throw Error(ErrorCode::AdequacyFailed, message);
        }
        warn(result, "adequacy", "AdequacyFailed", message);
    }
}

void run_index(const PipelineConfig &config, PipelineResult &result) {
    const auto &spec = config.spec;
    auto &scores = result.scores;
    scores.regions = result.table.regions();
    scores.factor_names = result.factor_scores.factor_names;
    scores.factor_scores = result.factor_scores.scores;
    scores.risk_index = composite_index(result.factor_scores.scores, result.factor_weights);
    scores.hazard_index =
        hazard_index(result.normalized.table.matrix(spec.hazard_columns), result.hazard_weights);

    const std::vector<double> risk(scores.risk_index.begin(), scores.risk_index.end());
    const std::vector<double> hazard(scores.hazard_index.begin(), scores.hazard_index.end());
    const auto clusters = kmeans_1d(risk, config.bins);
    scores.rank.resize(clusters.assignment.size());
    for (std::size_t i = 0; i < clusters.assignment.size(); ++i) {
        scores.rank[i] = clusters.assignment[i] + 1;
    }
    scores.centers = clusters.centers;

    result.correlations.push_back({"overall", correlation_diagnostic(risk, hazard), risk.size()});
    std::set<std::string> tags;
    for (const auto &tag : result.group_tags) {
        if (tag) {
            tags.insert(*tag);
        }
    }
    for (const auto &tag : tags) {
        if (tag == "overall") {
            warn(result, "index", "GroupTagCollision", "group_tag 'overall' is shadowed by the overall correlation");
            continue;
        }
        try {
            const std::size_t count = static_cast<std::size_t>(
                std::count(result.group_tags.begin(), result.group_tags.end(), std::optional<std::string>(tag)));
            result.correlations.push_back(
                {tag, correlation_diagnostic(risk, hazard, result.group_tags, tag), count});
        } catch (const Error &e) {
            warn(result, "index", std::string(to_string(e.code())),
                 "correlation for group '" + tag + "' skipped: " + e.what());
        }
    }
}

void run_regression(const PipelineConfig &config, PipelineResult &result) {
    const auto &spec = config.spec;
    const auto predictors = spec.indicators();
    const Matrix z = config.normalize_regression ? result.normalized.table.matrix(predictors)
                                                 : result.table.matrix(predictors);
    const Matrix y = result.table.matrix(spec.hazard_columns);
    result.regression = fit_mv_regression(z, y);
    result.manova = manova_per_predictor(z, y, predictors);
    result.coefficient_tests = coefficient_tests(result.regression, predictors, spec.hazard_columns);
}

std::string fmt_number(double value) { return fmt::format("{:.10g}", value); }

} // namespace

PipelineConfig parse_config(std::string_view yaml_text, const fs::path &base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::Exception &e) {
        throw Error(ErrorCode::InvalidConfig, std::string("config is not valid YAML: ") + e.what());
    }
    if (!root.IsMap()) {
        throw Error(ErrorCode::InvalidConfig, "config must be a mapping");
    }
    for (const auto &entry : root) {
        const auto key = entry.first.as<std::string>();
        if (!kConfigKeys.contains(key)) {
            throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
        }
    }

    PipelineConfig config;
    if (!root["indicators"]) {
        throw Error(ErrorCode::InvalidConfig, "'indicators' is required");
    }
    config.indicators = resolve(base_dir, scalar<std::string>(root["indicators"], "indicators"));
    if (root["regions"]) {
        config.regions = resolve(base_dir, scalar<std::string>(root["regions"], "regions"));
    }
    if (root["gates"]) {
        config.gates = resolve(base_dir, scalar<std::string>(root["gates"], "gates"));
    }
    if (root["output"]) {
        config.output_dir = resolve(base_dir, scalar<std::string>(root["output"], "output"));
    } else {
        config.output_dir = resolve(base_dir, "out");
    }
    if (root["missing_policy"]) {
        config.missing_policy = parse_missing_policy(scalar<std::string>(root["missing_policy"], "missing_policy"));
    }
    if (root["strict_adequacy"]) {
        config.strict_adequacy = scalar<bool>(root["strict_adequacy"], "strict_adequacy");
    }
    if (root["bins"]) {
        config.bins = scalar<int>(root["bins"], "bins");
    }
    if (root["normalize_regression"]) {
        config.normalize_regression = scalar<bool>(root["normalize_regression"], "normalize_regression");
    }
    if (root["adequacy_scope"]) {
        const auto scope = scalar<std::string>(root["adequacy_scope"], "adequacy_scope");
        if (scope == "joint") {
            config.adequacy_scope = AdequacyScope::joint;
        } else if (scope == "per_factor") {
            config.adequacy_scope = AdequacyScope::per_factor;
        } else {
            throw Error(ErrorCode::InvalidConfig, "adequacy_scope must be joint or per_factor");
        }
    }
    if (root["tourist_column"]) {
        config.tourist_column = scalar<std::string>(root["tourist_column"], "tourist_column");
    }
    if (root["fit_method"]) {
        const auto method = scalar<std::string>(root["fit_method"], "fit_method");
        if (method == "maximum_likelihood") {
            config.fit.method = FitMethod::maximum_likelihood;
        } else if (method == "principal_axis") {
            config.fit.method = FitMethod::principal_axis;
        } else {
            throw Error(ErrorCode::InvalidConfig, "fit_method must be maximum_likelihood or principal_axis");
        }
    }
    if (root["principal_axis_fallback"]) {
        config.fit.principal_axis_fallback =
            scalar<bool>(root["principal_axis_fallback"], "principal_axis_fallback");
    }
    if (root["max_iterations"]) {
        config.fit.max_iterations = scalar<int>(root["max_iterations"], "max_iterations");
    }

    const auto factors = root["factors"];
    if (!factors || !factors.IsSequence()) {
        throw Error(ErrorCode::InvalidConfig, "'factors' must be a list of {name, indicators}");
    }
    for (const auto &item : factors) {
        if (!item.IsMap() || !item["name"] || !item["indicators"]) {
            throw Error(ErrorCode::InvalidConfig, "each factor needs 'name' and 'indicators'");
        }
        config.spec.factors.push_back({scalar<std::string>(item["name"], "factors.name"),
                                       string_list(item["indicators"], "factors.indicators")});
    }
    if (!root["hazards"]) {
        throw Error(ErrorCode::InvalidConfig, "'hazards' is required");
    }
    config.spec.hazard_columns = string_list(root["hazards"], "hazards");
    return config;
}

PipelineConfig load_config(const fs::path &path) {
    const auto text = read_bytes(path);
    return parse_config(text, path.parent_path());
}

std::string canonical_config(const PipelineConfig &config) {
    std::string out;
    out += "indicators=" + config.indicators.generic_string() + "\n";
    out += "regions=" + config.regions.generic_string() + "\n";
    out += "gates=" + config.gates.generic_string() + "\n";
    out += "missing_policy=" + std::string(to_string(config.missing_policy)) + "\n";
    out += fmt::format("strict_adequacy={}\n", config.strict_adequacy);
    out += fmt::format("bins={}\n", config.bins);
    out += fmt::format("normalize_regression={}\n", config.normalize_regression);
    out += fmt::format("adequacy_scope={}\n",
                       config.adequacy_scope == AdequacyScope::joint ? "joint" : "per_factor");
    out += "tourist_column=" + config.tourist_column + "\n";
    out += "fit_method=" + std::string(to_string(config.fit.method)) + "\n";
    out += fmt::format("principal_axis_fallback={}\n", config.fit.principal_axis_fallback);
    out += fmt::format("max_iterations={}\n", config.fit.max_iterations);
    for (const auto &block : config.spec.factors) {
        out += "factor=" + block.name + ":";
        for (const auto &id : block.indicators) {
            out += id + ";";
        }
        out += "\n";
    }
    out += "hazards=";
    for (const auto &id : config.spec.hazard_columns) {
        out += id + ";";
    }
    out += "\n";
    return out;
}

std::string config_hash(const PipelineConfig &config) {
    std::string material = canonical_config(config);
    for (const auto &[label, path] :
         {std::pair{"indicators", config.indicators}, std::pair{"regions", config.regions},
          std::pair{"gates", config.gates}}) {
        if (path.empty()) {
            continue;
        }
        const auto bytes = read_bytes(path);
        material += fmt::format("\n--{} {}--\n", label, bytes.size());
        material += bytes;
    }
    return sha256_hex(material);
}

std::optional<Stage> parse_stage(std::string_view name) {
    static const std::map<std::string_view, Stage> stages{
        {"normalize", Stage::normalize}, {"adequacy", Stage::adequacy}, {"cfa", Stage::cfa},
        {"cca", Stage::cca},             {"index", Stage::index},       {"regress", Stage::regress},
        {"run", Stage::all}};
    const auto it = stages.find(name);
    return it == stages.end() ? std::nullopt : std::optional<Stage>(it->second);
}

std::string_view to_string(Stage stage) noexcept {
    switch (stage) {
    case Stage::normalize: return "normalize";
    case Stage::adequacy: return "adequacy";
    case Stage::cfa: return "cfa";
    case Stage::cca: return "cca";
    case Stage::index: return "index";
    case Stage::regress: return "regress";
    case Stage::all: return "run";
    }
    return "run";
}

PipelineResult load_inputs(const PipelineConfig &config) {
    config.spec.validate();
    if (config.bins < 1) {
        throw Error(ErrorCode::InvalidConfig, "bins must be at least 1");
    }
    if (!config.gates.empty() && (config.regions.empty() || config.tourist_column.empty())) {
        throw Error(ErrorCode::InvalidConfig, "gates need both 'regions' and 'tourist_column'");
    }

    PipelineResult result;
    result.table = load_indicator_table(config.indicators, config.missing_policy);
    const bool tourists_from_gates = !config.gates.empty();
    for (const auto &id : config.spec.indicators()) {
        if (!result.table.has_column(id) && !(tourists_from_gates && id == config.tourist_column)) {
            throw Error(ErrorCode::MissingColumn, "indicator '" + id + "' is not in " +
                                                      config.indicators.filename().string());
        }
    }
    for (const auto &id : config.spec.hazard_columns) {
        if (!result.table.has_column(id)) {
            throw Error(ErrorCode::MissingColumn, "hazard '" + id + "' is not in " +
                                                      config.indicators.filename().string());
        }
    }
    if (tourists_from_gates) {
        const auto &indicators = config.spec.indicators();
        if (std::find(indicators.begin(), indicators.end(), config.tourist_column) == indicators.end()) {
            throw Error(ErrorCode::MissingColumn,
                        "tourist_column '" + config.tourist_column + "' is not assigned to a factor");
        }
    }

    result.group_tags.assign(result.table.rows(), std::nullopt);
    if (!config.regions.empty()) {
        result.regions = load_regions(config.regions);
        std::map<std::string, const Region *> by_id;
        for (const auto &region : result.regions) {
            by_id.emplace(region.region_id, &region);
        }
        const auto &ids = result.table.regions();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const auto it = by_id.find(ids[i]);
            if (it == by_id.end()) {
                throw Error(ErrorCode::RegionWithoutGeometry, "region '" + ids[i] + "' has no geometry");
            }
            result.group_tags[i] = it->second->group_tag;
        }
        if (by_id.size() != ids.size()) {
            throw Error(ErrorCode::RegionWithoutGeometry,
                        "regions file has features that are not in the indicator table");
        }
        if (tourists_from_gates) {
            std::vector<Region> ordered;
            ordered.reserve(ids.size());
            for (const auto &id : ids) {
                ordered.push_back(*by_id.at(id));
            }
            const auto gates = load_gates(config.gates);
            result.table.set_column({config.tourist_column, "arrivals",
                                     config.gates.filename().string() + " (buffered)",
                                     assign_gate_arrivals(ordered, gates)});
        }
    }
    return result;
}

PipelineResult compute(const PipelineConfig &config, Stage last) {
    auto reached = [last](Stage s) { return static_cast<int>(s) <= static_cast<int>(last); };

    PipelineResult result = load_inputs(config);
    const auto &spec = config.spec;

    std::vector<std::string> used = spec.indicators();
    used.insert(used.end(), spec.hazard_columns.begin(), spec.hazard_columns.end());
    IndicatorTable selected(result.table.regions());
    for (const auto &id : used) {
        selected.set_column(result.table.column(id));
    }
    result.normalized = normalize(selected);
    spdlog::info("normalized {} columns over {} regions", used.size(), selected.rows());
    if (!reached(Stage::adequacy)) {
        return result;
    }

    run_adequacy(config, result);
    if (!reached(Stage::cfa)) {
        return result;
    }

    result.model = fit_factor_model(result.normalized, spec, config.fit, &result.warnings);
    for (const auto &w : result.warnings) {
        if (w.stage == "cfa") {
            spdlog::warn("[cfa] {}: {}", w.kind, w.message);
        }
    }
    result.factor_scores = factor_scores(result.normalized, spec, result.model);
    if (!reached(Stage::cca)) {
        return result;
    }

    result.canonical =
        cca(result.factor_scores.scores, result.normalized.table.matrix(spec.hazard_columns));
    if (result.canonical.ridge_applied) {
        warn(result, "cca", "RidgeApplied", "ill-conditioned covariance block was ridged");
    }
    const auto before = result.warnings.size();
    result.factor_weights = factor_weights(result.canonical.first().a, &result.warnings);
    result.hazard_weights = hazard_weights(result.canonical.first().b, &result.warnings);
    for (auto i = before; i < result.warnings.size(); ++i) {
        spdlog::warn("[cca] {}: {}", result.warnings[i].kind, result.warnings[i].message);
    }
    spdlog::info("first canonical correlation {:.6f}", result.canonical.rho());
    if (!reached(Stage::index)) {
        return result;
    }

    run_index(config, result);
    if (!reached(Stage::regress)) {
        return result;
    }

    run_regression(config, result);
    return result;
}

AnalysisReport make_report(const PipelineConfig &config, const PipelineResult &result) {
    AnalysisReport report;
    report.adequacy = result.adequacy;
    report.spec = config.spec;
    report.factor_models = result.model;
    report.canonical = result.canonical;
    report.factor_weights = result.factor_weights;
    report.hazard_weights = result.hazard_weights;
    report.correlations = result.correlations;
    report.regions = result.table.regions();
    report.group_tags = result.group_tags;
    report.scores = result.scores;
    report.manova = result.manova;
    report.coefficient_tests = result.coefficient_tests;
    report.r_squared = result.regression.r_squared;
    report.warnings = result.warnings;
    report.run.config_hash = config_hash(config);
    report.run.timestamp = reproducible_timestamp();
    report.run.version = RISKDEX_VERSION;
    return report;
}

std::string normalized_csv(const PipelineConfig &config, const NormalizedTable &normalized) {
    std::vector<std::string> ids = config.spec.indicators();
    ids.insert(ids.end(), config.spec.hazard_columns.begin(), config.spec.hazard_columns.end());
    std::string out = "region_id";
    for (const auto &id : ids) {
        out += "," + csv::escape(id);
    }
    out += "\n";
    const Matrix m = normalized.table.matrix(ids);
    const auto &regions = normalized.table.regions();
    for (std::size_t i = 0; i < regions.size(); ++i) {
        out += csv::escape(regions[i]);
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out += "," + fmt_number(m(static_cast<Eigen::Index>(i), j));
        }
        out += "\n";
    }
    return out;
}

std::vector<fs::path> write_stage_artifacts(const PipelineConfig &config, const PipelineResult &result,
                                            Stage stage) {
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) {
        throw Error(ErrorCode::IoFailure, "cannot create " + config.output_dir.string() + ": " + ec.message());
    }
    const auto &spec = config.spec;
    const bool all = stage == Stage::all;
    std::vector<fs::path> written;
    auto emit = [&](const std::string &name, const std::string &content) {
        const auto path = config.output_dir / name;
        write_text_file(path, content);
        written.push_back(path);
    };

    if (all || stage == Stage::normalize) {
        emit("normalized.csv", normalized_csv(config, result.normalized));
    }
    if (all || stage == Stage::adequacy) {
        emit("adequacy.json", dump_json({{"adequacy", adequacy_json(result.adequacy)}}));
    }
    if (all || stage == Stage::cfa) {
        emit("cfa.json", dump_json({{"factor_models", factor_models_json(spec, result.model)}}));
    }
    if (all || stage == Stage::cca) {
        emit("cca.json", dump_json({{"canonical", canonical_json(spec, result.canonical,
                                                                 result.factor_weights,
                                                                 result.hazard_weights)}}));
    }
    if (all || stage == Stage::index) {
        emit("scores.csv", scores_csv(result.scores));
        if (!result.regions.empty()) {
            emit("regions_ranked.geojson", dump_json(choropleth_geojson(result.regions, result.scores), -1));
        }
        emit("correlations.json", dump_json({{"correlations", correlations_json(result.correlations)}}));
    }
    if (all || stage == Stage::regress) {
        emit("manova.json", dump_json({{"manova", manova_json(spec, result.manova)},
                                       {"coefficient_tests", coefficient_tests_json(result.coefficient_tests)}}));
        emit("manova.txt", render_significance_table(result.manova, spec));
    }
    if (all) {
        write_report_json(make_report(config, result), config.output_dir / "report.json");
        written.push_back(config.output_dir / "report.json");
    }
    return written;
}

std::vector<fs::path> run_pipeline(const PipelineConfig &config, Stage stage) {
    const auto result = compute(config, stage);
    return write_stage_artifacts(config, result, stage);
}

} // namespace riskdex
