#include "riskdex/report.hpp"

#include "riskdex/csv.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <unordered_map>

namespace riskdex {

using nlohmann::json;

std::string_view rank_color(int rank, int bins) {
    const auto last = static_cast<int>(kRankPalette.size()) - 1;
    if (bins <= 1) {
        return kRankPalette[static_cast<std::size_t>(last)];
    }
    const int clamped = std::clamp(rank, 1, bins);
    const auto index = static_cast<int>(
        std::lround(static_cast<double>(clamped - 1) * last / static_cast<double>(bins - 1)));
    return kRankPalette[static_cast<std::size_t>(index)];
}

json json_number(double value) {
    if (!std::isfinite(value)) {
        return nullptr;
    }
    const auto text = fmt::format("{:.10g}", value);
    const double rounded = std::strtod(text.c_str(), nullptr);
    return rounded == 0.0 ? json(0.0) : json(rounded);
}

std::string format_g6(double value) {
    if (value == 0.0) {
        return "0";
    }
    return fmt::format("{:.6g}", value);
}

json adequacy_json(const std::vector<AdequacyReport> &reports) {
    json out = json::object();
    for (const auto &r : reports) {
        out[r.scope] = {{"bartlett_chi2", json_number(r.bartlett_chi2)},
                        {"bartlett_df", r.bartlett_df},
                        {"bartlett_p", json_number(r.bartlett_p)},
                        {"kmo", json_number(r.kmo)},
                        {"passed", r.passed}};
    }
    return out;
}

json factor_models_json(const FactorSpec &spec, const FactorModel &model) {
    json factors = json::array();
    for (const auto &block : spec.factors) {
        const auto &fitted = model.factor(block.name);
        const auto &fit = fitted.fit;
        json indicators = json::array();
        for (std::size_t j = 0; j < fitted.indicators.size(); ++j) {
            const auto i = static_cast<Eigen::Index>(j);
            indicators.push_back({{"indicator", fitted.indicators[j]},
                                  {"loading", json_number(fit.loadings(i))},
                                  {"explained_variance", json_number(fit.communalities(i))},
                                  {"raw_weight", json_number(fitted.weights.raw(i))},
                                  {"weight", json_number(fitted.weights.weights(i))}});
        }
        json entry = {{"factor", fitted.name},
                      {"indicators", std::move(indicators)},
                      {"method", std::string(to_string(fit.method))},
                      {"iterations", fit.iterations},
                      {"converged", fit.converged},
                      {"heywood", fit.heywood},
                      {"degenerate", fit.degenerate},
                      {"discrepancy", json_number(fit.discrepancy)},
                      {"log_likelihood", json_number(fit.log_likelihood)}};
        factors.push_back(std::move(entry));
    }
    return factors;
}

json canonical_json(const FactorSpec &spec, const CanonicalSolution &solution,
                    const Vector &factor_weights, const Vector &hazard_weights) {
    const auto names = spec.factor_names();
    auto keyed = [](const std::vector<std::string> &keys, const Vector &values) {
        json out = json::object();
        for (std::size_t i = 0; i < keys.size() && static_cast<Eigen::Index>(i) < values.size(); ++i) {
            out[keys[i]] = json_number(values(static_cast<Eigen::Index>(i)));
        }
        return out;
    };
    json pairs = json::array();
    for (const auto &pair : solution.pairs) {
        pairs.push_back({{"rho", json_number(pair.rho)},
                         {"a", keyed(names, pair.a)},
                         {"b", keyed(spec.hazard_columns, pair.b)}});
    }
    return {{"rho", solution.pairs.empty() ? json(nullptr) : json_number(solution.rho())},
            {"factor_weights", keyed(names, factor_weights)},
            {"hazard_weights", keyed(spec.hazard_columns, hazard_weights)},
            {"pairs", std::move(pairs)},
            {"ridge_applied", solution.ridge_applied}};
}

json correlations_json(const std::vector<NamedCorrelation> &correlations) {
    json out = json::object();
    for (const auto &c : correlations) {
        if (!out.contains(c.key)) {
            out[c.key] = json_number(c.r);
        }
    }
    return out;
}

json manova_json(const FactorSpec &spec, const std::vector<ManovaRow> &rows) {
    std::unordered_map<std::string, std::string> factor_of;
    for (const auto &block : spec.factors) {
        for (const auto &id : block.indicators) {
            factor_of[id] = block.name;
        }
    }
    json out = json::array();
    for (const auto &row : rows) {
        out.push_back({{"predictor", row.predictor},
                       {"factor", factor_of.contains(row.predictor) ? factor_of[row.predictor] : ""},
                       {"wilks_lambda", json_number(row.wilks_lambda)},
                       {"f_approx", json_number(row.f_approx)},
                       {"df1", json_number(row.df1)},
                       {"df2", json_number(row.df2)},
                       {"p_value", json_number(row.p_value)},
                       {"p_text", format_p_value(row.p_value)},
                       {"pillai_trace", json_number(row.pillai_trace)},
                       {"significant_05", row.significant_05},
                       {"significant_10", row.significant_10}});
    }
    return out;
}

json coefficient_tests_json(const std::vector<CoefficientTest> &tests) {
    json out = json::array();
    for (const auto &t : tests) {
        out.push_back({{"predictor", t.predictor},
                       {"response", t.response},
                       {"estimate", json_number(t.estimate)},
                       {"std_error", json_number(t.std_error)},
                       {"t", json_number(t.t)},
                       {"p_value", json_number(t.p_value)}});
    }
    return out;
}

json warnings_json(const Warnings &warnings) {
    json out = json::array();
    for (const auto &w : warnings) {
        out.push_back({{"stage", w.stage}, {"kind", w.kind}, {"message", w.message}});
    }
    return out;
}

json to_json(const AnalysisReport &report) {
    json pairs = json::array();
    for (std::size_t i = 0; i < report.regions.size(); ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        json entry = {{"region_id", report.regions[i]},
                      {"risk_index", json_number(report.scores.risk_index(idx))},
                      {"hazard_index", json_number(report.scores.hazard_index(idx))},
                      {"rank", report.scores.rank[i]}};
        if (i < report.group_tags.size() && report.group_tags[i]) {
            entry["group_tag"] = *report.group_tags[i];
        }
        pairs.push_back(std::move(entry));
    }
    json r2 = json::object();
    for (std::size_t j = 0; j < report.spec.hazard_columns.size() &&
                            static_cast<Eigen::Index>(j) < report.r_squared.size();
         ++j) {
        r2[report.spec.hazard_columns[j]] = json_number(report.r_squared(static_cast<Eigen::Index>(j)));
    }
    json centers = json::array();
    for (const double c : report.scores.centers) {
        centers.push_back(json_number(c));
    }
    json run = {{"config_hash", report.run.config_hash},
                {"versions", {{"riskdex", report.run.version},
                              {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION,
                                                    EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)}}}};
    run["timestamp"] = report.run.timestamp ? json(*report.run.timestamp) : json(nullptr);

    return {{"adequacy", adequacy_json(report.adequacy)},
            {"factor_models", factor_models_json(report.spec, report.factor_models)},
            {"canonical", canonical_json(report.spec, report.canonical, report.factor_weights,
                                         report.hazard_weights)},
            {"correlations", correlations_json(report.correlations)},
            {"risk_hazard_pairs", std::move(pairs)},
            {"rank_centers", std::move(centers)},
            {"manova", manova_json(report.spec, report.manova)},
            {"coefficient_tests", coefficient_tests_json(report.coefficient_tests)},
            {"regression_r_squared", std::move(r2)},
            {"warnings", warnings_json(report.warnings)},
            {"run", std::move(run)}};
}

namespace {

void serialize(const json &value, int indent, int depth, std::string &out) {
    const bool pretty = indent >= 0;
    auto newline = [&](int level) {
        if (pretty) {
            out += '\n';
            out.append(static_cast<std::size_t>(level * indent), ' ');
        }
    };
    switch (value.type()) {
    case json::value_t::object: {
        if (value.empty()) {
            out += "{}";
            return;
        }
        out += '{';
        bool first = true;
        for (const auto &[key, item] : value.items()) {
            if (!first) {
                out += ',';
            }
            first = false;
            newline(depth + 1);
            out += json(key).dump();
            out += pretty ? ": " : ":";
            serialize(item, indent, depth + 1, out);
        }
        newline(depth);
        out += '}';
        return;
    }
    case json::value_t::array: {
        if (value.empty()) {
            out += "[]";
            return;
        }
        out += '[';
        for (std::size_t i = 0; i < value.size(); ++i) {
            if (i > 0) {
                out += ',';
            }
            newline(depth + 1);
            serialize(value[i], indent, depth + 1, out);
        }
        newline(depth);
        out += ']';
        return;
    }
    case json::value_t::number_float: {
        const double v = value.get<double>();
        if (!std::isfinite(v)) {
            out += "null";
            return;
        }
        // fmt's default float format is the shortest string that round-trips.
        auto text = fmt::format("{}", v);
        if (text.find_first_of(".e") == std::string::npos) {
            text += ".0";
        }
        out += text;
        return;
    }
    default:
        out += value.dump();
    }
}

} // namespace

std::string dump_json(const json &doc, int indent) {
    std::string out;
    serialize(doc, indent, 0, out);
    return out + "\n";
}

void write_text_file(const std::filesystem::path &path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw Error(ErrorCode::IoFailure, "failed writing " + path.string());
    }
}

std::string scores_csv(const RiskScores &scores) {
    std::string out = "region_id";
    for (const auto &name : scores.factor_names) {
        out += "," + csv::escape(name);
    }
    out += ",risk_index,hazard_index,rank\n";

    std::vector<std::size_t> order(scores.regions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores.regions[a] < scores.regions[b]; });
    for (const auto i : order) {
        const auto idx = static_cast<Eigen::Index>(i);
        out += csv::escape(scores.regions[i]);
        for (Eigen::Index k = 0; k < scores.factor_scores.cols(); ++k) {
            out += "," + format_g6(scores.factor_scores(idx, k));
        }
        out += "," + format_g6(scores.risk_index(idx)) + "," + format_g6(scores.hazard_index(idx)) +
               "," + std::to_string(scores.rank[i]) + "\n";
    }
    return out;
}

void write_scores_csv(const RiskScores &scores, const std::filesystem::path &path) {
    write_text_file(path, scores_csv(scores));
}

json choropleth_geojson(const std::vector<Region> &regions, const RiskScores &scores) {
    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < scores.regions.size(); ++i) {
        row_of.emplace(scores.regions[i], i);
    }
    std::unordered_map<std::string, bool> has_geometry;
    for (const auto &region : regions) {
        has_geometry[region.region_id] = true;
    }
    for (const auto &id : scores.regions) {
        if (!has_geometry.contains(id)) {
            throw Error(ErrorCode::RegionWithoutGeometry, "scored region '" + id + "' has no geometry");
        }
    }
    const int bins = static_cast<int>(scores.centers.size());
    json features = json::array();
    for (const auto &region : regions) {
        const auto it = row_of.find(region.region_id);
        if (it == row_of.end()) {
            throw Error(ErrorCode::RegionWithoutGeometry,
                        "region '" + region.region_id + "' is missing from the scores");
        }
        const auto i = it->second;
        const auto idx = static_cast<Eigen::Index>(i);
        json feature = region.feature;
        if (!feature.contains("properties") || !feature["properties"].is_object()) {
            feature["properties"] = json::object();
        }
        auto &props = feature["properties"];
        props["risk_index"] = json_number(scores.risk_index(idx));
        props["hazard_index"] = json_number(scores.hazard_index(idx));
        props["rank"] = scores.rank[i];
        props["rank_color"] = std::string(rank_color(scores.rank[i], bins));
        features.push_back(std::move(feature));
    }
    return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

void write_choropleth_geojson(const std::vector<Region> &regions, const RiskScores &scores,
                              const std::filesystem::path &path) {
    write_text_file(path, dump_json(choropleth_geojson(regions, scores), -1));
}

void write_report_json(const AnalysisReport &report, const std::filesystem::path &path) {
    write_text_file(path, dump_json(to_json(report)));
}

} // namespace riskdex
