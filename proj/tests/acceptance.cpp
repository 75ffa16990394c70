// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "oracles.hpp"

#include "riskdex/canonical.hpp"
#include "riskdex/composite.hpp"
#include "riskdex/factor_model.hpp"
#include "riskdex/pipeline.hpp"
#include "riskdex/preprocess.hpp"
#include "riskdex/regression.hpp"
#include "riskdex/synthetic.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace riskdex;

namespace {

// Pinned tolerances.
constexpr double kNormAffineTol = 1e-12;
constexpr double kNormSeconds = 1.0;
constexpr double kChi2IdentityTol = 1e-10;
constexpr double kKmoTwoTol = 1e-10;
constexpr double kAdequacyOracleTol = 1e-8;
constexpr double kLoadingRecoveryTol = 0.03;
constexpr double kExactIdTol = 1e-10;
constexpr double kWeightSumTol = 1e-10;
constexpr double kCcaMargin = -1e-9;
constexpr double kCcaBruteTol = 1e-6;
constexpr double kCcaScaleTol = 1e-8;
constexpr double kWcssTol = 1e-12;
constexpr double kKmeansSeconds = 0.1;
constexpr double kCoefTol = 1e-10;
constexpr double kWilksPTol = 1e-9;
constexpr int kNullRejectMax = 10;
constexpr double kRunSeconds = 10.0;
constexpr double kPlantedR = 0.9;
constexpr double kPlantedWeightTol = 0.05;

const fs::path kFixture = RISKDEX_FIXTURE_DIR;

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool condition, const std::string &what) {
        if (!condition && ok) {
            detail = what;
        }
        ok = ok && condition;
    }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Matrix to_matrix(const oracle::Mat &m) {
    Matrix out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m[0].size()));
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m[0].size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j];
        }
    }
    return out;
}

oracle::Mat one_factor(std::mt19937_64 &rng, int n, const std::vector<double> &loadings) {
    std::normal_distribution<double> normal(0.0, 1.0);
    oracle::Mat data(static_cast<std::size_t>(n), std::vector<double>(loadings.size()));
    for (auto &row : data) {
        const double f = normal(rng);
        for (std::size_t j = 0; j < loadings.size(); ++j) {
            row[j] = loadings[j] * f + std::sqrt(1.0 - loadings[j] * loadings[j]) * normal(rng);
        }
    }
    return data;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

PipelineConfig fixture_config(const fs::path &dir) { return load_config(dir / "config.yaml"); }

// 1. Min-max normalisation on every fixture column.
Check normalization() {
    Check c;
    const auto start = std::chrono::steady_clock::now();
    const auto config = fixture_config(kFixture);
    const auto inputs = load_inputs(config);
    const auto normalized = normalize(inputs.table);
    for (const auto &column : inputs.table.columns()) {
        const auto &z = normalized.table.column(column.id).values;
        const auto [lo, hi] = std::minmax_element(column.values.begin(), column.values.end());
        for (std::size_t i = 0; i < z.size(); ++i) {
            c.require(z[i] >= 0.0 && z[i] <= 1.0, column.id + " out of [0,1]");
            if (column.values[i] == *lo) {
                c.require(z[i] == 0.0, column.id + " min not 0");
            }
            if (column.values[i] == *hi) {
                c.require(z[i] == 1.0, column.id + " max not 1");
            }
        }
        std::vector<double> affine;
        for (double v : column.values) {
            affine.push_back(3.7 * v - 12.25);
        }
        const auto za = normalize_column(affine);
        for (std::size_t i = 0; i < z.size(); ++i) {
            c.require(std::abs(za[i] - z[i]) <= kNormAffineTol, column.id + " not affine invariant");
        }
    }
    const double elapsed = seconds_since(start);
    c.require(elapsed < kNormSeconds, fmt::format("took {:.3f}s", elapsed));
    if (c.ok) {
        c.detail = fmt::format("{} columns, {:.3f}s", inputs.table.columns().size(), elapsed);
    }
    return c;
}

// 2. Bartlett and KMO.
Check adequacy_diagnostics() {
    Check c;
    Matrix h(16, 5);
    for (int i = 0; i < 16; ++i) {
        for (int j = 0; j < 5; ++j) {
            h(i, j) = (__builtin_popcount(static_cast<unsigned>(i & (j + 1))) % 2) ? -1.0 : 1.0;
        }
    }
    const auto identity = bartlett_sphericity(h);
    c.require(std::abs(identity.chi2) <= kChi2IdentityTol, "identity chi2 not 0");
    c.require(identity.p_value == 1.0, "identity p not 1");

    std::mt19937_64 rng(2002);
    double worst_kmo2 = 0.0;
    for (int t = 0; t < 20; ++t) {
        auto d = oracle::random_matrix(rng, 50, 2);
        for (auto &row : d) {
            row[1] += 0.1 * t * row[0];
        }
        worst_kmo2 = std::max(worst_kmo2, std::abs(kmo(to_matrix(d)) - 0.5));
    }
    c.require(worst_kmo2 <= kKmoTwoTol, "p=2 KMO not 0.5");

    double worst_chi = 0.0, worst_kmo = 0.0;
    for (int t = 0; t < 20; ++t) {
        auto d = oracle::random_matrix(rng, 200, 6);
        for (auto &row : d) {
            row[1] += 0.5 * row[0];
            row[2] += 0.3 * row[0] - 0.2 * row[5];
            row[4] += 0.4 * row[3];
        }
        const Matrix m = to_matrix(d);
        worst_chi = std::max(worst_chi, std::abs(bartlett_sphericity(m).chi2 - oracle::bartlett(d).chi2));
        worst_kmo = std::max(worst_kmo, std::abs(kmo(m) - oracle::kmo(d)));
    }
    c.require(worst_chi <= kAdequacyOracleTol, fmt::format("chi2 oracle gap {:.3g}", worst_chi));
    c.require(worst_kmo <= kAdequacyOracleTol, fmt::format("KMO oracle gap {:.3g}", worst_kmo));
    if (c.ok) {
        c.detail = fmt::format("chi2 gap {:.2g}, KMO gap {:.2g}", worst_chi, worst_kmo);
    }
    return c;
}

// 3. Factor loading recovery, exact identification, weight sums.
Check cfa_recovery() {
    Check c;
    std::mt19937_64 rng(3003);
    const auto fit = fit_single_factor(to_matrix(one_factor(rng, 20000, {0.9, 0.8, 0.7})));
    const double planted[] = {0.9, 0.8, 0.7};
    double worst = 0.0;
    for (int j = 0; j < 3; ++j) {
        worst = std::max(worst, std::abs(fit.loadings(j) - planted[j]));
    }
    c.require(worst <= kLoadingRecoveryTol, fmt::format("loading gap {:.4f}", worst));

    for (int t = 0; t < 20; ++t) {
        const Matrix pair = to_matrix(one_factor(rng, 300, {0.85, 0.55}));
        const double r = stats::correlation(pair)(0, 1);
        const auto two = fit_single_factor(pair);
        c.require(std::abs(two.loadings(0) * two.loadings(1) - r) <= kExactIdTol, "lambda1*lambda2 != r");
    }

    const auto config = fixture_config(kFixture);
    const auto result = compute(config, Stage::cfa);
    for (const auto &f : result.model.factors) {
        c.require(std::abs(f.weights.weights.sum() - 1.0) <= kWeightSumTol, f.name + " weights do not sum to 1");
    }
    if (c.ok) {
        c.detail = fmt::format("max loading gap {:.4f}", worst);
    }
    return c;
}

// 4. Canonical correlation optimality.
Check cca_optimality() {
    Check c;
    std::mt19937_64 rng(4004);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> scale(0.05, 20.0), shift(-10.0, 10.0);
    double worst_brute = 0.0, worst_margin = 1.0, worst_scale = 0.0;
    for (int t = 0; t < 20; ++t) {
        auto x = oracle::random_matrix(rng, 50, 3);
        auto y = oracle::random_matrix(rng, 50, 3);
        for (std::size_t i = 0; i < 50; ++i) {
            y[i][0] += 0.3 * x[i][0] + 0.2 * x[i][2];
            y[i][2] += 0.25 * x[i][1];
        }
        const Matrix mx = to_matrix(x), my = to_matrix(y);
        const auto sol = cca(mx, my);
        const double rho = sol.rho();
        for (int k = 0; k < 1000; ++k) {
            std::vector<double> u(3), v(3);
            for (auto &e : u) {
                e = normal(rng);
            }
            for (auto &e : v) {
                e = normal(rng);
            }
            worst_margin = std::min(worst_margin, rho - std::abs(oracle::directional_correlation(x, y, u, v)));
        }
        worst_brute = std::max(worst_brute, std::abs(rho - oracle::brute_force_cca(x, y, rng)));

        Matrix sx = mx, sy = my;
        for (Eigen::Index j = 0; j < 3; ++j) {
            sx.col(j) = sx.col(j).array() * scale(rng) + shift(rng);
            sy.col(j) = sy.col(j).array() * scale(rng) + shift(rng);
        }
        worst_scale = std::max(worst_scale, std::abs(cca(sx, sy).rho() - rho));

        const auto fw = factor_weights(sol.first().a);
        const auto hw = hazard_weights(sol.first().b);
        c.require(std::abs(fw.sum() - 1.0) <= kWeightSumTol, "factor weights do not sum to 1");
        c.require(std::abs(hw.sum() - 1.0) <= kWeightSumTol, "hazard weights do not sum to 1");
    }
    c.require(worst_margin >= kCcaMargin, fmt::format("random pair beats rho by {:.3g}", -worst_margin));
    c.require(worst_brute <= kCcaBruteTol, fmt::format("brute-force gap {:.3g}", worst_brute));
    c.require(worst_scale <= kCcaScaleTol, fmt::format("scale gap {:.3g}", worst_scale));
    if (c.ok) {
        c.detail = fmt::format("brute gap {:.2g}, min margin {:.3g}, scale gap {:.2g}", worst_brute, worst_margin,
                               worst_scale);
    }
    return c;
}

// Minimum-WCSS contiguous partition labels by exhaustive search.
std::vector<int> exhaustive_labels(const std::vector<double> &values, int groups) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> sorted;
    for (auto i : order) {
        sorted.push_back(values[i]);
    }
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_starts, starts{0};
    std::function<void(std::size_t, int)> recurse = [&](std::size_t from, int remaining) {
        if (remaining == 0) {
            const double w = oracle::partition_wcss(sorted, starts);
            if (w < best) {
                best = w;
                best_starts = starts;
            }
            return;
        }
        for (std::size_t s = from; s + static_cast<std::size_t>(remaining) <= sorted.size(); ++s) {
            starts.push_back(s);
            recurse(s + 1, remaining - 1);
            starts.pop_back();
        }
    };
    recurse(1, groups - 1);
    std::vector<int> labels(values.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        int g = 0;
        while (g + 1 < groups && best_starts[static_cast<std::size_t>(g + 1)] <= k) {
            ++g;
        }
        labels[order[k]] = g;
    }
    return labels;
}

// 5. Exact 1D k-means.
Check kmeans_exactness() {
    Check c;
    std::mt19937_64 rng(5005);
    std::uniform_int_distribution<int> size(4, 12);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const int n = size(rng);
        const int g = std::uniform_int_distribution<int>(1, std::min(4, n))(rng);
        std::vector<double> values(static_cast<std::size_t>(n));
        for (auto &v : values) {
            v = u(rng);
        }
        const auto km = kmeans_1d(values, g);
        worst = std::max(worst, std::abs(km.wcss - oracle::exhaustive_kmeans_wcss(values, g)));
        c.require(km.assignment == exhaustive_labels(values, g), "partition differs from exhaustive optimum");
    }
    c.require(worst <= kWcssTol, fmt::format("WCSS gap {:.3g}", worst));

    const auto dir = fs::temp_directory_path() / "riskdex_acceptance_514";
    fs::remove_all(dir);
    synthetic::Options opts;
    opts.regions = 514;
    const auto fixture = synthetic::write_fixture(dir, opts);
    const auto result = compute(fixture_config(dir), Stage::index);
    const auto &risk = result.scores.risk_index;
    for (Eigen::Index i = 0; i < risk.size(); ++i) {
        for (Eigen::Index j = 0; j < risk.size(); ++j) {
            if (risk(i) < risk(j)) {
                c.require(result.scores.rank[static_cast<std::size_t>(i)] <=
                              result.scores.rank[static_cast<std::size_t>(j)],
                          "rank not monotone in risk index");
            }
        }
    }
    const std::vector<double> values(risk.data(), risk.data() + risk.size());
    const auto start = std::chrono::steady_clock::now();
    (void)kmeans_1d(values, 5);
    const double elapsed = seconds_since(start);
    c.require(elapsed < kKmeansSeconds, fmt::format("n=514 took {:.4f}s", elapsed));
    fs::remove_all(dir);
    if (c.ok) {
        c.detail = fmt::format("100 trials, WCSS gap {:.2g}, n=514 in {:.4f}s", worst, elapsed);
    }
    return c;
}

// 6. Multivariate regression and MANOVA.
Check regression_checks() {
    Check c;
    std::mt19937_64 rng(6006);
    const auto zo = oracle::random_matrix(rng, 40, 4);
    const auto yo = oracle::random_matrix(rng, 40, 3);
    const auto fit = fit_mv_regression(to_matrix(zo), to_matrix(yo));
    double worst = 0.0;
    for (int k = 0; k < 3; ++k) {
        const auto beta = oracle::ols(zo, oracle::column(yo, k));
        for (int j = 0; j < 5; ++j) {
            worst = std::max(worst, std::abs(fit.coefficients(j, k) - beta[static_cast<std::size_t>(j)]));
        }
    }
    c.require(worst <= kCoefTol, fmt::format("OLS oracle gap {:.3g}", worst));

    Matrix b0(5, 3);
    b0.setRandom();
    Matrix design(40, 5);
    design << Vector::Ones(40), to_matrix(zo);
    const auto exact = fit_mv_regression(to_matrix(zo), design * b0);
    c.require((exact.coefficients - b0).cwiseAbs().maxCoeff() <= kCoefTol, "planted B not recovered");
    c.require(exact.residuals.cwiseAbs().maxCoeff() <= kCoefTol, "exact data has residuals");

    auto y1 = oracle::random_matrix(rng, 40, 1);
    for (std::size_t i = 0; i < 40; ++i) {
        y1[i][0] += 0.3 * zo[i][2];
    }
    const std::vector<std::string> names{"z0", "z1", "z2", "z3"};
    const auto rows = manova_per_predictor(to_matrix(zo), to_matrix(y1), names);
    double worst_p = 0.0;
    const double dfe = 40.0 - 4.0 - 1.0;
    const double sse = oracle::ols_sse(zo, oracle::column(y1, 0));
    for (std::size_t j = 0; j < 4; ++j) {
        const double sser = oracle::ols_sse(oracle::drop_column(zo, j), oracle::column(y1, 0));
        const double f = (sser - sse) / (sse / dfe);
        const double p = boost::math::cdf(boost::math::complement(boost::math::fisher_f(1.0, dfe), f));
        worst_p = std::max(worst_p, std::abs(rows[j].p_value - p));
    }
    c.require(worst_p <= kWilksPTol, fmt::format("partial-F p gap {:.3g}", worst_p));

    int rejections = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const auto z = oracle::random_matrix(rng, 500, 2);
        auto y = oracle::random_matrix(rng, 500, 3);
        for (std::size_t i = 0; i < 500; ++i) {
            for (auto &v : y[i]) {
                v += 0.5 * z[i][0];
            }
        }
        const std::vector<std::string> two{"signal", "null"};
        rejections += manova_per_predictor(to_matrix(z), to_matrix(y), two)[1].p_value < 0.05 ? 1 : 0;
    }
    c.require(rejections <= kNullRejectMax, fmt::format("{} null rejections", rejections));
    if (c.ok) {
        c.detail = fmt::format("coef gap {:.2g}, p gap {:.2g}, {} / 100 null rejections", worst, worst_p, rejections);
    }
    return c;
}

// 7. Significance cell rendering.
Check table_cells() {
    Check c;
    c.require(format_p_value(0.0033) == "0.0033*", "0.0033 cell");
    c.require(format_p_value(0.0526) == "0.0526**", "0.0526 cell");
    c.require(format_p_value(0.7442) == "0.7442", "0.7442 cell");
    if (c.ok) {
        c.detail = "0.0033* 0.0526** 0.7442";
    }
    return c;
}

int run_cli(const std::string &args) {
    const int status = std::system((std::string(RISKDEX_CLI) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 8. Byte-identical reruns.
Check determinism() {
    Check c;
    const auto base = fs::temp_directory_path() / "riskdex_acceptance_det";
    fs::remove_all(base);
    double slowest = 0.0;
    for (const char *name : {"a", "b"}) {
        const auto start = std::chrono::steady_clock::now();
        const int code = run_cli("run -c " + (kFixture / "config.yaml").string() + " --out " + (base / name).string());
        slowest = std::max(slowest, seconds_since(start));
        c.require(code == 0, fmt::format("run exited {}", code));
    }
    std::set<std::string> names;
    for (const auto &entry : fs::directory_iterator(base / "a")) {
        names.insert(entry.path().filename().string());
    }
    for (const char *required : {"scores.csv", "regions_ranked.geojson", "report.json"}) {
        c.require(names.contains(required), std::string("missing ") + required);
    }
    for (const auto &name : names) {
        c.require(slurp(base / "a" / name) == slurp(base / "b" / name), name + " differs");
    }
    c.require(slowest < kRunSeconds, fmt::format("run took {:.2f}s", slowest));
    fs::remove_all(base);
    if (c.ok) {
        c.detail = fmt::format("{} artifacts identical, slowest run {:.2f}s", names.size(), slowest);
    }
    return c;
}

// 9. Planted-truth end to end.
Check planted_truth() {
    Check c;
    const auto dir = fs::temp_directory_path() / "riskdex_acceptance_planted";
    fs::remove_all(dir);
    synthetic::Options opts;
    opts.regions = 514;
    opts.seed = 909;
    const auto fixture = synthetic::write_fixture(dir, opts);
    const auto result = compute(fixture_config(dir), Stage::index);
    double r = std::nan("");
    for (const auto &corr : result.correlations) {
        if (corr.key == "overall") {
            r = corr.r;
        }
    }
    c.require(r >= kPlantedR, fmt::format("risk-hazard r = {:.4f}", r));
    double worst = 0.0;
    for (std::size_t k = 0; k < fixture.planted_factor_weights.size(); ++k) {
        worst = std::max(worst, std::abs(result.factor_weights(static_cast<Eigen::Index>(k)) -
                                         fixture.planted_factor_weights[k]));
    }
    c.require(worst <= kPlantedWeightTol, fmt::format("factor weight gap {:.4f}", worst));
    fs::remove_all(dir);
    if (c.ok) {
        c.detail = fmt::format("r = {:.4f}, max weight gap {:.4f}", r, worst);
    }
    return c;
}

} // namespace

int main() {
    spdlog::set_level(spdlog::level::err);
    const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
        {"normalization", normalization},
        {"bartlett/kmo", adequacy_diagnostics},
        {"cfa recovery", cfa_recovery},
        {"cca optimality", cca_optimality},
        {"1d k-means", kmeans_exactness},
        {"multivariate regression", regression_checks},
        {"significance table cells", table_cells},
        {"end-to-end determinism", determinism},
        {"planted-truth end-to-end", planted_truth},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check c;
        try {
            c = criteria[i].second();
        } catch (const std::exception &e) {
            c = {false, std::string("exception: ") + e.what()};
        }
        failures += c.ok ? 0 : 1;
        std::cout << fmt::format("[{}] {} {}: {}\n", c.ok ? "PASS" : "FAIL", i + 1, criteria[i].first, c.detail);
    }
    std::cout << fmt::format("{} / {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failures),
                             criteria.size());
    return failures == 0 ? 0 : 1;
}
