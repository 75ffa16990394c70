#include "doctest.h"
#include "oracles.hpp"

#include "riskdex/error.hpp"
#include "riskdex/preprocess.hpp"

#include <cmath>
#include <random>

using namespace riskdex;

namespace {

ErrorCode code_of(const auto &fn) {
    try {
        fn();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("expected riskdex::Error");
    return ErrorCode::IoFailure;
}

// Columns 1..p of a Sylvester-Hadamard matrix: zero mean and mutually
// orthogonal, so the sample correlation is exactly the identity.
Matrix orthogonal_design(int log2n, int p) {
    const int n = 1 << log2n;
    Matrix h(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            h(i, j) = (__builtin_popcount(static_cast<unsigned>(i & j)) % 2) ? -1.0 : 1.0;
        }
    }
    return h.block(0, 1, n, p);
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

oracle::Mat one_factor_data(std::mt19937_64 &rng, int n, const std::vector<double> &loadings) {
    std::normal_distribution<double> normal(0.0, 1.0);
    oracle::Mat data(n, std::vector<double>(loadings.size()));
    for (auto &row : data) {
        const double f = normal(rng);
        for (std::size_t j = 0; j < loadings.size(); ++j) {
            row[j] = loadings[j] * f + std::sqrt(1.0 - loadings[j] * loadings[j]) * normal(rng);
        }
    }
    return data;
}

} // namespace

TEST_CASE("min-max examples") {
    CHECK(normalize_column(std::vector<double>{0, 5, 10}) == std::vector<double>{0.0, 0.5, 1.0});
    const auto v = normalize_column(std::vector<double>{2, 4, 8});
    CHECK(v[0] == 0.0);
    CHECK(std::abs(v[1] - 1.0 / 3.0) < 1e-15);
    CHECK(v[2] == 1.0);
    CHECK(code_of([] { (void)normalize_column(std::vector<double>{7, 7, 7}); }) == ErrorCode::DegenerateColumn);
}

TEST_CASE("normalisation keeps the observed range") {
    ColumnRange range;
    (void)normalize_column(std::vector<double>{3, -1, 9}, &range);
    CHECK(range.min == -1.0);
    CHECK(range.max == 9.0);
}

TEST_CASE("normalisation is idempotent and affine invariant") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(30);
        for (auto &v : x) {
            v = u(rng);
        }
        const auto once = normalize_column(x);
        CHECK(normalize_column(once) == once);
        const double a = std::abs(u(rng)) + 0.1;
        const double b = u(rng);
        std::vector<double> y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            y[i] = a * x[i] + b;
        }
        const auto affine = normalize_column(y);
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(std::abs(affine[i] - once[i]) < 1e-12);
            CHECK(once[i] >= 0.0);
            CHECK(once[i] <= 1.0);
        }
    }
}

TEST_CASE("table normalisation covers every column") {
    const auto table = parse_indicator_table("region_id,a,b\nR1,1,10\nR2,2,30\nR3,3,20\n", MissingPolicy::reject);
    const auto normalized = normalize(table);
    CHECK(normalized.table.column("a").values == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(normalized.table.column("b").values == std::vector<double>{0.0, 1.0, 0.5});
    CHECK(normalized.range("b").max == 30.0);
}

TEST_CASE("identity correlation gives chi2 0 and p 1") {
    const auto result = bartlett_sphericity(orthogonal_design(4, 5));
    CHECK(std::abs(result.chi2) <= 1e-10);
    CHECK(result.df == 10);
    CHECK(result.p_value == 1.0);
}

TEST_CASE("Bartlett matches the direct formula on planted data") {
    std::mt19937_64 rng(100);
    const auto data = one_factor_data(rng, 100, {0.707, 0.707, 0.707});
    const auto expected = oracle::bartlett(data);
    const auto result = bartlett_sphericity(to_matrix(data));
    CHECK(std::abs(result.chi2 - expected.chi2) < 1e-8);
    CHECK(result.df == expected.df);
    CHECK(result.p_value < 1e-6);
}

TEST_CASE("Bartlett and KMO match oracles on random data") {
    std::mt19937_64 rng(200);
    for (int trial = 0; trial < 5; ++trial) {
        auto data = oracle::random_matrix(rng, 200, 6);
        for (auto &row : data) {
            row[1] += 0.6 * row[0];
            row[4] += 0.4 * row[3] - 0.3 * row[2];
        }
        CHECK(std::abs(bartlett_sphericity(to_matrix(data)).chi2 - oracle::bartlett(data).chi2) < 1e-8);
        CHECK(std::abs(kmo(to_matrix(data)) - oracle::kmo(data)) < 1e-8);
    }
}

TEST_CASE("single column has no sphericity test") {
    CHECK(code_of([] { (void)bartlett_sphericity(orthogonal_design(3, 1)); }) == ErrorCode::InsufficientRows);
}

TEST_CASE("KMO of two columns is one half") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        auto data = oracle::random_matrix(rng, 40, 2);
        for (auto &row : data) {
            row[1] += 0.3 * trial * row[0];
        }
        CHECK(std::abs(kmo(to_matrix(data)) - 0.5) < 1e-10);
    }
}

TEST_CASE("planted one-factor data has high KMO") {
    std::mt19937_64 rng(5000);
    const auto data = one_factor_data(rng, 5000, std::vector<double>(6, 0.8));
    const double value = kmo(to_matrix(data));
    CHECK(value > 0.8);
    CHECK(std::abs(value - oracle::kmo(data)) < 1e-10);
}

TEST_CASE("duplicated columns are singular") {
    std::mt19937_64 rng(9);
    Matrix data = to_matrix(oracle::random_matrix(rng, 50, 3));
    data.col(2) = data.col(0);
    CHECK(code_of([&] { (void)bartlett_sphericity(data); }) == ErrorCode::SingularCorrelation);
    CHECK(code_of([&] { (void)kmo(data); }) == ErrorCode::SingularCorrelation);
}

TEST_CASE("adequacy gate thresholds") {
    const auto identity = adequacy(orthogonal_design(4, 4));
    CHECK_FALSE(identity.passed);
    CHECK(identity.scope == "joint");

    std::mt19937_64 rng(77);
    const auto planted = adequacy(to_matrix(one_factor_data(rng, 500, std::vector<double>(5, 0.8))), "exposure");
    CHECK(planted.passed);
    CHECK(planted.scope == "exposure");
    CHECK(planted.bartlett_p < kBartlettAlpha);
    CHECK(planted.kmo >= kMinimumKmo);
}
