#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "birads/uncertainty.hpp"

using namespace birads;

TEST_CASE("predictive entropy endpoints") {
    CHECK(predictive_entropy({0.5, 0.5}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(predictive_entropy({1.0, 0.0}) == 0.0);
    CHECK(predictive_entropy({0.0, 1.0}) == 0.0);
}

TEST_CASE("entropy at p_malignant = 0.02 matches the B3 cutoff") {
    const double h = predictive_entropy({0.98, 0.02});
    CHECK(h == doctest::Approx(0.1414).epsilon(1e-3));
}

TEST_CASE("entropy symmetry is exact and maximal at one half") {
    for (double p : {0.01, 0.1, 0.25, 0.3, 0.49, 0.5}) {
        const double a = predictive_entropy({p, 1.0 - p});
        const double b = predictive_entropy({1.0 - p, p});
        CHECK(a == b);
        if (p != 0.5) CHECK(a < 1.0);
    }
}

TEST_CASE("derived thresholds match the rounded published cutoffs") {
    const BandThresholds t = derive_thresholds();
    CHECK(std::abs(t.h_b3 - 0.1414) < 5e-4);
    CHECK(std::abs(t.h_b4a - 0.469) < 5e-4);
    CHECK(std::abs(t.h_b5 - 0.286) < 5e-4);
    CHECK(t.h_b2 == doctest::Approx(binary_entropy(0.005)));
}

TEST_CASE("threshold ordering") {
    const BandThresholds t = derive_thresholds();
    CHECK(t.h_b2 >= 0.0);
    CHECK(t.h_b2 < t.h_b3);
    CHECK(t.h_b3 < t.h_b4a);
    CHECK(t.h_b4a <= 1.0);
    CHECK(t.h_b5 > 0.0);
    CHECK(t.h_b5 < t.h_b4a);
}

TEST_CASE("derive_thresholds rejects an epsilon at or above the B3 cutoff") {
    CHECK_THROWS_AS(derive_thresholds(0.02), ArgumentError);
    CHECK_THROWS_AS(derive_thresholds(-0.1), ArgumentError);
}

TEST_CASE("probability mapper band table") {
    const MapperConfig cfg = default_mapper_config();
    auto map = [&](double p) {
        return map_birads_from_prob({1.0 - p, p}, cfg);
    };
    CHECK(map(0.0) == BiRadsCategory::B2);
    CHECK(map(0.005) == BiRadsCategory::B2);
    CHECK(map(0.01) == BiRadsCategory::B3);
    CHECK(map(0.02) == BiRadsCategory::B3);
    CHECK(map(0.05) == BiRadsCategory::B4a);
    CHECK(map(0.10) == BiRadsCategory::B4a);
    CHECK(map(0.3) == BiRadsCategory::B4b);
    CHECK(map(0.5) == BiRadsCategory::B4c);  // tie-break to the malignant branch
    CHECK(map(0.7) == BiRadsCategory::B4c);
    CHECK(map(0.95) == BiRadsCategory::B5);
    CHECK(map(0.97) == BiRadsCategory::B5);
    CHECK(map(1.0) == BiRadsCategory::B5);
}

TEST_CASE("entropy mapper decision rules") {
    const MapperConfig cfg = default_mapper_config();
    CHECK(map_birads_from_entropy(Pathology::Benign, 0.0, cfg) == BiRadsCategory::B2);
    CHECK(map_birads_from_entropy(Pathology::Benign, 0.30, cfg) == BiRadsCategory::B4a);
    CHECK(map_birads_from_entropy(Pathology::Benign, 0.8, cfg) == BiRadsCategory::B4b);
    // H2(0.97) = 0.194 <= h_b5, cross-checked against the probability mapper
    const double h97 = binary_entropy(0.97);
    CHECK(h97 == doctest::Approx(0.194).epsilon(1e-2));
    CHECK(map_birads_from_entropy(Pathology::Malignant, h97, cfg) == BiRadsCategory::B5);
    CHECK(map_birads_from_prob({0.03, 0.97}, cfg) == BiRadsCategory::B5);
    CHECK(map_birads_from_entropy(Pathology::Malignant, 0.9, cfg) == BiRadsCategory::B4c);
    CHECK_THROWS_AS(map_birads_from_entropy(Pathology::Benign, 1.5, cfg), ArgumentError);
    CHECK_THROWS_AS(map_birads_from_entropy(Pathology::Benign, -0.5, cfg), ArgumentError);
}

// Both mappers agree everywhere on a dense probability grid.
TEST_CASE("branch agreement on a 10001-point grid") {
    const MapperConfig cfg = default_mapper_config();
    for (int i = 0; i <= 10000; ++i) {
        const double p = i / 10000.0;
        const BiRadsCategory from_prob = map_birads_from_prob({1.0 - p, p}, cfg);
        const Pathology label = p >= 0.5 ? Pathology::Malignant : Pathology::Benign;
        const BiRadsCategory from_entropy =
            map_birads_from_entropy(label, binary_entropy(p), cfg);
        REQUIRE(from_prob == from_entropy);
    }
}

TEST_CASE("mapper output is monotone in p_malignant") {
    const MapperConfig cfg = default_mapper_config();
    const auto order = [](BiRadsCategory b) {
        switch (b) {
            case BiRadsCategory::B2:  return 0;
            case BiRadsCategory::B3:  return 1;
            case BiRadsCategory::B4a: return 2;
            case BiRadsCategory::B4b: return 3;
            case BiRadsCategory::B4c: return 4;
            case BiRadsCategory::B5:  return 5;
            default: return -1;
        }
    };
    int prev = 0;
    for (int i = 0; i <= 10000; ++i) {
        const double p = i / 10000.0;
        const int cur = order(map_birads_from_prob({1.0 - p, p}, cfg));
        REQUIRE(cur >= prev);
        prev = cur;
    }
    CHECK(prev == 5);
}

TEST_CASE("mapper band matches the malignancy side of the probability") {
    const MapperConfig cfg = default_mapper_config();
    for (int i = 0; i <= 1000; ++i) {
        const double p = i / 1000.0;
        const BiRadsCategory b = map_birads_from_prob({1.0 - p, p}, cfg);
        REQUIRE(in_malignant_band(b) == (p >= 0.5));
    }
}
