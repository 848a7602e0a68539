#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "birads/eval.hpp"

using namespace birads;

namespace {

double round2(double v) { return std::round(v * 100.0) / 100.0; }

std::vector<EvaluatedCase> uniform_stratum(std::size_t n_benign, std::size_t n_malignant,
                                           BiRadsCategory assigned) {
    std::vector<EvaluatedCase> cases;
    for (std::size_t i = 0; i < n_benign; ++i)
        cases.push_back({Pathology::Benign, assigned});
    for (std::size_t i = 0; i < n_malignant; ++i)
        cases.push_back({Pathology::Malignant, assigned});
    return cases;
}

LesionRecord record_with(BiRadsCategory b, Pathology p) {
    LesionRecord r;
    r.radiologist_birads = b;
    r.pathology = p;
    r.split = Split::Test;
    r.features.shape = {Shape::Oval};
    r.features.margins = {Margins::Obscured};
    return r;
}

}  // namespace

TEST_CASE("binary metrics on published count patterns") {
    // radiologist Benign row of the B2 table
    const ClassMetrics a = binary_metrics({3, 1, 0, 0});
    CHECK(round2(a.precision) == 75.00);
    CHECK(round2(a.recall) == 100.00);
    CHECK(round2(a.f1) == 85.71);

    // all-zero row when nothing is predicted positive
    const ClassMetrics b = binary_metrics({0, 0, 3, 1});
    CHECK(b.precision == 0.0);
    CHECK(b.recall == 0.0);
    CHECK(b.f1 == 0.0);

    // radiologist Malignant row of the B5 table
    const ClassMetrics c = binary_metrics({70, 5, 0, 0});
    CHECK(round2(c.precision) == 93.33);
    CHECK(round2(c.recall) == 100.00);
    CHECK(round2(c.f1) == 96.55);
}

TEST_CASE("B2 stratum reproduces the radiologist-side table") {
    const auto rep = stratum_report(BiRadsCategory::B2,
                                    uniform_stratum(3, 1, BiRadsCategory::B2));
    REQUIRE(rep.evaluable);
    CHECK(round2(rep.benign_row.precision) == 75.00);
    CHECK(round2(rep.benign_row.recall) == 100.00);
    CHECK(round2(rep.benign_row.f1) == 85.71);
    CHECK(rep.malignant_row.f1 == 0.0);
    CHECK(round2(rep.macro.f1) == 42.86);
    CHECK(round2(rep.accuracy) == 75.00);
}

TEST_CASE("B3 stratum reproduces the radiologist-side table") {
    const auto rep = stratum_report(BiRadsCategory::B3,
                                    uniform_stratum(58, 4, BiRadsCategory::B3));
    REQUIRE(rep.evaluable);
    CHECK(round2(rep.accuracy) == 93.55);
    CHECK(round2(rep.macro.f1) == 48.33);
    CHECK(round2(rep.benign_row.precision) == 93.55);
    CHECK(round2(rep.benign_row.f1) == 96.67);
}

TEST_CASE("B5 stratum reproduces the radiologist-side table") {
    const auto rep = stratum_report(BiRadsCategory::B5,
                                    uniform_stratum(5, 70, BiRadsCategory::B5));
    REQUIRE(rep.evaluable);
    CHECK(round2(rep.malignant_row.precision) == 93.33);
    CHECK(round2(rep.malignant_row.recall) == 100.00);
    CHECK(round2(rep.malignant_row.f1) == 96.55);
    CHECK(round2(rep.macro.f1) == 48.28);
    CHECK(round2(rep.accuracy) == 93.33);
}

TEST_CASE("perfect assigner scores 100 everywhere") {
    std::vector<EvaluatedCase> cases;
    for (int i = 0; i < 6; ++i) cases.push_back({Pathology::Benign, BiRadsCategory::B3});
    for (int i = 0; i < 6; ++i) cases.push_back({Pathology::Malignant, BiRadsCategory::B5});
    const auto rep = stratum_report(BiRadsCategory::B4, cases);
    CHECK(rep.accuracy == 100.0);
    CHECK(rep.macro.f1 == 100.0);
}

TEST_CASE("all-indeterminate stratum emits a non-evaluable report") {
    const auto rep = stratum_report(BiRadsCategory::B4,
                                    uniform_stratum(4, 3, BiRadsCategory::B4));
    CHECK_FALSE(rep.evaluable);
    CHECK(rep.n == 7);
    const auto empty = stratum_report(BiRadsCategory::B2, {});
    CHECK_FALSE(empty.evaluable);
    CHECK(empty.n == 0);
}

TEST_CASE("accuracy decomposes into recall-weighted class counts") {
    std::vector<EvaluatedCase> cases;
    // 5 benign: 3 in benign band, 2 in malignant band; 4 malignant: 1/3 split
    for (int i = 0; i < 3; ++i) cases.push_back({Pathology::Benign, BiRadsCategory::B3});
    for (int i = 0; i < 2; ++i) cases.push_back({Pathology::Benign, BiRadsCategory::B5});
    for (int i = 0; i < 1; ++i) cases.push_back({Pathology::Malignant, BiRadsCategory::B2});
    for (int i = 0; i < 3; ++i) cases.push_back({Pathology::Malignant, BiRadsCategory::B4c});
    const auto rep = stratum_report(BiRadsCategory::B3, cases);
    const double expect = (rep.benign_row.recall * 5 + rep.malignant_row.recall * 4) / 9.0;
    CHECK(rep.accuracy == doctest::Approx(expect).epsilon(1e-12));
    // macro rows are exact unweighted means, checked pre-rounding
    CHECK(rep.macro.precision ==
          doctest::Approx((rep.benign_row.precision + rep.malignant_row.precision) / 2));
    CHECK(rep.macro.f1 == (rep.benign_row.f1 + rep.malignant_row.f1) / 2);
}

TEST_CASE("radiologist consistency covers only B2, B3 and B5") {
    std::vector<LesionRecord> records;
    for (int i = 0; i < 5; ++i)
        records.push_back(record_with(BiRadsCategory::B5, Pathology::Benign));
    for (int i = 0; i < 70; ++i)
        records.push_back(record_with(BiRadsCategory::B5, Pathology::Malignant));
    for (int i = 0; i < 58; ++i)
        records.push_back(record_with(BiRadsCategory::B3, Pathology::Benign));
    for (int i = 0; i < 4; ++i)
        records.push_back(record_with(BiRadsCategory::B3, Pathology::Malignant));
    records.push_back(record_with(BiRadsCategory::B4, Pathology::Benign));
    records.push_back(record_with(BiRadsCategory::B0, Pathology::Benign));

    const auto acc = radiologist_consistency(records);
    CHECK(round2(acc.at(BiRadsCategory::B5)) == 93.33);
    CHECK(round2(acc.at(BiRadsCategory::B3)) == 93.55);
    CHECK_FALSE(acc.count(BiRadsCategory::B4));
    CHECK_FALSE(acc.count(BiRadsCategory::B0));
}

TEST_CASE("all-correct stratum scores 100 consistency") {
    std::vector<LesionRecord> records;
    for (int i = 0; i < 7; ++i)
        records.push_back(record_with(BiRadsCategory::B2, Pathology::Benign));
    CHECK(radiologist_consistency(records).at(BiRadsCategory::B2) == 100.0);
}

TEST_CASE("confusion matrix diagonal for an agreeing model") {
    std::vector<LesionRecord> records;
    std::vector<BiRadsCategory> model;
    records.push_back(record_with(BiRadsCategory::B2, Pathology::Benign));
    model.push_back(BiRadsCategory::B2);
    records.push_back(record_with(BiRadsCategory::B3, Pathology::Benign));
    model.push_back(BiRadsCategory::B3);
    records.push_back(record_with(BiRadsCategory::B4, Pathology::Malignant));
    model.push_back(BiRadsCategory::B4c);  // coarsens to B4
    records.push_back(record_with(BiRadsCategory::B5, Pathology::Malignant));
    model.push_back(BiRadsCategory::B5);

    const ConfusionMatrix m = confusion(records, model);
    CHECK(m.total() == 4);
    CHECK(m.counts[1][0] == 1);  // B2 row, B2 col
    CHECK(m.counts[2][1] == 1);
    CHECK(m.counts[3][2] == 1);
    CHECK(m.counts[4][3] == 1);
}

TEST_CASE("single B0 record lands in the B0 row") {
    std::vector<LesionRecord> records{record_with(BiRadsCategory::B0, Pathology::Malignant)};
    const ConfusionMatrix m = confusion(records, {BiRadsCategory::B5});
    CHECK(m.counts[0][3] == 1);
    CHECK(m.total() == 1);
}

TEST_CASE("confusion matches a hand-tabulated 10-record fixture") {
    const std::vector<std::pair<BiRadsCategory, BiRadsCategory>> fixture{
        {BiRadsCategory::B2, BiRadsCategory::B2}, {BiRadsCategory::B2, BiRadsCategory::B3},
        {BiRadsCategory::B3, BiRadsCategory::B2}, {BiRadsCategory::B3, BiRadsCategory::B3},
        {BiRadsCategory::B4, BiRadsCategory::B4a}, {BiRadsCategory::B4, BiRadsCategory::B4c},
        {BiRadsCategory::B4, BiRadsCategory::B5}, {BiRadsCategory::B5, BiRadsCategory::B5},
        {BiRadsCategory::B5, BiRadsCategory::B5}, {BiRadsCategory::B0, BiRadsCategory::B2}};
    std::vector<LesionRecord> records;
    std::vector<BiRadsCategory> model;
    for (const auto& [rad, mod] : fixture) {
        records.push_back(record_with(rad, Pathology::Benign));
        model.push_back(mod);
    }
    const ConfusionMatrix m = confusion(records, model);
    CHECK(m.counts[1][0] == 1);  // B2 -> B2
    CHECK(m.counts[1][1] == 1);  // B2 -> B3
    CHECK(m.counts[2][0] == 1);
    CHECK(m.counts[2][1] == 1);
    CHECK(m.counts[3][2] == 2);  // B4 -> B4a/B4c coarsened
    CHECK(m.counts[3][3] == 1);
    CHECK(m.counts[4][3] == 2);
    CHECK(m.counts[0][0] == 1);
    CHECK(m.total() == 10);

    // row sums equal per-stratum record counts
    std::size_t b4_row = 0;
    for (std::size_t c = 0; c < confusion_cols.size(); ++c) b4_row += m.counts[3][c];
    CHECK(b4_row == 3);
}

TEST_CASE("distribution histograms and marginals") {
    SUBCASE("empty input") {
        const DistributionTable t = distribution({}, {});
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t p = 0; p < 2; ++p)
                for (std::size_t c = 0; c < 5; ++c) CHECK(t.counts[a][p][c] == 0);
    }
    SUBCASE("single malignant B5 agreement") {
        std::vector<LesionRecord> records{record_with(BiRadsCategory::B5, Pathology::Malignant)};
        const DistributionTable t = distribution(records, {BiRadsCategory::B5});
        CHECK(t.at(Assigner::Radiologist, Pathology::Malignant, 4) == 1);
        CHECK(t.at(Assigner::Model, Pathology::Malignant, 4) == 1);
    }
    SUBCASE("marginals equal cohort sizes") {
        std::vector<LesionRecord> records;
        std::vector<BiRadsCategory> model;
        std::mt19937_64 g(3);
        const BiRadsCategory rad_pool[4]{BiRadsCategory::B2, BiRadsCategory::B3,
                                         BiRadsCategory::B4, BiRadsCategory::B5};
        const BiRadsCategory model_pool[4]{BiRadsCategory::B2, BiRadsCategory::B4a,
                                           BiRadsCategory::B4c, BiRadsCategory::B5};
        for (int i = 0; i < 37; ++i) {
            records.push_back(record_with(rad_pool[g() % 4],
                                          g() % 2 ? Pathology::Benign : Pathology::Malignant));
            model.push_back(model_pool[g() % 4]);
        }
        const DistributionTable t = distribution(records, model);
        for (Assigner a : {Assigner::Radiologist, Assigner::Model}) {
            std::size_t total = 0;
            for (std::size_t p = 0; p < 2; ++p)
                for (std::size_t c = 0; c < 5; ++c)
                    total += t.counts[static_cast<std::size_t>(a)][p][c];
            CHECK(total == records.size());
        }
    }
}
