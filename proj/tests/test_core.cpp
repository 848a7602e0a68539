#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <vector>

#include "birads/core.hpp"

using namespace birads;

TEST_CASE("coarse collapses B4 subdivisions and nothing else") {
    CHECK(coarse(BiRadsCategory::B4a) == BiRadsCategory::B4);
    CHECK(coarse(BiRadsCategory::B4b) == BiRadsCategory::B4);
    CHECK(coarse(BiRadsCategory::B4c) == BiRadsCategory::B4);
    CHECK(coarse(BiRadsCategory::B5) == BiRadsCategory::B5);
    CHECK(coarse(BiRadsCategory::B2) == BiRadsCategory::B2);
}

TEST_CASE("coarse is idempotent over the whole scale") {
    for (int i = 0; i <= 9; ++i) {
        const auto b = static_cast<BiRadsCategory>(i);
        CHECK(coarse(coarse(b)) == coarse(b));
    }
}

TEST_CASE("pathology consistency rule") {
    CHECK(consistent_with_pathology(BiRadsCategory::B5, Pathology::Malignant) ==
          Consistency::Consistent);
    CHECK(consistent_with_pathology(BiRadsCategory::B2, Pathology::Malignant) ==
          Consistency::Inconsistent);
    CHECK(consistent_with_pathology(BiRadsCategory::B4, Pathology::Benign) ==
          Consistency::Indeterminate);
    CHECK(consistent_with_pathology(BiRadsCategory::B4, Pathology::Malignant) ==
          Consistency::Indeterminate);
    CHECK_THROWS_AS(consistent_with_pathology(BiRadsCategory::B1, Pathology::Benign),
                    ArgumentError);
    CHECK_THROWS_AS(consistent_with_pathology(BiRadsCategory::B6, Pathology::Benign),
                    ArgumentError);
}

TEST_CASE("bands partition the mapper's output range into 4 + 2") {
    const std::vector<BiRadsCategory> range{
        BiRadsCategory::B2, BiRadsCategory::B3, BiRadsCategory::B4a,
        BiRadsCategory::B4b, BiRadsCategory::B4c, BiRadsCategory::B5};
    int benign = 0, malignant = 0;
    for (BiRadsCategory b : range) {
        CHECK(in_benign_band(b) != in_malignant_band(b));
        if (in_benign_band(b)) {
            ++benign;
            CHECK(consistent_with_pathology(b, Pathology::Benign) ==
                  Consistency::Consistent);
        } else {
            ++malignant;
            CHECK(consistent_with_pathology(b, Pathology::Malignant) ==
                  Consistency::Consistent);
        }
    }
    CHECK(benign == 4);
    CHECK(malignant == 2);
}

TEST_CASE("encode_features endpoint scaling and multi-hot") {
    const FeatureLayout layout = default_layout();
    MorphFeatures f;
    f.shape = {Shape::Round};
    f.margins = {Margins::Circumscribed};
    f.density = 1;
    f.subtlety = 5;
    f.view = View::CC;
    const FeatureVector v = encode_features(f, layout);
    REQUIRE(v.values.size() == layout.size());

    int hot = 0;
    for (std::size_t i = 0; i < 11; ++i)  // shape + margins slots
        if (v.values[i] == 1.0) ++hot;
    CHECK(hot == 2);
    CHECK(v.values[11] == 0.0);  // density 1 -> 0
    CHECK(v.values[12] == 1.0);  // subtlety 5 -> 1
    CHECK(v.values[13] == 0.0);  // CC

    f.density = 4;
    CHECK(encode_features(f, layout).values[11] == 1.0);
}

TEST_CASE("multi-valued shape sets give multiple hot slots") {
    const FeatureLayout layout = default_layout();
    MorphFeatures f;
    f.shape = {Shape::Irregular, Shape::Lobulated};
    f.margins = {Margins::Spiculated};
    f.density = 2;
    f.subtlety = 3;
    const FeatureVector v = encode_features(f, layout);
    int shape_hot = 0;
    for (std::size_t i = 0; i < 5; ++i)
        if (v.values[i] == 1.0) ++shape_hot;
    CHECK(shape_hot == 2);
}

TEST_CASE("encode_features rejects invalid descriptors") {
    const FeatureLayout layout = default_layout();
    MorphFeatures f;
    f.margins = {Margins::Other};
    f.shape = {};
    CHECK_THROWS_AS(encode_features(f, layout), ArgumentError);
    f.shape = {Shape::Oval};
    f.density = 7;
    CHECK_THROWS_AS(encode_features(f, layout), ArgumentError);
}

TEST_CASE("encode_features names the missing slot on a truncated layout") {
    FeatureLayout layout = default_layout();
    layout.slots.pop_back();  // drop "view"
    MorphFeatures f;
    f.shape = {Shape::Oval};
    f.margins = {Margins::Obscured};
    CHECK_THROWS_WITH_AS(encode_features(f, layout),
                         doctest::Contains("view"), EncodingError);
}

// Injectivity over the full cross-product of single-valued shape/margin sets
// x density x subtlety, brute-forced.
TEST_CASE("encode_features is injective for a fixed layout") {
    const FeatureLayout layout = default_layout();
    std::map<std::vector<double>, int> seen;
    int count = 0;
    for (Shape s : all_shapes)
        for (Margins m : all_margins)
            for (int d = 1; d <= 4; ++d)
                for (int su = 1; su <= 5; ++su) {
                    MorphFeatures f;
                    f.shape = {s};
                    f.margins = {m};
                    f.density = d;
                    f.subtlety = su;
                    ++seen[encode_features(f, layout).values];
                    ++count;
                }
    CHECK(static_cast<int>(seen.size()) == count);
}

TEST_CASE("layout hash changes with slot order") {
    FeatureLayout a = default_layout();
    FeatureLayout b = a;
    std::swap(b.slots[0], b.slots[1]);
    CHECK(a.hash() != b.hash());
    CHECK(a.hash() == default_layout().hash());
}
