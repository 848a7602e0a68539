// Domain vocabulary: BI-RADS scale, pathology labels, lesion records,
// morphological feature encoding and the pathology-consistency rule.
#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace birads {

struct EncodingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Full 10-value scale. The model-side mapper only ever emits
// {B2, B3, B4a, B4b, B4c, B5}; un-subdivided B4 appears on
// radiologist-assigned labels only.
enum class BiRadsCategory : std::uint8_t {
    B0, B1, B2, B3, B4, B4a, B4b, B4c, B5, B6
};

enum class Pathology : std::uint8_t { Benign, Malignant };

enum class Split : std::uint8_t { Train, Test };

enum class Consistency : std::uint8_t { Consistent, Inconsistent, Indeterminate };

inline const char* to_string(BiRadsCategory b) {
    switch (b) {
        case BiRadsCategory::B0:  return "B0";
        case BiRadsCategory::B1:  return "B1";
        case BiRadsCategory::B2:  return "B2";
        case BiRadsCategory::B3:  return "B3";
        case BiRadsCategory::B4:  return "B4";
        case BiRadsCategory::B4a: return "B4a";
        case BiRadsCategory::B4b: return "B4b";
        case BiRadsCategory::B4c: return "B4c";
        case BiRadsCategory::B5:  return "B5";
        case BiRadsCategory::B6:  return "B6";
    }
    return "?";
}

inline const char* to_string(Pathology p) {
    return p == Pathology::Benign ? "Benign" : "Malignant";
}

inline const char* to_string(Split s) {
    return s == Split::Train ? "train" : "test";
}

// B4a/B4b/B4c collapse to B4; identity elsewhere. Idempotent.
inline BiRadsCategory coarse(BiRadsCategory b) {
    switch (b) {
        case BiRadsCategory::B4a:
        case BiRadsCategory::B4b:
        case BiRadsCategory::B4c:
            return BiRadsCategory::B4;
        default:
            return b;
    }
}

// Benign truth belongs in {B2, B3, B4a, B4b}; malignant truth in {B4c, B5}.
// Un-subdivided B4 cannot be audited against pathology and is reported
// Indeterminate rather than forced into either band.
inline Consistency consistent_with_pathology(BiRadsCategory b, Pathology p) {
    switch (b) {
        case BiRadsCategory::B2:
        case BiRadsCategory::B3:
        case BiRadsCategory::B4a:
        case BiRadsCategory::B4b:
            return p == Pathology::Benign ? Consistency::Consistent
                                          : Consistency::Inconsistent;
        case BiRadsCategory::B4c:
        case BiRadsCategory::B5:
            return p == Pathology::Malignant ? Consistency::Consistent
                                             : Consistency::Inconsistent;
        case BiRadsCategory::B4:
        case BiRadsCategory::B0:
            return Consistency::Indeterminate;
        default:
            throw ArgumentError(std::string("unscored category ") + to_string(b));
    }
}

// True when the category carries a definite benign/malignant band.
inline bool in_benign_band(BiRadsCategory b) {
    return b == BiRadsCategory::B2 || b == BiRadsCategory::B3 ||
           b == BiRadsCategory::B4a || b == BiRadsCategory::B4b;
}

inline bool in_malignant_band(BiRadsCategory b) {
    return b == BiRadsCategory::B4c || b == BiRadsCategory::B5;
}

enum class Shape : std::uint8_t { Oval, Round, Irregular, Lobulated, Other };
enum class Margins : std::uint8_t {
    Circumscribed, Obscured, Microlobulated, Spiculated, IllDefined, Other
};
enum class View : std::uint8_t { CC, MLO };

inline constexpr std::array<Shape, 5> all_shapes{
    Shape::Oval, Shape::Round, Shape::Irregular, Shape::Lobulated, Shape::Other};
inline constexpr std::array<Margins, 6> all_margins{
    Margins::Circumscribed, Margins::Obscured, Margins::Microlobulated,
    Margins::Spiculated, Margins::IllDefined, Margins::Other};

inline const char* to_string(Shape s) {
    switch (s) {
        case Shape::Oval:      return "OVAL";
        case Shape::Round:     return "ROUND";
        case Shape::Irregular: return "IRREGULAR";
        case Shape::Lobulated: return "LOBULATED";
        case Shape::Other:     return "OTHER";
    }
    return "?";
}

inline const char* to_string(Margins m) {
    switch (m) {
        case Margins::Circumscribed:  return "CIRCUMSCRIBED";
        case Margins::Obscured:       return "OBSCURED";
        case Margins::Microlobulated: return "MICROLOBULATED";
        case Margins::Spiculated:     return "SPICULATED";
        case Margins::IllDefined:     return "ILL_DEFINED";
        case Margins::Other:          return "OTHER";
    }
    return "?";
}

struct MorphFeatures {
    std::set<Shape> shape;      // non-empty
    std::set<Margins> margins;  // non-empty
    int density = 1;            // 1..4
    int subtlety = 1;           // 1..5
    View view = View::CC;

    void validate() const {
        if (shape.empty()) throw ArgumentError("shape set is empty");
        if (margins.empty()) throw ArgumentError("margins set is empty");
        if (density < 1 || density > 4)
            throw ArgumentError("density out of range [1,4]: " + std::to_string(density));
        if (subtlety < 1 || subtlety > 5)
            throw ArgumentError("subtlety out of range [1,5]: " + std::to_string(subtlety));
    }
};

struct LesionRecord {
    std::string case_id;
    MorphFeatures features;
    BiRadsCategory radiologist_birads = BiRadsCategory::B0;
    Pathology pathology = Pathology::Benign;
    Split split = Split::Train;
};

// Ordered descriptor of which feature each vector slot encodes. Fixed and
// versioned inside the model file so trained models reject mismatched layouts.
struct FeatureLayout {
    std::vector<std::string> slots;

    std::size_t size() const { return slots.size(); }

    bool operator==(const FeatureLayout&) const = default;

    // FNV-1a over the slot names, reported on layout-mismatch refusals.
    std::uint64_t hash() const {
        std::uint64_t h = 1469598103934665603ull;
        for (const auto& s : slots) {
            for (unsigned char c : s) {
                h ^= c;
                h *= 1099511628211ull;
            }
            h ^= 0x1f;
            h *= 1099511628211ull;
        }
        return h;
    }
};

inline FeatureLayout default_layout() {
    FeatureLayout layout;
    for (Shape s : all_shapes)
        layout.slots.push_back(std::string("shape:") + to_string(s));
    for (Margins m : all_margins)
        layout.slots.push_back(std::string("margins:") + to_string(m));
    layout.slots.push_back("density");
    layout.slots.push_back("subtlety");
    layout.slots.push_back("view");
    return layout;
}

struct FeatureVector {
    std::vector<double> values;
};

// Multi-hot over the shape and margins sets, density scaled by (d-1)/3,
// subtlety by (s-1)/4, view CC=0 / MLO=1. Deterministic for a fixed layout.
inline FeatureVector encode_features(const MorphFeatures& f, const FeatureLayout& layout) {
    f.validate();
    FeatureVector out;
    out.values.assign(layout.size(), 0.0);
    auto slot_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < layout.slots.size(); ++i)
            if (layout.slots[i] == name) return i;
        throw EncodingError("layout has no slot named '" + name + "'");
    };
    for (Shape s : f.shape)
        out.values[slot_of(std::string("shape:") + to_string(s))] = 1.0;
    for (Margins m : f.margins)
        out.values[slot_of(std::string("margins:") + to_string(m))] = 1.0;
    out.values[slot_of("density")] = (f.density - 1) / 3.0;
    out.values[slot_of("subtlety")] = (f.subtlety - 1) / 4.0;
    out.values[slot_of("view")] = f.view == View::MLO ? 1.0 : 0.0;
    return out;
}

}  // namespace birads
