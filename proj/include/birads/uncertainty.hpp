// Predictive entropy and the entropy-band -> BI-RADS assignment rules.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "birads/core.hpp"

namespace birads {

struct PredictiveDistribution {
    double p_benign = 0.5;
    double p_malignant = 0.5;

    void validate() const {
        if (!(std::isfinite(p_benign) && std::isfinite(p_malignant)))
            throw ArgumentError("non-finite probability in predictive distribution");
        if (p_benign < 0.0 || p_malignant < 0.0 ||
            std::abs(p_benign + p_malignant - 1.0) > 1e-12)
            throw ArgumentError("predictive distribution does not sum to 1");
    }
};

// Base-2 binary entropy with 0*log 0 := 0. Result in [0, 1].
inline double binary_entropy(double p) {
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
    return h;
}

inline double predictive_entropy(const PredictiveDistribution& dist) {
    dist.validate();
    double h = 0.0;
    if (dist.p_benign > 0.0) h -= dist.p_benign * std::log2(dist.p_benign);
    if (dist.p_malignant > 0.0) h -= dist.p_malignant * std::log2(dist.p_malignant);
    return h;
}

// Entropy cutoffs of the band table. Full-precision values are authoritative;
// the rounded 0.14 / 0.469 / 0.286 are display values.
struct BandThresholds {
    double h_b2;   // near-zero cutoff, entropy at the B2 probability epsilon
    double h_b3;   // binary_entropy(0.02) ~ 0.1414
    double h_b4a;  // binary_entropy(0.10) ~ 0.4690
    double h_b5;   // binary_entropy(0.05) ~ 0.2864
};

struct MapperConfig {
    BandThresholds thresholds;
    // Estimated p_malignant at or below which B2 is assigned. With a T-pass
    // estimator p-hat is quantized at 1/T, so 1/(2T) admits only estimates
    // indistinguishable from zero. Must stay below 0.02.
    double b2_prob_epsilon = 0.005;
};

inline BandThresholds derive_thresholds(double b2_prob_epsilon = 0.005) {
    if (b2_prob_epsilon < 0.0 || b2_prob_epsilon >= 0.02)
        throw ArgumentError("b2_prob_epsilon must be in [0, 0.02)");
    // h_b5 is evaluated at the malignant-side probability 0.95 (same value as
    // binary_entropy(0.05) up to 1 ulp) so the boundary comparison against
    // entropies of malignant-branch probabilities is exact.
    return BandThresholds{
        binary_entropy(b2_prob_epsilon),
        binary_entropy(0.02),
        binary_entropy(0.10),
        binary_entropy(0.95),
    };
}

inline MapperConfig default_mapper_config(double b2_prob_epsilon = 0.005) {
    return MapperConfig{derive_thresholds(b2_prob_epsilon), b2_prob_epsilon};
}

// Probability-domain mapper over the band table. Benign-side bands are
// half-open (lo, hi]; p = 0.5 tie-breaks to the malignant branch. Output
// range is exactly {B2, B3, B4a, B4b, B4c, B5}.
inline BiRadsCategory map_birads_from_prob(const PredictiveDistribution& dist,
                                           const MapperConfig& cfg) {
    dist.validate();
    const double p = dist.p_malignant;
    if (p <= cfg.b2_prob_epsilon) return BiRadsCategory::B2;
    if (p <= 0.02) return BiRadsCategory::B3;
    if (p <= 0.10) return BiRadsCategory::B4a;
    if (p < 0.5) return BiRadsCategory::B4b;
    if (p < 0.95) return BiRadsCategory::B4c;
    return BiRadsCategory::B5;
}

// Entropy-domain mapper. Entropy is non-monotonic in p, so the predicted
// label disambiguates the branch; the shared endpoint h_b5 is assigned to B5.
inline BiRadsCategory map_birads_from_entropy(Pathology predicted_label, double entropy,
                                              const MapperConfig& cfg) {
    if (entropy < -1e-9 || entropy > 1.0 + 1e-9)
        throw ArgumentError("entropy outside [0,1]: " + std::to_string(entropy));
    const BandThresholds& t = cfg.thresholds;
    if (predicted_label == Pathology::Benign) {
        if (entropy <= t.h_b2) return BiRadsCategory::B2;
        if (entropy <= t.h_b3) return BiRadsCategory::B3;
        if (entropy <= t.h_b4a) return BiRadsCategory::B4a;
        return BiRadsCategory::B4b;
    }
    if (entropy <= t.h_b5) return BiRadsCategory::B5;
    return BiRadsCategory::B4c;
}

// Argmax label with the 0.5 tie going malignant, matching the prob mapper.
inline Pathology predicted_label(const PredictiveDistribution& dist) {
    return dist.p_malignant >= 0.5 ? Pathology::Malignant : Pathology::Benign;
}

}  // namespace birads
