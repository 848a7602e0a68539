// Synthetic cohort generator with a known Bayes posterior, used as the
// ground-truth oracle for end-to-end validation.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "birads/core.hpp"
#include "birads/mlp.hpp"  // rng helpers
#include "birads/uncertainty.hpp"

namespace birads {

struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Class-conditional categorical tables over the morphological descriptor
// space. Feature axes are sampled independently within a class; the exact
// posterior then factorizes over them.
struct ClassTables {
    std::array<double, 5> shape{};     // indexed like all_shapes
    std::array<double, 6> margins{};   // indexed like all_margins
    std::array<double, 4> density{};   // density 1..4
    std::array<double, 5> subtlety{};  // subtlety 1..5
};

struct SynthSpec {
    std::size_t n_cases = 1000;
    double benign_fraction = 0.5;
    double train_fraction = 0.7;
    ClassTables benign;
    ClassTables malignant;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_cases == 0) throw SpecError("n_cases must be positive");
        if (benign_fraction <= 0.0 || benign_fraction >= 1.0)
            throw SpecError("benign_fraction must be in (0,1)");
        if (train_fraction <= 0.0 || train_fraction >= 1.0)
            throw SpecError("train_fraction must be in (0,1)");
        auto check = [](const auto& table, const char* name) {
            double sum = 0.0;
            bool any = false;
            for (double p : table) {
                if (p < 0.0) throw SpecError(std::string(name) + " has negative probability");
                if (p > 0.0) any = true;
                sum += p;
            }
            if (!any) throw SpecError(std::string(name) + " has zero support");
            if (std::abs(sum - 1.0) > 1e-12)
                throw SpecError(std::string(name) + " does not sum to 1");
        };
        for (const ClassTables* t : {&benign, &malignant}) {
            const char* cls = t == &benign ? "benign" : "malignant";
            check(t->shape, (std::string(cls) + ".shape").c_str());
            check(t->margins, (std::string(cls) + ".margins").c_str());
            check(t->density, (std::string(cls) + ".density").c_str());
            check(t->subtlety, (std::string(cls) + ".subtlety").c_str());
        }
    }
};

struct SynthCase {
    LesionRecord record;
    double posterior_malignant = 0.0;  // exact p(Malignant | features)
};

namespace detail {

template <std::size_t N>
std::size_t sample_categorical(const std::array<double, N>& probs, std::mt19937_64& g) {
    const double u = rng::uniform(g);
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return N - 1;
}

}  // namespace detail

// Exact posterior by Bayes' rule over the known tables.
inline double exact_posterior(const SynthSpec& spec, const MorphFeatures& f) {
    const std::size_t si = static_cast<std::size_t>(*f.shape.begin());
    const std::size_t mi = static_cast<std::size_t>(*f.margins.begin());
    auto lik = [&](const ClassTables& t) {
        return t.shape[si] * t.margins[mi] * t.density[f.density - 1] *
               t.subtlety[f.subtlety - 1];
    };
    const double pb = spec.benign_fraction * lik(spec.benign);
    const double pm = (1.0 - spec.benign_fraction) * lik(spec.malignant);
    if (pb + pm == 0.0) return 0.0;  // unreachable for sampled features
    return pm / (pb + pm);
}

// oracle_birads: the band table applied to the exact posterior; shares the
// probability-domain mapper implementation.
inline BiRadsCategory oracle_birads(double posterior_malignant, const MapperConfig& cfg) {
    if (posterior_malignant < 0.0 || posterior_malignant > 1.0)
        throw ArgumentError("posterior outside [0,1]");
    return map_birads_from_prob(
        PredictiveDistribution{1.0 - posterior_malignant, posterior_malignant}, cfg);
}

inline std::vector<SynthCase> generate(const SynthSpec& spec) {
    spec.validate();
    std::mt19937_64 g(rng::derive(spec.seed, 0x5E'7711));
    std::vector<SynthCase> out;
    out.reserve(spec.n_cases);
    const MapperConfig mapper = default_mapper_config();
    const std::size_t n_train =
        static_cast<std::size_t>(spec.train_fraction * static_cast<double>(spec.n_cases));
    for (std::size_t i = 0; i < spec.n_cases; ++i) {
        const bool benign = rng::uniform(g) < spec.benign_fraction;
        const ClassTables& t = benign ? spec.benign : spec.malignant;
        SynthCase c;
        MorphFeatures& f = c.record.features;
        f.shape = {all_shapes[detail::sample_categorical(t.shape, g)]};
        f.margins = {all_margins[detail::sample_categorical(t.margins, g)]};
        f.density = static_cast<int>(detail::sample_categorical(t.density, g)) + 1;
        f.subtlety = static_cast<int>(detail::sample_categorical(t.subtlety, g)) + 1;
        f.view = rng::uniform(g) < 0.5 ? View::CC : View::MLO;
        c.record.case_id = "synth-" + std::to_string(i);
        c.record.pathology = benign ? Pathology::Benign : Pathology::Malignant;
        c.record.split = i < n_train ? Split::Train : Split::Test;
        c.posterior_malignant = exact_posterior(spec, f);
        // the generator's radiologist reads the coarse oracle band
        c.record.radiologist_birads = coarse(oracle_birads(c.posterior_malignant, mapper));
        out.push_back(std::move(c));
    }
    return out;
}

struct AgreementReport {
    double coarse_agreement = 0.0;        // percent of matching coarse categories
    double band_agreement = 0.0;          // percent of matching benign/malignant bands
    double model_band_accuracy = 0.0;     // pathology consistency of model assignments
    double oracle_band_accuracy = 0.0;    // pathology consistency of oracle assignments
    std::size_t n = 0;
};

inline AgreementReport agreement_report(const std::vector<BiRadsCategory>& model,
                                        const std::vector<BiRadsCategory>& oracle,
                                        const std::vector<Pathology>& pathology) {
    if (model.size() != oracle.size() || model.size() != pathology.size())
        throw ArgumentError("agreement_report inputs must be aligned");
    AgreementReport rep;
    rep.n = model.size();
    if (rep.n == 0) return rep;
    std::size_t coarse_eq = 0, band_eq = 0, model_ok = 0, oracle_ok = 0;
    for (std::size_t i = 0; i < rep.n; ++i) {
        if (coarse(model[i]) == coarse(oracle[i])) ++coarse_eq;
        if (in_malignant_band(model[i]) == in_malignant_band(oracle[i])) ++band_eq;
        if (consistent_with_pathology(model[i], pathology[i]) == Consistency::Consistent)
            ++model_ok;
        if (consistent_with_pathology(oracle[i], pathology[i]) == Consistency::Consistent)
            ++oracle_ok;
    }
    const double inv = 100.0 / static_cast<double>(rep.n);
    rep.coarse_agreement = inv * static_cast<double>(coarse_eq);
    rep.band_agreement = inv * static_cast<double>(band_eq);
    rep.model_band_accuracy = inv * static_cast<double>(model_ok);
    rep.oracle_band_accuracy = inv * static_cast<double>(oracle_ok);
    return rep;
}

// Presets. "separable": near-disjoint class-conditional support, posteriors
// close to 0 or 1. "overlapping": shared morphology mass producing mid-band
// posteriors that exercise B4a/B4b/B4c.
inline SynthSpec separable_preset(std::size_t n_cases = 2000, std::uint64_t seed = 7) {
    SynthSpec s;
    s.n_cases = n_cases;
    s.seed = seed;
    s.benign_fraction = 0.55;
    s.benign.shape = {0.45, 0.45, 0.02, 0.06, 0.02};
    s.benign.margins = {0.60, 0.25, 0.08, 0.02, 0.03, 0.02};
    s.benign.density = {0.40, 0.35, 0.20, 0.05};
    s.benign.subtlety = {0.30, 0.30, 0.25, 0.10, 0.05};
    s.malignant.shape = {0.02, 0.02, 0.60, 0.06, 0.30};
    s.malignant.margins = {0.02, 0.03, 0.10, 0.55, 0.25, 0.05};
    s.malignant.density = {0.05, 0.20, 0.35, 0.40};
    s.malignant.subtlety = {0.05, 0.10, 0.25, 0.30, 0.30};
    return s;
}

inline SynthSpec overlapping_preset(std::size_t n_cases = 2000, std::uint64_t seed = 7) {
    SynthSpec s;
    s.n_cases = n_cases;
    s.seed = seed;
    s.benign_fraction = 0.55;
    s.benign.shape = {0.30, 0.25, 0.15, 0.20, 0.10};
    s.benign.margins = {0.35, 0.20, 0.15, 0.10, 0.10, 0.10};
    s.benign.density = {0.30, 0.30, 0.25, 0.15};
    s.benign.subtlety = {0.25, 0.25, 0.25, 0.15, 0.10};
    s.malignant.shape = {0.15, 0.10, 0.35, 0.20, 0.20};
    s.malignant.margins = {0.10, 0.15, 0.15, 0.30, 0.20, 0.10};
    s.malignant.density = {0.15, 0.25, 0.30, 0.30};
    s.malignant.subtlety = {0.10, 0.15, 0.25, 0.25, 0.25};
    return s;
}

inline SynthSpec preset_by_name(const std::string& name, std::size_t n_cases,
                                std::uint64_t seed) {
    if (name == "separable") return separable_preset(n_cases, seed);
    if (name == "overlapping") return overlapping_preset(n_cases, seed);
    throw ArgumentError("unknown synth preset '" + name + "'");
}

}  // namespace birads
