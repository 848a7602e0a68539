// Stratified evaluation against pathology: per-stratum metric tables,
// radiologist-consistency accuracy, confusion matrix and score distributions.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "birads/core.hpp"

namespace birads {

struct BinaryCounts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

struct ClassMetrics {
    double precision = 0.0;  // percentages, full precision until serialization
    double recall = 0.0;
    double f1 = 0.0;
};

// precision = tp/(tp+fp), recall = tp/(tp+fn), f1 the harmonic mean; each
// defined as 0 when its denominator is 0.
inline ClassMetrics binary_metrics(const BinaryCounts& c) {
    ClassMetrics m;
    const double tp = static_cast<double>(c.tp);
    if (c.tp + c.fp > 0) m.precision = 100.0 * tp / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0) m.recall = 100.0 * tp / static_cast<double>(c.tp + c.fn);
    if (m.precision + m.recall > 0.0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

struct StratumReport {
    BiRadsCategory stratum = BiRadsCategory::B2;
    bool evaluable = false;  // false: every assignment Indeterminate or empty
    std::size_t n = 0;
    std::size_t n_benign = 0;
    std::size_t n_malignant = 0;
    ClassMetrics benign_row;     // Benign as the positive class
    ClassMetrics malignant_row;  // Malignant as the positive class
    ClassMetrics macro;          // unweighted mean of the two rows
    double accuracy = 0.0;       // percentage of pathology-consistent assignments
};

struct EvaluatedCase {
    Pathology pathology = Pathology::Benign;
    BiRadsCategory assigned = BiRadsCategory::B2;
};

// A case counts as predicted-Benign when its assigned category is
// benign-consistent and predicted-Malignant when malignant-consistent.
// Indeterminate assignments (B0/B4) make the stratum non-evaluable when they
// cover it entirely, mirroring the dash rows of the radiologist-side tables.
inline StratumReport stratum_report(BiRadsCategory stratum,
                                    const std::vector<EvaluatedCase>& cases) {
    StratumReport rep;
    rep.stratum = stratum;
    rep.n = cases.size();
    BinaryCounts benign_pos, malignant_pos;
    std::size_t determinate = 0, consistent = 0;
    for (const EvaluatedCase& c : cases) {
        if (c.pathology == Pathology::Benign) ++rep.n_benign;
        else ++rep.n_malignant;
        const Consistency v = consistent_with_pathology(c.assigned, c.pathology);
        if (v == Consistency::Indeterminate) continue;
        ++determinate;
        if (v == Consistency::Consistent) ++consistent;
        const bool predicted_benign = in_benign_band(c.assigned);
        const bool truth_benign = c.pathology == Pathology::Benign;
        if (predicted_benign) {
            truth_benign ? ++benign_pos.tp : ++benign_pos.fp;
            truth_benign ? ++malignant_pos.tn : ++malignant_pos.fn;
        } else {
            truth_benign ? ++malignant_pos.fp : ++malignant_pos.tp;
            truth_benign ? ++benign_pos.fn : ++benign_pos.tn;
        }
    }
    if (determinate == 0) return rep;  // empty-marked report
    rep.evaluable = true;
    rep.benign_row = binary_metrics(benign_pos);
    rep.malignant_row = binary_metrics(malignant_pos);
    rep.macro.precision = (rep.benign_row.precision + rep.malignant_row.precision) / 2.0;
    rep.macro.recall = (rep.benign_row.recall + rep.malignant_row.recall) / 2.0;
    rep.macro.f1 = (rep.benign_row.f1 + rep.malignant_row.f1) / 2.0;
    rep.accuracy = 100.0 * static_cast<double>(consistent) /
                   static_cast<double>(determinate);
    return rep;
}

// Accuracy of the radiologist's own label against pathology, per stratum,
// restricted to {B2, B3, B5} (B4 unsplittable, B0 unscored).
inline std::map<BiRadsCategory, double> radiologist_consistency(
    const std::vector<LesionRecord>& records) {
    std::map<BiRadsCategory, std::pair<std::size_t, std::size_t>> tally;  // consistent, total
    for (const LesionRecord& r : records) {
        const BiRadsCategory b = r.radiologist_birads;
        if (b != BiRadsCategory::B2 && b != BiRadsCategory::B3 && b != BiRadsCategory::B5)
            continue;
        auto& [ok, total] = tally[b];
        ++total;
        if (consistent_with_pathology(b, r.pathology) == Consistency::Consistent) ++ok;
    }
    std::map<BiRadsCategory, double> out;
    for (const auto& [b, counts] : tally)
        out[b] = 100.0 * static_cast<double>(counts.first) /
                 static_cast<double>(counts.second);
    return out;
}

inline constexpr std::array<BiRadsCategory, 5> confusion_rows{
    BiRadsCategory::B0, BiRadsCategory::B2, BiRadsCategory::B3,
    BiRadsCategory::B4, BiRadsCategory::B5};
inline constexpr std::array<BiRadsCategory, 4> confusion_cols{
    BiRadsCategory::B2, BiRadsCategory::B3, BiRadsCategory::B4, BiRadsCategory::B5};

struct ConfusionMatrix {
    // rows: radiologist coarse category; cols: model coarse category
    std::array<std::array<std::size_t, 4>, 5> counts{};

    std::size_t total() const {
        std::size_t t = 0;
        for (const auto& row : counts)
            for (std::size_t c : row) t += c;
        return t;
    }
};

inline ConfusionMatrix confusion(const std::vector<LesionRecord>& records,
                                 const std::vector<BiRadsCategory>& model_assignments) {
    if (records.size() != model_assignments.size())
        throw ArgumentError("record/assignment length mismatch");
    ConfusionMatrix m;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const BiRadsCategory r = coarse(records[i].radiologist_birads);
        const BiRadsCategory c = coarse(model_assignments[i]);
        std::size_t ri = confusion_rows.size(), ci = confusion_cols.size();
        for (std::size_t j = 0; j < confusion_rows.size(); ++j)
            if (confusion_rows[j] == r) ri = j;
        for (std::size_t j = 0; j < confusion_cols.size(); ++j)
            if (confusion_cols[j] == c) ci = j;
        if (ri == confusion_rows.size())
            throw ArgumentError(std::string("unexpected radiologist category ") +
                                to_string(r));
        if (ci == confusion_cols.size())
            throw ArgumentError(std::string("unexpected model category ") + to_string(c));
        ++m.counts[ri][ci];
    }
    return m;
}

enum class Assigner : std::uint8_t { Radiologist, Model };

struct DistributionTable {
    // counts[assigner][pathology][coarse category index into confusion_rows]
    std::array<std::array<std::array<std::size_t, 5>, 2>, 2> counts{};

    std::size_t& at(Assigner a, Pathology p, std::size_t cat_index) {
        return counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)][cat_index];
    }
    std::size_t at(Assigner a, Pathology p, std::size_t cat_index) const {
        return counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)][cat_index];
    }
};

inline std::size_t coarse_index(BiRadsCategory b) {
    const BiRadsCategory c = coarse(b);
    for (std::size_t j = 0; j < confusion_rows.size(); ++j)
        if (confusion_rows[j] == c) return j;
    throw ArgumentError(std::string("no histogram bin for ") + to_string(b));
}

inline DistributionTable distribution(const std::vector<LesionRecord>& records,
                                      const std::vector<BiRadsCategory>& model_assignments) {
    if (records.size() != model_assignments.size())
        throw ArgumentError("record/assignment length mismatch");
    DistributionTable t;
    for (std::size_t i = 0; i < records.size(); ++i) {
        ++t.at(Assigner::Radiologist, records[i].pathology,
               coarse_index(records[i].radiologist_birads));
        ++t.at(Assigner::Model, records[i].pathology, coarse_index(model_assignments[i]));
    }
    return t;
}

}  // namespace birads
