// End-to-end pipeline: SMOTE on the train split, training, T-pass MC
// prediction, entropy -> BI-RADS mapping and the full report bundle.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "birads/core.hpp"
#include "birads/eval.hpp"
#include "birads/io.hpp"
#include "birads/mlp.hpp"
#include "birads/smote.hpp"
#include "birads/synth.hpp"
#include "birads/uncertainty.hpp"

namespace birads {

struct RunConfig {
    // model + training
    std::vector<std::size_t> hidden{64, 64};
    double dropout_rate = 0.5;
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    std::size_t epochs = 100;
    std::size_t passes = 100;  // T
    std::uint64_t seed = 0;
    // resampling
    bool smote = true;
    std::size_t smote_k = 5;
    // mapping
    double b2_prob_epsilon = 0.005;
    // inputs: exactly one of lesions+model-path flow, synth preset, or the
    // external-samples bypass (lesions + samples)
    std::string lesions_path;
    std::string samples_path;
    std::string preset;  // "separable" | "overlapping"
    std::size_t synth_cases = 2000;
    std::string out_dir = "out";
    bool strict = false;
};

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).template get<std::decay_t<decltype(field)>>();
    };
    get("hidden", cfg.hidden);
    get("dropout_rate", cfg.dropout_rate);
    get("learning_rate", cfg.learning_rate);
    get("batch_size", cfg.batch_size);
    get("epochs", cfg.epochs);
    get("passes", cfg.passes);
    get("seed", cfg.seed);
    get("smote", cfg.smote);
    get("smote_k", cfg.smote_k);
    get("b2_prob_epsilon", cfg.b2_prob_epsilon);
    get("lesions", cfg.lesions_path);
    get("samples", cfg.samples_path);
    get("preset", cfg.preset);
    get("synth_cases", cfg.synth_cases);
    get("out", cfg.out_dir);
    get("strict", cfg.strict);
    return cfg;
}

struct ReportBundle {
    nlohmann::json json;
    std::string csv;  // flat metric table, one row per class row
};

namespace detail {

inline nlohmann::json metrics_json(const ClassMetrics& m) {
    return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

inline nlohmann::json stratum_json(const StratumReport& r) {
    nlohmann::json j{{"stratum", to_string(r.stratum)},
                     {"n", r.n},
                     {"n_benign", r.n_benign},
                     {"n_malignant", r.n_malignant},
                     {"evaluable", r.evaluable}};
    if (r.evaluable) {
        j["benign"] = metrics_json(r.benign_row);
        j["malignant"] = metrics_json(r.malignant_row);
        j["macro"] = metrics_json(r.macro);
        j["accuracy"] = r.accuracy;
    } else {
        j["note"] = "not evaluable";  // e.g. radiologist scored on own B0/B4 stratum
    }
    return j;
}

inline std::string round2(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

inline void csv_stratum_rows(std::ostringstream& os, const std::string& assigner,
                             const StratumReport& r) {
    auto row = [&](const char* label, const ClassMetrics& m) {
        os << assigner << "," << to_string(r.stratum) << "," << label << ",";
        if (r.evaluable)
            os << round2(m.precision) << "," << round2(m.recall) << "," << round2(m.f1)
               << "," << round2(r.accuracy);
        else
            os << "-,-,-,-";
        os << "\n";
    };
    row("Benign", r.benign_row);
    row("Malignant", r.malignant_row);
    row("MacroAverage", r.macro);
}

}  // namespace detail

struct CaseAssessment {
    std::string case_id;
    PredictiveDistribution distribution;
    double entropy = 0.0;
    BiRadsCategory assigned = BiRadsCategory::B2;
};

inline CaseAssessment assess(const std::string& case_id,
                             const PredictiveDistribution& dist,
                             const MapperConfig& mapper) {
    CaseAssessment a;
    a.case_id = case_id;
    a.distribution = dist;
    a.entropy = predictive_entropy(dist);
    a.assigned = map_birads_from_entropy(predicted_label(dist), a.entropy, mapper);
    return a;
}

// Builds the full report bundle from test records and their model-assigned
// categories. Shared by the internal-model path and the external bypass.
inline ReportBundle build_reports(const std::vector<LesionRecord>& test_records,
                                  const std::vector<CaseAssessment>& assessments,
                                  const MapperConfig& mapper, const RunConfig& cfg,
                                  const std::vector<double>* true_posteriors = nullptr) {
    std::vector<BiRadsCategory> assigned;
    assigned.reserve(assessments.size());
    for (const auto& a : assessments) assigned.push_back(a.assigned);

    ReportBundle bundle;
    nlohmann::json& j = bundle.json;
    j["thresholds"] = {{"h_b2", mapper.thresholds.h_b2},
                       {"h_b3", mapper.thresholds.h_b3},
                       {"h_b4a", mapper.thresholds.h_b4a},
                       {"h_b5", mapper.thresholds.h_b5},
                       {"b2_prob_epsilon", mapper.b2_prob_epsilon},
                       {"log_base", 2}};
    j["passes"] = cfg.passes;
    j["seed"] = cfg.seed;

    // per-stratum reports for both assigners
    std::map<BiRadsCategory, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < test_records.size(); ++i)
        strata[coarse(test_records[i].radiologist_birads)].push_back(i);

    std::ostringstream csv;
    csv << "assigner,stratum,class,precision,recall,f1,accuracy\n";
    nlohmann::json jstrata = nlohmann::json::array();
    for (const auto& [stratum, idx] : strata) {
        std::vector<EvaluatedCase> rad_cases, model_cases;
        for (std::size_t i : idx) {
            rad_cases.push_back({test_records[i].pathology,
                                 test_records[i].radiologist_birads});
            model_cases.push_back({test_records[i].pathology, assigned[i]});
        }
        StratumReport rad = stratum_report(stratum, rad_cases);
        StratumReport model = stratum_report(stratum, model_cases);
        nlohmann::json js{{"stratum", to_string(stratum)},
                          {"radiologist", detail::stratum_json(rad)},
                          {"model", detail::stratum_json(model)}};
        jstrata.push_back(js);
        detail::csv_stratum_rows(csv, "radiologist", rad);
        detail::csv_stratum_rows(csv, "model", model);
    }
    j["strata"] = jstrata;

    const auto rad_acc = radiologist_consistency(test_records);
    nlohmann::json jrad;
    for (const auto& [b, acc] : rad_acc) jrad[to_string(b)] = acc;
    j["radiologist_consistency"] = jrad;

    const ConfusionMatrix cm = confusion(test_records, assigned);
    nlohmann::json jcm;
    jcm["rows"] = nlohmann::json::array();
    for (std::size_t r = 0; r < confusion_rows.size(); ++r) {
        nlohmann::json row{{"radiologist", to_string(confusion_rows[r])}};
        for (std::size_t c = 0; c < confusion_cols.size(); ++c)
            row[to_string(confusion_cols[c])] = cm.counts[r][c];
        jcm["rows"].push_back(row);
    }
    j["confusion"] = jcm;

    const DistributionTable dt = distribution(test_records, assigned);
    nlohmann::json jdist;
    for (Assigner a : {Assigner::Radiologist, Assigner::Model}) {
        const char* an = a == Assigner::Radiologist ? "radiologist" : "model";
        for (Pathology p : {Pathology::Benign, Pathology::Malignant}) {
            nlohmann::json hist;
            for (std::size_t c = 0; c < confusion_rows.size(); ++c)
                hist[to_string(confusion_rows[c])] = dt.at(a, p, c);
            jdist[an][to_string(p)] = hist;
        }
    }
    j["distribution"] = jdist;

    if (true_posteriors) {
        std::vector<BiRadsCategory> oracle;
        std::vector<Pathology> pathologies;
        for (std::size_t i = 0; i < test_records.size(); ++i) {
            oracle.push_back(oracle_birads((*true_posteriors)[i], mapper));
            pathologies.push_back(test_records[i].pathology);
        }
        const AgreementReport ar = agreement_report(assigned, oracle, pathologies);
        j["oracle_agreement"] = {{"coarse_agreement", ar.coarse_agreement},
                                 {"band_agreement", ar.band_agreement},
                                 {"model_band_accuracy", ar.model_band_accuracy},
                                 {"oracle_band_accuracy", ar.oracle_band_accuracy},
                                 {"n", ar.n}};
    }

    nlohmann::json jcases = nlohmann::json::array();
    for (const auto& a : assessments)
        jcases.push_back({{"case_id", a.case_id},
                          {"p_benign", a.distribution.p_benign},
                          {"p_malignant", a.distribution.p_malignant},
                          {"entropy", a.entropy},
                          {"birads", to_string(a.assigned)}});
    j["cases"] = jcases;

    bundle.csv = csv.str();
    return bundle;
}

inline std::vector<TrainingExample> encode_training_set(
    const std::vector<LesionRecord>& records, const FeatureLayout& layout) {
    std::vector<TrainingExample> out;
    for (const LesionRecord& r : records)
        out.push_back({encode_features(r.features, layout), r.pathology});
    return out;
}

// SMOTE on the train split only, grouped by coarse BI-RADS.
inline std::vector<TrainingExample> balance_training_set(
    const std::vector<LesionRecord>& train_records, const FeatureLayout& layout,
    std::size_t k, std::uint64_t seed) {
    std::vector<SmoteRecord> recs;
    for (const LesionRecord& r : train_records)
        recs.push_back({encode_features(r.features, layout),
                        coarse(r.radiologist_birads), r.pathology, false, {}});
    SmoteConfig cfg;
    cfg.k_neighbors = k;
    cfg.seed = seed;
    // singleton groups cannot be interpolated; leave them as-is instead of
    // failing the whole run
    std::map<std::string, std::size_t> sizes;
    for (const SmoteRecord& r : recs) ++sizes[group_label(r, cfg.group_key)];
    std::size_t majority = 0;
    for (const auto& [label, n] : sizes) majority = std::max(majority, n);
    for (const auto& [label, n] : sizes)
        if (n >= 2) cfg.explicit_counts[label] = majority;
    const auto balanced = smote_balance(recs, cfg);
    std::vector<TrainingExample> out;
    for (const SmoteRecord& r : balanced) out.push_back({r.x, r.pathology});
    return out;
}

struct PipelineResult {
    ReportBundle bundle;
    std::optional<BayesianClassifier> model;
};

inline PipelineResult run_pipeline(const RunConfig& cfg) {
    const FeatureLayout layout = default_layout();
    const MapperConfig mapper = default_mapper_config(cfg.b2_prob_epsilon);

    std::vector<LesionRecord> records;
    std::vector<double> posteriors;  // synth path only, aligned with records
    bool have_posteriors = false;
    if (!cfg.preset.empty()) {
        const SynthSpec spec = preset_by_name(cfg.preset, cfg.synth_cases, cfg.seed);
        for (const SynthCase& c : generate(spec)) {
            records.push_back(c.record);
            posteriors.push_back(c.posterior_malignant);
        }
        have_posteriors = true;
    } else if (!cfg.lesions_path.empty()) {
        records = load_lesions(cfg.lesions_path, cfg.strict).records;
    } else {
        throw ArgumentError("run_pipeline needs a lesions file or a synth preset");
    }

    std::vector<LesionRecord> train_records, test_records;
    std::vector<double> test_posteriors;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].split == Split::Train) {
            train_records.push_back(records[i]);
        } else {
            test_records.push_back(records[i]);
            if (have_posteriors) test_posteriors.push_back(posteriors[i]);
        }
    }

    PipelineResult result;
    std::vector<CaseAssessment> assessments;

    if (!cfg.samples_path.empty()) {
        // external bypass: predictive samples come from an outside model
        const auto samples = load_external_samples(cfg.samples_path);
        for (const LesionRecord& r : test_records) {
            auto it = samples.find(r.case_id);
            if (it == samples.end())
                throw ParseError("no external samples for test case '" + r.case_id + "'");
            assessments.push_back(assess(r.case_id, mc_average(it->second), mapper));
        }
    } else {
        if (train_records.empty()) throw TrainingError("empty train split");
        std::vector<TrainingExample> training =
            cfg.smote ? balance_training_set(train_records, layout, cfg.smote_k, cfg.seed)
                      : encode_training_set(train_records, layout);
        TrainConfig tc;
        tc.learning_rate = cfg.learning_rate;
        tc.batch_size = cfg.batch_size;
        tc.epochs = cfg.epochs;
        tc.seed = cfg.seed;
        DropoutConfig dc{cfg.dropout_rate};
        BayesianClassifier model = train(training, cfg.hidden, dc, tc, layout);
        for (std::size_t i = 0; i < test_records.size(); ++i) {
            const FeatureVector x = encode_features(test_records[i].features, layout);
            auto [samples, dist] =
                mc_predict(model, x, cfg.passes, rng::derive(cfg.seed, 0xFACE + i));
            assessments.push_back(assess(test_records[i].case_id, dist, mapper));
        }
        result.model = std::move(model);
    }

    result.bundle = build_reports(test_records, assessments, mapper, cfg,
                                  have_posteriors ? &test_posteriors : nullptr);
    return result;
}

inline void write_bundle(const ReportBundle& bundle, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(out_dir + "/report.json");
        if (!out) throw IoError("cannot write " + out_dir + "/report.json");
        out << bundle.json.dump(2) << "\n";
    }
    {
        std::ofstream out(out_dir + "/metrics.csv");
        if (!out) throw IoError("cannot write " + out_dir + "/metrics.csv");
        out << bundle.csv;
    }
}

}  // namespace birads
