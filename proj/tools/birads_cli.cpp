// Command-line surface for the BI-RADS uncertainty toolkit.
//
// Subcommands: train, predict, map, evaluate, synth, report, run.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "birads/pipeline.hpp"

namespace {

using namespace birads;

void add_common_flags(CLI::App* app, RunConfig& cfg) {
    app->add_option("--seed", cfg.seed, "RNG seed");
    app->add_option("--passes", cfg.passes, "number of MC-dropout passes (T)");
    app->add_option("--dropout-rate", cfg.dropout_rate, "dropout rate in [0,1)");
    app->add_option("--epochs", cfg.epochs, "training epochs");
    app->add_option("--lr", cfg.learning_rate, "Adam learning rate");
    app->add_option("--batch-size", cfg.batch_size, "minibatch size");
    app->add_option("--hidden", cfg.hidden, "hidden layer widths");
    app->add_flag("--smote,!--no-smote", cfg.smote, "SMOTE-balance the train split");
    app->add_option("--smote-k", cfg.smote_k, "SMOTE neighbor count");
    app->add_option("--b2-epsilon", cfg.b2_prob_epsilon,
                    "p_malignant at or below which B2 is assigned");
    app->add_flag("--strict", cfg.strict, "abort on the first malformed input row");
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    return run_config_from_json(j);
}

int cmd_train(const RunConfig& cfg, const std::string& model_out) {
    const FeatureLayout layout = default_layout();
    std::vector<LesionRecord> records;
    if (!cfg.preset.empty()) {
        for (const SynthCase& c :
             generate(preset_by_name(cfg.preset, cfg.synth_cases, cfg.seed)))
            records.push_back(c.record);
    } else {
        const LoadReport rep = load_lesions(cfg.lesions_path, cfg.strict);
        for (const auto& d : rep.diagnostics) std::cerr << d << "\n";
        records = rep.records;
    }
    std::vector<LesionRecord> train_records;
    for (const LesionRecord& r : records)
        if (r.split == Split::Train) train_records.push_back(r);
    std::vector<TrainingExample> training =
        cfg.smote ? balance_training_set(train_records, layout, cfg.smote_k, cfg.seed)
                  : encode_training_set(train_records, layout);
    TrainConfig tc;
    tc.learning_rate = cfg.learning_rate;
    tc.batch_size = cfg.batch_size;
    tc.epochs = cfg.epochs;
    tc.seed = cfg.seed;
    BayesianClassifier model =
        train(training, cfg.hidden, DropoutConfig{cfg.dropout_rate}, tc, layout);
    save_model(model, model_out);
    std::cout << "trained on " << training.size() << " examples ("
              << train_records.size() << " originals), final loss "
              << model.final_loss << ", model written to " << model_out << "\n";
    return 0;
}

int cmd_predict(const RunConfig& cfg, const std::string& model_path,
                const std::string& samples_out) {
    BayesianClassifier model = load_model(model_path);
    const FeatureLayout layout = default_layout();
    check_layout(model, layout);
    const LoadReport rep = load_lesions(cfg.lesions_path, cfg.strict);
    for (const auto& d : rep.diagnostics) std::cerr << d << "\n";
    std::map<std::string, PredictiveSamples> out;
    std::size_t i = 0;
    for (const LesionRecord& r : rep.records) {
        if (r.split != Split::Test) { ++i; continue; }
        const FeatureVector x = encode_features(r.features, layout);
        auto [samples, dist] =
            mc_predict(model, x, cfg.passes, rng::derive(cfg.seed, 0xFACE + i));
        out.emplace(r.case_id, std::move(samples));
        ++i;
    }
    write_samples_csv(out, samples_out);
    std::cout << "wrote " << out.size() << " cases x " << cfg.passes
              << " passes to " << samples_out << "\n";
    return 0;
}

int cmd_map(const RunConfig& cfg, const std::string& samples_path) {
    const MapperConfig mapper = default_mapper_config(cfg.b2_prob_epsilon);
    const auto samples = load_external_samples(samples_path);
    std::cout << "case_id,p_malignant,entropy,birads\n";
    for (const auto& [id, s] : samples) {
        const CaseAssessment a = assess(id, mc_average(s), mapper);
        std::cout << id << "," << a.distribution.p_malignant << "," << a.entropy << ","
                  << to_string(a.assigned) << "\n";
    }
    return 0;
}

int cmd_synth(const RunConfig& cfg, const std::string& lesions_out) {
    const SynthSpec spec = preset_by_name(cfg.preset, cfg.synth_cases, cfg.seed);
    std::vector<LesionRecord> records;
    std::vector<double> posteriors;
    for (const SynthCase& c : generate(spec)) {
        records.push_back(c.record);
        posteriors.push_back(c.posterior_malignant);
    }
    write_lesions_csv(records, lesions_out, &posteriors);
    std::cout << "wrote " << records.size() << " cases to " << lesions_out << "\n";
    return 0;
}

int cmd_run(const RunConfig& cfg) {
    const PipelineResult result = run_pipeline(cfg);
    write_bundle(result.bundle, cfg.out_dir);
    std::cout << "report bundle written to " << cfg.out_dir << "/report.json and "
              << cfg.out_dir << "/metrics.csv\n";
    return 0;
}

int cmd_report(const std::string& bundle_path) {
    std::ifstream in(bundle_path);
    if (!in) throw IoError("cannot open bundle: " + bundle_path);
    nlohmann::json j;
    in >> j;
    std::cout << "thresholds: h_b2=" << j["thresholds"]["h_b2"].get<double>()
              << " h_b3=" << j["thresholds"]["h_b3"].get<double>()
              << " h_b4a=" << j["thresholds"]["h_b4a"].get<double>()
              << " h_b5=" << j["thresholds"]["h_b5"].get<double>() << "\n";
    for (const auto& s : j["strata"]) {
        std::cout << "stratum " << s["stratum"].get<std::string>() << ":";
        for (const char* who : {"radiologist", "model"}) {
            const auto& r = s[who];
            std::cout << " " << who << " ";
            if (r["evaluable"].get<bool>())
                std::cout << "acc=" << r["accuracy"].get<double>()
                          << " macro_f1=" << r["macro"]["f1"].get<double>();
            else
                std::cout << "-";
        }
        std::cout << "\n";
    }
    if (j.contains("oracle_agreement"))
        std::cout << "oracle coarse agreement: "
                  << j["oracle_agreement"]["coarse_agreement"].get<double>() << "%\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MC-dropout BI-RADS scoring and evaluation toolkit"};
    app.require_subcommand(1);

    birads::RunConfig cfg;
    std::string config_path, model_path, samples_out = "samples.csv";
    std::string lesions_out = "lesions.csv", bundle_path;

    app.add_option("--config", config_path, "JSON config file (flags override it)")
        ->check(CLI::ExistingFile);

    auto* train = app.add_subcommand("train", "train a model on the train split");
    train->add_option("--lesions", cfg.lesions_path, "lesions CSV");
    train->add_option("--preset", cfg.preset, "synth preset instead of a CSV");
    train->add_option("--cases", cfg.synth_cases, "synth cohort size");
    train->add_option("--model", model_path, "output model path")->required();
    add_common_flags(train, cfg);

    auto* predict = app.add_subcommand("predict", "T-pass MC prediction on the test split");
    predict->add_option("--model", model_path, "trained model")->required();
    predict->add_option("--lesions", cfg.lesions_path, "lesions CSV")->required();
    predict->add_option("--out", samples_out, "output samples CSV");
    add_common_flags(predict, cfg);

    auto* map_cmd = app.add_subcommand("map", "map sample files to BI-RADS scores");
    map_cmd->add_option("--samples", cfg.samples_path, "per-pass samples CSV")->required();
    map_cmd->add_option("--b2-epsilon", cfg.b2_prob_epsilon, "B2 probability epsilon");

    auto* evaluate = app.add_subcommand(
        "evaluate", "evaluate external samples against a lesions CSV (bypass path)");
    evaluate->add_option("--lesions", cfg.lesions_path, "lesions CSV")->required();
    evaluate->add_option("--samples", cfg.samples_path, "external samples CSV")->required();
    evaluate->add_option("--out", cfg.out_dir, "output directory");
    add_common_flags(evaluate, cfg);

    auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
    synth->add_option("--preset", cfg.preset, "separable | overlapping")->required();
    synth->add_option("--cases", cfg.synth_cases, "cohort size");
    synth->add_option("--seed", cfg.seed, "RNG seed");
    synth->add_option("--out", lesions_out, "output lesions CSV");

    auto* report = app.add_subcommand("report", "summarize a report bundle");
    report->add_option("--bundle", bundle_path, "report.json path")->required();

    auto* run = app.add_subcommand("run", "full pipeline: smote, train, predict, map, evaluate");
    run->add_option("--lesions", cfg.lesions_path, "lesions CSV");
    run->add_option("--samples", cfg.samples_path, "external samples CSV (bypass)");
    run->add_option("--preset", cfg.preset, "synth preset");
    run->add_option("--cases", cfg.synth_cases, "synth cohort size");
    run->add_option("--out", cfg.out_dir, "output directory");
    add_common_flags(run, cfg);

    try {
        // config file values sit between defaults and explicit flags
        app.preparse_callback([&](std::size_t) {
            if (!config_path.empty()) {
                birads::RunConfig file_cfg = load_config_file(config_path);
                const std::string keep_out = cfg.out_dir;
                cfg = file_cfg;
                if (cfg.out_dir.empty()) cfg.out_dir = keep_out;
            }
        });
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (train->parsed()) return cmd_train(cfg, model_path);
        if (predict->parsed()) return cmd_predict(cfg, model_path, samples_out);
        if (map_cmd->parsed()) return cmd_map(cfg, cfg.samples_path);
        if (evaluate->parsed()) return cmd_run(cfg);  // bypass path of the pipeline
        if (synth->parsed()) return cmd_synth(cfg, lesions_out);
        if (report->parsed()) return cmd_report(bundle_path);
        if (run->parsed()) return cmd_run(cfg);
    } catch (const birads::ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const birads::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const birads::SpecError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const birads::ResampleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
