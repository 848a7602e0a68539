// Ingestion and persistence: lesions CSV, external predictive-sample files,
// model save/load.
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "birads/core.hpp"
#include "birads/mlp.hpp"

namespace birads {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace csv {

// Comma-separated, UTF-8, quoted fields allowed ("" escapes a quote).
inline std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace csv

inline std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// Hyphen-joined compound descriptors split into multi-hot sets; unrecognized
// tokens map to Other.
inline std::set<Shape> parse_shapes(const std::string& raw) {
    std::set<Shape> out;
    std::stringstream ss(upper(trim(raw)));
    std::string tok;
    while (std::getline(ss, tok, '-')) {
        if (tok.empty()) continue;
        if (tok == "OVAL") out.insert(Shape::Oval);
        else if (tok == "ROUND") out.insert(Shape::Round);
        else if (tok == "IRREGULAR") out.insert(Shape::Irregular);
        else if (tok == "LOBULATED") out.insert(Shape::Lobulated);
        else out.insert(Shape::Other);
    }
    return out;
}

inline std::set<Margins> parse_margins(const std::string& raw) {
    std::set<Margins> out;
    std::stringstream ss(upper(trim(raw)));
    std::string tok;
    while (std::getline(ss, tok, '-')) {
        if (tok.empty()) continue;
        if (tok == "CIRCUMSCRIBED") out.insert(Margins::Circumscribed);
        else if (tok == "OBSCURED") out.insert(Margins::Obscured);
        else if (tok == "MICROLOBULATED") out.insert(Margins::Microlobulated);
        else if (tok == "SPICULATED") out.insert(Margins::Spiculated);
        else if (tok == "ILL_DEFINED" || tok == "ILL DEFINED")
            out.insert(Margins::IllDefined);
        else out.insert(Margins::Other);
    }
    return out;
}

// B1 and B6 are rejected at ingest: the band mapping has no entropy rule for
// them and the evaluation protocol never scores them.
inline BiRadsCategory parse_birads(const std::string& raw) {
    const std::string s = upper(trim(raw));
    if (s == "0" || s == "B0") return BiRadsCategory::B0;
    if (s == "2" || s == "B2") return BiRadsCategory::B2;
    if (s == "3" || s == "B3") return BiRadsCategory::B3;
    if (s == "4" || s == "B4") return BiRadsCategory::B4;
    if (s == "4A" || s == "B4A") return BiRadsCategory::B4a;
    if (s == "4B" || s == "B4B") return BiRadsCategory::B4b;
    if (s == "4C" || s == "B4C") return BiRadsCategory::B4c;
    if (s == "5" || s == "B5") return BiRadsCategory::B5;
    if (s == "1" || s == "B1" || s == "6" || s == "B6")
        throw ParseError("BI-RADS " + s + " rejected at ingest (B1/B6 unsupported)");
    throw ParseError("unknown BI-RADS token '" + raw + "'");
}

inline Pathology parse_pathology(const std::string& raw) {
    const std::string s = upper(trim(raw));
    if (s == "BENIGN" || s == "BENIGN_WITHOUT_CALLBACK") return Pathology::Benign;
    if (s == "MALIGNANT") return Pathology::Malignant;
    throw ParseError("unknown pathology '" + raw + "'");
}

struct LoadReport {
    std::vector<LesionRecord> records;
    std::vector<std::string> diagnostics;  // line-numbered, lenient mode only
};

// Column-alias map: canonical name -> accepted header spellings. Exposed
// because the dataset's official CSVs vary column naming across releases.
inline std::map<std::string, std::vector<std::string>> default_column_aliases() {
    return {
        {"case_id", {"case_id", "patient_id", "image file path"}},
        {"view", {"view", "image view", "image_view"}},
        {"breast_density", {"breast_density", "breast density", "density"}},
        {"mass_shape", {"mass_shape", "mass shape"}},
        {"mass_margins", {"mass_margins", "mass margins"}},
        {"subtlety", {"subtlety"}},
        {"birads_assessment", {"birads_assessment", "assessment", "birads"}},
        {"pathology", {"pathology"}},
        {"split", {"split"}},
    };
}

inline LoadReport load_lesions(
    const std::string& path, bool strict = false,
    const std::map<std::string, std::vector<std::string>>& aliases =
        default_column_aliases()) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lesions file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    const auto header = csv::split_row(line);

    std::map<std::string, std::size_t> col;
    for (const auto& [canonical, names] : aliases) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            std::string h = trim(header[i]);
            std::transform(h.begin(), h.end(), h.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            for (const auto& name : names)
                if (h == name) col[canonical] = i;
        }
        if (!col.count(canonical))
            throw ParseError(path + ": missing column '" + canonical + "'");
    }

    LoadReport out;
    std::set<std::string> seen_ids;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            const auto f = csv::split_row(line);
            if (f.size() < header.size())
                throw ParseError("expected " + std::to_string(header.size()) +
                                 " fields, got " + std::to_string(f.size()));
            LesionRecord rec;
            rec.case_id = trim(f[col["case_id"]]);
            if (rec.case_id.empty()) throw ParseError("empty case_id");
            if (!seen_ids.insert(rec.case_id).second)
                throw ParseError("duplicate case_id '" + rec.case_id + "'");
            const std::string view = upper(trim(f[col["view"]]));
            if (view == "CC") rec.features.view = View::CC;
            else if (view == "MLO") rec.features.view = View::MLO;
            else throw ParseError("unknown view '" + view + "'");
            rec.features.density = std::stoi(trim(f[col["breast_density"]]));
            rec.features.subtlety = std::stoi(trim(f[col["subtlety"]]));
            rec.features.shape = parse_shapes(f[col["mass_shape"]]);
            rec.features.margins = parse_margins(f[col["mass_margins"]]);
            rec.features.validate();
            rec.radiologist_birads = parse_birads(f[col["birads_assessment"]]);
            rec.pathology = parse_pathology(f[col["pathology"]]);
            const std::string split = upper(trim(f[col["split"]]));
            if (split == "TRAIN") rec.split = Split::Train;
            else if (split == "TEST") rec.split = Split::Test;
            else throw ParseError("unknown split '" + split + "'");
            out.records.push_back(std::move(rec));
        } catch (const std::exception& e) {
            const std::string msg = path + ":" + std::to_string(lineno) + ": " + e.what();
            if (strict) throw ParseError(msg);
            out.diagnostics.push_back(msg);
        }
    }
    return out;
}

// External predictive-sample files: rows of
// (case_id, pass_index, p_benign, p_malignant), same T for every case.
inline std::map<std::string, PredictiveSamples> load_external_samples(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open samples file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");

    std::map<std::string, std::map<std::size_t, PredictiveDistribution>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = csv::split_row(line);
        if (f.size() < 4)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected 4 fields");
        const std::string id = trim(f[0]);
        const std::size_t pass = std::stoul(trim(f[1]));
        const double pb = std::stod(trim(f[2]));
        const double pm = std::stod(trim(f[3]));
        if (std::abs(pb + pm - 1.0) > 1e-6)
            throw ParseError(path + ":" + std::to_string(lineno) + ": case '" + id +
                             "' pass " + std::to_string(pass) +
                             " probabilities sum to " + std::to_string(pb + pm));
        if (!rows[id].emplace(pass, PredictiveDistribution{pb, pm}).second)
            throw ParseError(path + ":" + std::to_string(lineno) + ": duplicate pass " +
                             std::to_string(pass) + " for case '" + id + "'");
    }
    if (rows.empty()) throw ParseError(path + ": no sample rows");

    std::size_t passes = rows.begin()->second.size();
    std::map<std::string, PredictiveSamples> out;
    for (const auto& [id, by_pass] : rows) {
        if (by_pass.size() != passes)
            throw ParseError(path + ": case '" + id + "' has " +
                             std::to_string(by_pass.size()) + " passes, expected " +
                             std::to_string(passes));
        PredictiveSamples s;
        std::size_t expect = 0;
        for (const auto& [pass, dist] : by_pass) {
            if (pass != expect)
                throw ParseError(path + ": case '" + id + "' missing pass index " +
                                 std::to_string(expect));
            s.per_pass.push_back(dist);
            ++expect;
        }
        out.emplace(id, std::move(s));
    }
    return out;
}

inline constexpr int model_schema_version = 1;

inline nlohmann::json model_to_json(const BayesianClassifier& model) {
    nlohmann::json layers = nlohmann::json::array();
    for (const Layer& l : model.params.layers)
        layers.push_back({{"in", l.in},
                          {"out", l.out},
                          {"weights", l.weights},
                          {"biases", l.biases}});
    return {{"schema_version", model_schema_version},
            {"layers", layers},
            {"dropout_rate", model.dropout.rate},
            {"layout", model.layout.slots},
            {"seed", model.seed},
            {"final_loss", model.final_loss}};
}

inline void save_model(const BayesianClassifier& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file: " + path);
    out << model_to_json(model).dump(2) << "\n";
}

inline BayesianClassifier model_from_json(const nlohmann::json& j) {
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != model_schema_version)
        throw ParseError("model schema version mismatch (expected " +
                         std::to_string(model_schema_version) + ")");
    BayesianClassifier model;
    std::size_t li = 0;
    std::size_t prev_out = 0;
    for (const auto& jl : j.at("layers")) {
        Layer l;
        l.in = jl.at("in").get<std::size_t>();
        l.out = jl.at("out").get<std::size_t>();
        l.weights = jl.at("weights").get<std::vector<double>>();
        l.biases = jl.at("biases").get<std::vector<double>>();
        if (l.weights.size() != l.in * l.out || l.biases.size() != l.out)
            throw ParseError("model layer " + std::to_string(li) +
                             " has inconsistent sizes");
        if (li > 0 && l.in != prev_out)
            throw ParseError("model layer " + std::to_string(li) +
                             " input width does not chain from previous layer");
        prev_out = l.out;
        model.params.layers.push_back(std::move(l));
        ++li;
    }
    if (model.params.layers.empty()) throw ParseError("model has no layers");
    if (model.params.output_dim() != 2)
        throw ParseError("model output layer must have 2 units");
    model.dropout.rate = j.at("dropout_rate").get<double>();
    model.dropout.validate();
    model.layout.slots = j.at("layout").get<std::vector<std::string>>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.final_loss = j.at("final_loss").get<double>();
    return model;
}

inline BayesianClassifier load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path);
    nlohmann::json j;
    in >> j;
    return model_from_json(j);
}

inline std::string birads_csv_token(BiRadsCategory b) {
    switch (b) {
        case BiRadsCategory::B0:  return "0";
        case BiRadsCategory::B2:  return "2";
        case BiRadsCategory::B3:  return "3";
        case BiRadsCategory::B4:  return "4";
        case BiRadsCategory::B4a: return "4a";
        case BiRadsCategory::B4b: return "4b";
        case BiRadsCategory::B4c: return "4c";
        case BiRadsCategory::B5:  return "5";
        default: throw ArgumentError("category has no CSV token");
    }
}

inline std::string join_tokens(const std::set<Shape>& s) {
    std::string out;
    for (Shape v : s) {
        if (!out.empty()) out += '-';
        out += to_string(v);
    }
    return out;
}

inline std::string join_tokens(const std::set<Margins>& s) {
    std::string out;
    for (Margins v : s) {
        if (!out.empty()) out += '-';
        out += to_string(v);
    }
    return out;
}

// Standard lesions CSV; the optional aligned posterior column is emitted by
// the synthetic-cohort generator.
inline void write_lesions_csv(const std::vector<LesionRecord>& records,
                              const std::string& path,
                              const std::vector<double>* posteriors = nullptr) {
    if (posteriors && posteriors->size() != records.size())
        throw ArgumentError("posterior column length mismatch");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write lesions file: " + path);
    out << "case_id,view,breast_density,mass_shape,mass_margins,subtlety,"
           "birads_assessment,pathology,split";
    if (posteriors) out << ",posterior_malignant";
    out << "\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const LesionRecord& r = records[i];
        out << csv::quote(r.case_id) << "," << (r.features.view == View::CC ? "CC" : "MLO")
            << "," << r.features.density << "," << join_tokens(r.features.shape) << ","
            << join_tokens(r.features.margins) << "," << r.features.subtlety << ","
            << birads_csv_token(r.radiologist_birads) << ","
            << (r.pathology == Pathology::Benign ? "BENIGN" : "MALIGNANT") << ","
            << to_string(r.split);
        if (posteriors) out << "," << (*posteriors)[i];
        out << "\n";
    }
}

// Per-pass samples in the external-samples schema, so internally generated
// samples can be re-ingested through the bypass path.
inline void write_samples_csv(const std::map<std::string, PredictiveSamples>& samples,
                              const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write samples file: " + path);
    out << "case_id,pass_index,p_benign,p_malignant\n";
    out << std::setprecision(17);
    for (const auto& [id, s] : samples)
        for (std::size_t t = 0; t < s.per_pass.size(); ++t)
            out << csv::quote(id) << "," << t << "," << s.per_pass[t].p_benign << ","
                << s.per_pass[t].p_malignant << "\n";
}

// Trained models refuse data encoded with a different layout.
inline void check_layout(const BayesianClassifier& model, const FeatureLayout& data_layout) {
    if (model.layout == data_layout) return;
    std::ostringstream msg;
    msg << "feature layout mismatch: model layout hash " << std::hex
        << model.layout.hash() << ", data layout hash " << data_layout.hash();
    throw ParseError(msg.str());
}

}  // namespace birads
