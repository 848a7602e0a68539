// SMOTE oversampling to balance group counts in the training split.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "birads/core.hpp"
#include "birads/mlp.hpp"  // rng helpers

namespace birads {

struct ResampleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class GroupKey : std::uint8_t { BiRads, PathologyLabel };

struct SmoteConfig {
    std::size_t k_neighbors = 5;
    GroupKey group_key = GroupKey::BiRads;
    // Empty map means match the majority group; otherwise explicit per-group
    // target counts keyed by the group label string.
    std::map<std::string, std::size_t> explicit_counts;
    // When set, interpolated values in the listed slots are snapped back to
    // {0,1} at a 0.5 threshold; by default synthetics stay fractional.
    bool round_multihot = false;
    std::vector<std::size_t> multihot_slots;
    std::uint64_t seed = 0;
};

struct SmoteProvenance {
    std::size_t parent_a = 0;  // index into the original record list
    std::size_t parent_b = 0;
    double u = 0.0;            // interpolation weight in [0,1]
};

struct SmoteRecord {
    FeatureVector x;
    BiRadsCategory birads = BiRadsCategory::B2;
    Pathology pathology = Pathology::Benign;
    bool synthetic = false;
    std::optional<SmoteProvenance> provenance;
};

inline double euclidean_sq(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Indices of the k nearest points to points[query] (query excluded), ties
// broken by lower index.
inline std::vector<std::size_t> nearest_neighbors(
    const std::vector<FeatureVector>& points, std::size_t query, std::size_t k) {
    if (k + 1 > points.size())
        throw ArgumentError("k=" + std::to_string(k) + " too large for " +
                            std::to_string(points.size()) + " points");
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(points.size() - 1);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i == query) continue;
        dist.emplace_back(euclidean_sq(points[query].values, points[i].values), i);
    }
    std::sort(dist.begin(), dist.end());
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(dist[i].second);
    return out;
}

inline std::string group_label(const SmoteRecord& r, GroupKey key) {
    return key == GroupKey::BiRads ? to_string(r.birads) : to_string(r.pathology);
}

// For each minority group synthesizes (target - current) vectors on segments
// between group members and their within-group nearest neighbors. Originals
// are preserved verbatim; synthesis order and RNG draws are fixed by the
// seed and the group's sorted label.
inline std::vector<SmoteRecord> smote_balance(const std::vector<SmoteRecord>& records,
                                              const SmoteConfig& cfg) {
    if (cfg.k_neighbors == 0) throw ArgumentError("k_neighbors must be >= 1");
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < records.size(); ++i)
        groups[group_label(records[i], cfg.group_key)].push_back(i);

    std::size_t majority = 0;
    for (const auto& [label, idx] : groups) majority = std::max(majority, idx.size());

    std::vector<SmoteRecord> out = records;
    std::uint64_t group_stream = 0;
    for (const auto& [label, members] : groups) {
        ++group_stream;
        std::size_t target = majority;
        if (!cfg.explicit_counts.empty()) {
            auto it = cfg.explicit_counts.find(label);
            if (it == cfg.explicit_counts.end()) continue;
            target = it->second;
        }
        if (members.size() >= target) continue;
        if (members.size() < 2)
            throw ResampleError("cannot oversample group '" + label +
                                "' with fewer than 2 members");

        std::vector<FeatureVector> group_points;
        group_points.reserve(members.size());
        for (std::size_t idx : members) group_points.push_back(records[idx].x);
        const std::size_t k = std::min(cfg.k_neighbors, members.size() - 1);

        // neighbor lists are per group member, against the group only
        std::vector<std::vector<std::size_t>> neighbors(members.size());
        for (std::size_t i = 0; i < members.size(); ++i)
            neighbors[i] = nearest_neighbors(group_points, i, k);

        std::mt19937_64 g(rng::derive(cfg.seed, group_stream));
        for (std::size_t n = members.size(); n < target; ++n) {
            const std::size_t ai = rng::below(g, members.size());
            const std::size_t bi = neighbors[ai][rng::below(g, neighbors[ai].size())];
            const double u = rng::uniform(g);
            SmoteRecord synth = records[members[ai]];
            synth.synthetic = true;
            synth.provenance = SmoteProvenance{members[ai], members[bi], u};
            for (std::size_t d = 0; d < synth.x.values.size(); ++d) {
                const double a = records[members[ai]].x.values[d];
                const double b = records[members[bi]].x.values[d];
                synth.x.values[d] = a + u * (b - a);
            }
            if (cfg.round_multihot)
                for (std::size_t d : cfg.multihot_slots)
                    if (d < synth.x.values.size())
                        synth.x.values[d] = synth.x.values[d] < 0.5 ? 0.0 : 1.0;
            out.push_back(std::move(synth));
        }
    }
    return out;
}

}  // namespace birads
