#include "netclass/features.hpp"
#include "netclass/error.hpp"
#include "netclass/stats.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

namespace netclass {

std::string_view to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::SingleGene: return "single_gene";
        case FeatureKind::CorgSet: return "corg_set";
        case FeatureKind::Subnetwork: return "subnetwork";
        case FeatureKind::HubEdgeSet: return "hub_edge_set";
    }
    return "unknown";
}

FeatureKind feature_kind_from_string(std::string_view name) {
    for (auto k : {FeatureKind::SingleGene, FeatureKind::CorgSet, FeatureKind::Subnetwork, FeatureKind::HubEdgeSet}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown feature kind " + std::string(name));
}

void rank_features(std::vector<RankedFeature>& features, bool by_magnitude, std::size_t cap) {
    auto key = [by_magnitude](const RankedFeature& f) { return by_magnitude ? std::abs(f.score) : f.score; };
    std::sort(features.begin(), features.end(), [&](const RankedFeature& a, const RankedFeature& b) {
        const double ka = key(a), kb = key(b);
        if (ka != kb) {
            return ka > kb;
        }
        return a.key < b.key;
    });
    if (cap > 0 && features.size() > cap) {
        features.resize(cap);
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
        features[i].rank = i + 1;
    }
}

FeatureMatrix feature_values(std::span<const RankedFeature> features, const ExpressionDataset& ds) {
    FeatureMatrix out;
    out.n_samples = ds.n_samples();

    auto lookup = [&](const GeneId& g) {
        auto j = ds.gene_index(g);
        if (!j) {
            throw Error(ErrorCode::UnmeasuredGene, g);
        }
        return *j;
    };

    for (const auto& f : features) {
        switch (f.kind) {
            case FeatureKind::SingleGene: {
                if (f.genes.size() != 1) {
                    throw Error(ErrorCode::InvalidArgument, "single-gene feature must have exactly one gene");
                }
                auto col = ds.gene_values(lookup(f.genes[0]));
                out.values.insert(out.values.end(), col.begin(), col.end());
                out.column_ids.push_back(f.genes[0]);
                break;
            }
            case FeatureKind::CorgSet:
            case FeatureKind::Subnetwork: {
                auto act = stats::activity(ds, std::span<const GeneId>(f.genes));
                out.values.insert(out.values.end(), act.begin(), act.end());
                out.column_ids.push_back(f.key);
                break;
            }
            case FeatureKind::HubEdgeSet: {
                for (const auto& [hub, interactor] : f.edges) {
                    auto h = ds.gene_values(lookup(hub));
                    auto n = ds.gene_values(lookup(interactor));
                    for (std::size_t i = 0; i < out.n_samples; ++i) {
                        out.values.push_back(h[i] - n[i]);
                    }
                    out.column_ids.push_back(hub + "-" + interactor);
                }
                break;
            }
        }
        out.unit_offsets.push_back(out.column_ids.size());
    }
    return out;
}

std::vector<GeneId> member_genes(std::span<const RankedFeature> features, std::size_t top_k) {
    std::set<GeneId> genes;
    for (std::size_t i = 0; i < std::min(top_k, features.size()); ++i) {
        genes.insert(features[i].genes.begin(), features[i].genes.end());
    }
    return std::vector<GeneId>(genes.begin(), genes.end());
}

nlohmann::json to_json(const RankedFeature& f) {
    nlohmann::json j;
    j["kind"] = to_string(f.kind);
    j["key"] = f.key;
    j["genes"] = f.genes;
    auto edges = nlohmann::json::array();
    for (const auto& [a, b] : f.edges) {
        edges.push_back({a, b});
    }
    j["edges"] = std::move(edges);
    j["score"] = f.score;
    j["rank"] = f.rank;
    j["p_values"] = f.p_values;
    return j;
}

RankedFeature feature_from_json(const nlohmann::json& j) {
    RankedFeature f;
    f.kind = feature_kind_from_string(j.at("kind").get<std::string>());
    f.key = j.at("key").get<std::string>();
    f.genes = j.at("genes").get<std::vector<GeneId>>();
    for (const auto& e : j.at("edges")) {
        f.edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
    }
    f.score = j.at("score").get<double>();
    f.rank = j.at("rank").get<std::size_t>();
    f.p_values = j.at("p_values").get<std::vector<double>>();
    return f;
}

void write_features_jsonl(std::ostream& out, std::span<const RankedFeature> features, std::string_view provenance) {
    for (const auto& f : features) {
        auto j = to_json(f);
        j["provenance"] = provenance;
        out << j.dump() << '\n';
    }
}

std::vector<RankedFeature> read_features_jsonl(std::istream& in) {
    std::vector<RankedFeature> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        out.push_back(feature_from_json(nlohmann::json::parse(line)));
    }
    return out;
}

}
