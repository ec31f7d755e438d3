#ifndef NETCLASS_FEATURES_HPP
#define NETCLASS_FEATURES_HPP

#include "netclass/dataset.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace netclass {

enum class FeatureKind { SingleGene, CorgSet, Subnetwork, HubEdgeSet };

std::string_view to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(std::string_view name);

/**
 * One ranked unit produced by an extractor.
 *
 * `key` identifies the unit (gene, gene set name, seed gene or hub) and is
 * the tie-break when scores are equal. For `HubEdgeSet`, `genes` holds the
 * hub followed by its interactors and `edges` holds one (hub, interactor)
 * pair per classifier column.
 */
struct RankedFeature {
    FeatureKind kind = FeatureKind::SingleGene;
    std::string key;
    std::vector<GeneId> genes;
    std::vector<std::pair<GeneId, GeneId>> edges;
    double score = 0;
    std::size_t rank = 0;
    /// Significance-test p-values where the method computes them.
    std::vector<double> p_values;

    /// Number of classifier columns this unit contributes.
    std::size_t width() const { return kind == FeatureKind::HubEdgeSet ? edges.size() : 1; }

    bool operator==(const RankedFeature&) const = default;
};

/**
 * Sorts by score descending (by |score| when `by_magnitude`), ties broken by
 * key, and assigns 1-based ranks. Truncates to `cap` when it is nonzero.
 */
void rank_features(std::vector<RankedFeature>& features, bool by_magnitude, std::size_t cap = 0);

/**
 * Samples x columns matrix of feature values, stored column-major.
 * `unit_offsets[u]` is the first column of ranked unit `u`, with a final
 * sentinel equal to the column count.
 */
struct FeatureMatrix {
    std::size_t n_samples = 0;
    std::vector<double> values;
    std::vector<std::string> column_ids;
    std::vector<std::size_t> unit_offsets{0};

    std::size_t n_columns() const { return column_ids.size(); }
    std::size_t n_units() const { return unit_offsets.size() - 1; }
    std::span<const double> column(std::size_t c) const {
        return std::span<const double>(values.data() + c * n_samples, n_samples);
    }
    /// Columns covered by the first `units` ranked units.
    std::size_t columns_for_units(std::size_t units) const { return unit_offsets[units]; }
};

/**
 * Evaluates features on `ds`: single genes take the gene's expression,
 * CORG sets and subnetworks take the activity of their members, and hub
 * edge sets contribute e_hub - e_interactor per edge.
 */
FeatureMatrix feature_values(std::span<const RankedFeature> features, const ExpressionDataset& ds);

/// Union of member genes over the first `top_k` features.
std::vector<GeneId> member_genes(std::span<const RankedFeature> features, std::size_t top_k);

nlohmann::json to_json(const RankedFeature& feature);
RankedFeature feature_from_json(const nlohmann::json& j);

/// JSON-lines serialization: one feature per line.
void write_features_jsonl(std::ostream& out, std::span<const RankedFeature> features, std::string_view provenance = {});
std::vector<RankedFeature> read_features_jsonl(std::istream& in);

}

#endif
