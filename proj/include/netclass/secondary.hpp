#ifndef NETCLASS_SECONDARY_HPP
#define NETCLASS_SECONDARY_HPP

#include "netclass/dataset.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

/**
 * @file secondary.hpp
 *
 * @brief Secondary data sources: interaction networks and gene-set collections.
 */

namespace netclass {

/**
 * Simple undirected graph over gene identifiers.
 * Edges are stored with the lexicographically smaller endpoint first.
 */
class InteractionNetwork {
public:
    using Edge = std::pair<GeneId, GeneId>;

    InteractionNetwork() = default;
    explicit InteractionNetwork(std::string name) : name_(std::move(name)) {}

    const std::string& name() const { return name_; }

    void add_node(const GeneId& node);

    /// Returns false for self-loops and duplicates, which are not stored.
    bool add_edge(const GeneId& a, const GeneId& b);

    const std::set<GeneId>& nodes() const { return nodes_; }
    const std::set<Edge>& edges() const { return edges_; }
    std::size_t degree(const GeneId& node) const;
    const std::set<GeneId>& neighbors(const GeneId& node) const;
    bool has_edge(const GeneId& a, const GeneId& b) const;

    /// Sorted degree sequence, largest first.
    std::vector<std::size_t> degree_sequence() const;
    std::size_t triangle_count() const;

    /// Number of self-loops discarded while loading.
    std::size_t dropped_self_loops = 0;

private:
    std::string name_;
    std::set<GeneId> nodes_;
    std::set<Edge> edges_;
    std::map<GeneId, std::set<GeneId>> adjacency_;
};

struct GeneSet {
    std::string name;
    std::vector<GeneId> genes;
};

/// Named gene sets without edge structure (pathways).
class GeneSetCollection {
public:
    GeneSetCollection() = default;
    explicit GeneSetCollection(std::string name) : name_(std::move(name)) {}

    const std::string& name() const { return name_; }

    /// Duplicate members are removed keeping first occurrence; duplicate names raise DuplicateSetName.
    void add(std::string set_name, std::vector<GeneId> genes);

    const std::vector<GeneSet>& sets() const { return sets_; }
    std::size_t size() const { return sets_.size(); }

    /// Union of all member genes.
    std::set<GeneId> universe() const;

    /// Number of sets removed because they became empty.
    std::size_t dropped_empty = 0;

private:
    std::string name_;
    std::vector<GeneSet> sets_;
};

/**
 * Reads a whitespace-separated edge list; a third column is ignored.
 * Lines beginning with '#' are comments.
 */
InteractionNetwork load_network(const std::filesystem::path& path, std::string name = {});

/// Reads a GMT file: name, description, then one or more genes, tab-separated.
GeneSetCollection load_genesets(const std::filesystem::path& path, std::string name = {});

void write_network(const InteractionNetwork& network, const std::filesystem::path& path);
void write_genesets(const GeneSetCollection& collection, const std::filesystem::path& path);

/// Induced subgraph on the genes measured in `ds`.
InteractionNetwork restrict_to_measured(const InteractionNetwork& network, const ExpressionDataset& ds);

/// Drops unmeasured genes from each set, then drops sets that became empty.
GeneSetCollection restrict_to_measured(const GeneSetCollection& collection, const ExpressionDataset& ds);

enum class PermutationScope {
    /// Permute over the structure's own genes.
    Own,
    /// Permute over the supplied universe (e.g. every measured gene).
    Universe
};

/**
 * Applies one uniformly random relabeling of gene identities.
 * With `PermutationScope::Universe`, labels are drawn from `universe`
 * (which must contain the structure's genes).
 */
InteractionNetwork randomize_identities(const InteractionNetwork& network, std::uint64_t seed,
                                        PermutationScope scope = PermutationScope::Own,
                                        const std::vector<GeneId>& universe = {});

/**
 * As above for collections. `per_set = false` applies one global relabeling,
 * preserving the overlap structure between sets; `per_set = true` draws each
 * set independently from the universe of the collection.
 */
GeneSetCollection randomize_identities(const GeneSetCollection& collection, std::uint64_t seed,
                                       PermutationScope scope = PermutationScope::Own,
                                       const std::vector<GeneId>& universe = {},
                                       bool per_set = false);

/**
 * Hub candidates: nodes whose degree is at least the degree of the
 * `max(1, floor(fraction * |nodes|))`-th most connected node. Ties at the
 * threshold are all included.
 */
std::set<GeneId> hub_candidates(const InteractionNetwork& network, double fraction = 0.15);

}

#endif
