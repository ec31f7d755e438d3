#ifndef NETCLASS_EXTRACTORS_HPP
#define NETCLASS_EXTRACTORS_HPP

#include "netclass/dataset.hpp"
#include "netclass/features.hpp"
#include "netclass/secondary.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

/**
 * @file extractors.hpp
 *
 * @brief The four feature-extraction methods. Each ranks candidate
 * features using only the training dataset it is given.
 */

namespace netclass {

/// Default cap on ranked single-gene and subnetwork candidates.
inline constexpr std::size_t default_candidate_cap = 200;

/**
 * Single genes ranked by |t| (ties by gene ID). Genes with a degenerate
 * t-statistic are skipped. `cap = 0` keeps every gene.
 */
std::vector<RankedFeature> sg_rank(const ExpressionDataset& train, std::size_t cap = default_candidate_cap);

/// As `sg_rank()`, restricted to `universe`. Raises EmptyIntersection if no gene qualifies.
std::vector<RankedFeature> sg_rank_restricted(const ExpressionDataset& train, const std::set<GeneId>& universe,
                                              std::size_t cap = default_candidate_cap);

struct CorgResult {
    std::vector<GeneId> genes;
    double score = 0;
    /// t of the activity after each accepted prefix.
    std::vector<double> trajectory;
};

/**
 * Condition-responsive genes of one gene set: members are ordered by t
 * (descending if the largest |t| is positive, ascending otherwise) and the
 * prefix grows while |t| of its activity strictly improves.
 * Returns nullopt when no member has a usable t-statistic.
 */
std::optional<CorgResult> corg_search(const ExpressionDataset& train, const GeneSet& set);

/**
 * CORG sets for every gene set in `collection`, ranked by |score|.
 * `cap = 0` keeps all pathways.
 */
std::vector<RankedFeature> lee_corgs(const ExpressionDataset& train, const GeneSetCollection& collection, std::size_t cap = 0);

struct ChuangParams {
    std::size_t max_size = 20;
    /// Members must lie within this many hops of the seed.
    std::size_t max_depth = 2;
    std::size_t permutations = 100;
    double alpha = 0.05;
    std::size_t cap = default_candidate_cap;
    bool apply_tests = true;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct GrowthResult {
    std::string seed;
    std::vector<GeneId> genes;
    /// MI after each accepted addition, starting with the seed alone.
    std::vector<double> trajectory;
};

/**
 * Greedy growth from `seed`, adding at each step the neighbor that maximizes
 * the mutual information between the discretized activity and the labels.
 * Stops when no strict improvement is possible or `max_size` is reached.
 * `network` must already be restricted to genes measured in `train`.
 */
GrowthResult greedy_grow(const ExpressionDataset& train, const InteractionNetwork& network,
                         const GeneId& seed, const ChuangParams& params);

struct ChuangDiagnostics {
    /// Distinct gene sets produced by the greedy search.
    std::size_t candidates = 0;
    /// Candidates passing each test: label permutation, gene-identity permutation, random subnetworks.
    std::array<std::size_t, 3> passed{0, 0, 0};
    std::size_t survivors = 0;
};

/**
 * Greedy mutual-information subnetwork search from every node, followed by
 * three permutation tests at level `alpha` each:
 *  - MI against label permutations of the found gene set,
 *  - MI against the same greedy search from the same seed after randomly
 *    reassigning expression profiles (drawn from all measured genes) to network nodes,
 *  - MI against random connected subnetworks of the same size.
 * Survivors are ranked by MI. p-values are (1 + #null >= observed) / (1 + permutations).
 */
std::vector<RankedFeature> chuang_search(const ExpressionDataset& train, const InteractionNetwork& network,
                                         const ChuangParams& params, ChuangDiagnostics* diagnostics = nullptr);

struct TaylorParams {
    double hub_fraction = 0.15;
    std::size_t permutations = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct HubScore {
    GeneId hub;
    std::vector<GeneId> interactors;
    double average_difference = 0;
    double p_value = 1;
};

struct TaylorDiagnostics {
    /// Every tested hub, significant or not, in hub order.
    std::vector<HubScore> hubs;
};

/**
 * Average hub difference: the mean over interactors of
 * |corr_class0(hub, n) - corr_class1(hub, n)|. Interactors whose class-wise
 * correlation is undefined are skipped; returns NaN if none remain.
 */
double average_hub_difference(const ExpressionDataset& train, const GeneId& hub, std::span<const GeneId> interactors);

/**
 * Hub dysregulation features. Hub candidates are taken from the unrestricted
 * `network` (or from `hubs` when given); interactors are restricted to genes
 * measured in `train`. Hubs whose label-permutation p-value is below `alpha`
 * are ranked by average hub difference; each contributes all its measured edges.
 */
std::vector<RankedFeature> taylor_hubs(const ExpressionDataset& train, const InteractionNetwork& network,
                                       const TaylorParams& params, const std::set<GeneId>* hubs = nullptr,
                                       TaylorDiagnostics* diagnostics = nullptr);

}

#endif
