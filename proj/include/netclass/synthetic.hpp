#ifndef NETCLASS_SYNTHETIC_HPP
#define NETCLASS_SYNTHETIC_HPP

#include "netclass/dataset.hpp"
#include "netclass/secondary.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace netclass {

/**
 * Synthetic cohort description. Background expression is N(0, 1) for every
 * gene; genes in a planted module are shifted by `effect_size` in poor-outcome
 * samples. Module entries are gene indices into `[0, n_genes)`.
 */
struct SyntheticSpec {
    std::size_t n_samples = 100;
    std::size_t n_genes = 100;
    std::vector<std::vector<std::size_t>> planted_modules;
    double effect_size = 1.0;
    std::uint64_t seed = 0;
    /// Fraction of poor-outcome samples, rounded to the nearest count.
    double poor_fraction = 0.5;
    bool allow_overlap = false;
    /// Appends an unplanted "ESR1" gene so ER stratification can run.
    bool include_esr1 = false;
    std::string sample_prefix = "s";
    std::string name = "synthetic";
};

struct SyntheticCohort {
    ExpressionDataset dataset;
    /// Planted modules as gene identifiers.
    std::vector<std::vector<GeneId>> modules;
};

/// Identifier of synthetic gene `index` (zero-padded, so lexicographic order equals index order).
GeneId synthetic_gene_id(std::size_t index);

/// Raw (un-normalized) cohort; bit-identical for identical specs.
SyntheticCohort generate_synthetic(const SyntheticSpec& spec);

struct SyntheticNetworkSpec {
    /// Genes used as nodes.
    std::vector<GeneId> nodes;
    /// Expected extra edges per node on top of the spanning structure.
    double mean_degree = 4.0;
    /// Each module is wired as a path through its genes, which must be nodes.
    std::vector<std::vector<GeneId>> modules;
    std::uint64_t seed = 0;
    std::string name = "synthetic_network";
};

/**
 * Random graph: a random spanning tree over all nodes plus uniformly random
 * extra edges up to the requested mean degree, with every planted module
 * connected by a path.
 */
InteractionNetwork generate_network(const SyntheticNetworkSpec& spec);

/// Parses the key = value synthetic spec format (see README).
struct SyntheticFileSpec {
    SyntheticSpec cohort;
    std::size_t cohorts = 1;
    std::size_t network_nodes = 0;
    double network_mean_degree = 4.0;
    std::size_t geneset_count = 0;
    std::size_t geneset_size = 10;
};

SyntheticFileSpec parse_synthetic_spec(const std::filesystem::path& path);

}

#endif
