#include "netclass/synthetic.hpp"
#include "netclass/error.hpp"
#include "netclass/rng.hpp"
#include "keyvalue.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>

namespace netclass {

GeneId synthetic_gene_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "g%05zu", index);
    return buf;
}

SyntheticCohort generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_samples < 2 || spec.n_genes == 0) {
        throw Error(ErrorCode::InvalidArgument, "synthetic cohort needs at least 2 samples and 1 gene");
    }
    std::vector<double> shift(spec.n_genes, 0.0);
    std::vector<char> used(spec.n_genes, 0);
    SyntheticCohort out;
    for (const auto& module : spec.planted_modules) {
        std::vector<GeneId> ids;
        for (auto g : module) {
            if (g >= spec.n_genes) {
                throw Error(ErrorCode::InvalidArgument, "planted module references gene " + std::to_string(g));
            }
            if (used[g] && !spec.allow_overlap) {
                throw Error(ErrorCode::OverlappingModules, synthetic_gene_id(g));
            }
            used[g] = 1;
            shift[g] = spec.effect_size;
            ids.push_back(synthetic_gene_id(g));
        }
        out.modules.push_back(std::move(ids));
    }

    Rng rng(spec.seed);
    const auto n = spec.n_samples;
    auto n_poor = static_cast<std::size_t>(std::llround(spec.poor_fraction * static_cast<double>(n)));
    n_poor = std::min(n_poor, n);
    std::vector<Label> labels(n, 0);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_poor), Label{1});
    std::shuffle(labels.begin(), labels.end(), rng);

    const std::size_t total_genes = spec.n_genes + (spec.include_esr1 ? 1 : 0);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> values(total_genes * n);
    for (std::size_t j = 0; j < total_genes; ++j) {
        const double s = j < spec.n_genes ? shift[j] : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            values[j * n + i] = noise(rng) + (labels[i] ? s : 0.0);
        }
    }

    std::vector<GeneId> genes;
    genes.reserve(total_genes);
    for (std::size_t j = 0; j < spec.n_genes; ++j) {
        genes.push_back(synthetic_gene_id(j));
    }
    if (spec.include_esr1) {
        genes.emplace_back(esr1_gene);
    }
    std::vector<SampleId> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        samples.push_back(spec.sample_prefix + std::to_string(i));
    }

    Provenance prov;
    prov.sources.push_back(spec.name);
    out.dataset = ExpressionDataset(std::move(genes), std::move(samples), std::move(values), std::move(labels), std::move(prov));
    return out;
}

InteractionNetwork generate_network(const SyntheticNetworkSpec& spec) {
    InteractionNetwork net(spec.name);
    std::vector<GeneId> nodes = spec.nodes;
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    for (const auto& g : nodes) {
        net.add_node(g);
    }
    if (nodes.size() < 2) {
        return net;
    }

    Rng rng(spec.seed);
    std::vector<GeneId> order = nodes;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 1; i < order.size(); ++i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        net.add_edge(order[i], order[pick(rng)]);
    }

    for (const auto& module : spec.modules) {
        for (const auto& g : module) {
            if (!net.nodes().count(g)) {
                throw Error(ErrorCode::InvalidArgument, "module gene " + g + " is not a network node");
            }
        }
        for (std::size_t i = 1; i < module.size(); ++i) {
            net.add_edge(module[i - 1], module[i]);
        }
    }

    const auto target = static_cast<std::size_t>(std::llround(spec.mean_degree * static_cast<double>(nodes.size()) / 2.0));
    const std::size_t max_edges = nodes.size() * (nodes.size() - 1) / 2;
    std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
    while (net.edges().size() < std::min(target, max_edges)) {
        net.add_edge(nodes[pick(rng)], nodes[pick(rng)]);
    }
    return net;
}

SyntheticFileSpec parse_synthetic_spec(const std::filesystem::path& path) {
    SyntheticFileSpec out;
    for (const auto& e : kv::read(path)) {
        if (e.key == "version") {
            if (kv::as_uint(e) != 1) {
                throw kv::bad(e, "unsupported version");
            }
        } else if (e.key == "cohorts") {
            out.cohorts = kv::as_uint(e);
        } else if (e.key == "n_samples") {
            out.cohort.n_samples = kv::as_uint(e);
        } else if (e.key == "n_genes") {
            out.cohort.n_genes = kv::as_uint(e);
        } else if (e.key == "effect_size") {
            out.cohort.effect_size = kv::as_double(e);
        } else if (e.key == "seed") {
            out.cohort.seed = kv::as_uint(e);
        } else if (e.key == "poor_fraction") {
            out.cohort.poor_fraction = kv::as_double(e);
        } else if (e.key == "module") {
            std::vector<std::size_t> module;
            for (const auto& tok : kv::as_list(e)) {
                kv::Entry item{e.key, tok, e.line};
                module.push_back(kv::as_uint(item));
            }
            out.cohort.planted_modules.push_back(std::move(module));
        } else if (e.key == "allow_overlap") {
            out.cohort.allow_overlap = kv::as_bool(e);
        } else if (e.key == "include_esr1") {
            out.cohort.include_esr1 = kv::as_bool(e);
        } else if (e.key == "network_nodes") {
            out.network_nodes = kv::as_uint(e);
        } else if (e.key == "network_mean_degree") {
            out.network_mean_degree = kv::as_double(e);
        } else if (e.key == "geneset_count") {
            out.geneset_count = kv::as_uint(e);
        } else if (e.key == "geneset_size") {
            out.geneset_size = kv::as_uint(e);
        } else {
            throw kv::bad(e, "unknown key");
        }
    }
    if (out.cohorts == 0) {
        throw Error(ErrorCode::InvalidSpec, "cohorts must be positive");
    }
    return out;
}

}
