#include "netclass/secondary.hpp"
#include "netclass/error.hpp"
#include "netclass/rng.hpp"
#include "text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

namespace netclass {

void InteractionNetwork::add_node(const GeneId& node) {
    if (nodes_.insert(node).second) {
        adjacency_[node];
    }
}

bool InteractionNetwork::add_edge(const GeneId& a, const GeneId& b) {
    if (a == b) {
        return false;
    }
    add_node(a);
    add_node(b);
    Edge e = a < b ? Edge(a, b) : Edge(b, a);
    if (!edges_.insert(e).second) {
        return false;
    }
    adjacency_[a].insert(b);
    adjacency_[b].insert(a);
    return true;
}

std::size_t InteractionNetwork::degree(const GeneId& node) const {
    auto it = adjacency_.find(node);
    return it == adjacency_.end() ? 0 : it->second.size();
}

const std::set<GeneId>& InteractionNetwork::neighbors(const GeneId& node) const {
    static const std::set<GeneId> none;
    auto it = adjacency_.find(node);
    return it == adjacency_.end() ? none : it->second;
}

bool InteractionNetwork::has_edge(const GeneId& a, const GeneId& b) const {
    return edges_.count(a < b ? Edge(a, b) : Edge(b, a)) > 0;
}

std::vector<std::size_t> InteractionNetwork::degree_sequence() const {
    std::vector<std::size_t> out;
    out.reserve(nodes_.size());
    for (const auto& [node, adj] : adjacency_) {
        out.push_back(adj.size());
    }
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

std::size_t InteractionNetwork::triangle_count() const {
    std::size_t count = 0;
    for (const auto& [a, b] : edges_) {
        const auto& na = neighbors(a);
        const auto& nb = neighbors(b);
        for (const auto& c : na) {
            if (c > b && nb.count(c)) {
                ++count;
            }
        }
    }
    return count;
}

void GeneSetCollection::add(std::string set_name, std::vector<GeneId> genes) {
    for (const auto& s : sets_) {
        if (s.name == set_name) {
            throw Error(ErrorCode::DuplicateSetName, set_name);
        }
    }
    std::unordered_set<GeneId> seen;
    std::vector<GeneId> unique;
    unique.reserve(genes.size());
    for (auto& g : genes) {
        if (seen.insert(g).second) {
            unique.push_back(std::move(g));
        }
    }
    if (unique.empty()) {
        throw Error(ErrorCode::EmptySet, set_name);
    }
    sets_.push_back(GeneSet{std::move(set_name), std::move(unique)});
}

std::set<GeneId> GeneSetCollection::universe() const {
    std::set<GeneId> out;
    for (const auto& s : sets_) {
        out.insert(s.genes.begin(), s.genes.end());
    }
    return out;
}

InteractionNetwork load_network(const std::filesystem::path& path, std::string name) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::MissingInput, "cannot open " + path.string());
    }
    InteractionNetwork net(name.empty() ? path.stem().string() : std::move(name));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        text::strip_cr(line);
        auto fields = text::split_ws(line);
        if (fields.empty() || fields[0].front() == '#') {
            continue;
        }
        if (fields.size() < 2 || fields.size() > 3) {
            throw Error(ErrorCode::UnparsableLine, path.string() + ":" + std::to_string(lineno) + ": '" + line + "'");
        }
        GeneId a(fields[0]), b(fields[1]);
        if (a == b) {
            net.add_node(a);
            ++net.dropped_self_loops;
            continue;
        }
        net.add_edge(a, b);
    }
    return net;
}

GeneSetCollection load_genesets(const std::filesystem::path& path, std::string name) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::MissingInput, "cannot open " + path.string());
    }
    GeneSetCollection coll(name.empty() ? path.stem().string() : std::move(name));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        text::strip_cr(line);
        if (text::trim(line).empty()) {
            continue;
        }
        auto fields = text::split(line, '\t');
        std::vector<GeneId> genes;
        for (std::size_t i = 2; i < fields.size(); ++i) {
            auto g = text::trim(fields[i]);
            if (!g.empty()) {
                genes.emplace_back(g);
            }
        }
        if (genes.empty()) {
            throw Error(ErrorCode::EmptySet, path.string() + ":" + std::to_string(lineno) + ": gene set without genes");
        }
        coll.add(std::string(fields[0]), std::move(genes));
    }
    return coll;
}

void write_network(const InteractionNetwork& network, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
    for (const auto& [a, b] : network.edges()) {
        out << a << '\t' << b << '\n';
    }
}

void write_genesets(const GeneSetCollection& collection, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
    for (const auto& s : collection.sets()) {
        out << s.name << "\tNA";
        for (const auto& g : s.genes) {
            out << '\t' << g;
        }
        out << '\n';
    }
}

InteractionNetwork restrict_to_measured(const InteractionNetwork& network, const ExpressionDataset& ds) {
    InteractionNetwork out(network.name());
    for (const auto& n : network.nodes()) {
        if (ds.has_gene(n)) {
            out.add_node(n);
        }
    }
    for (const auto& [a, b] : network.edges()) {
        if (out.nodes().count(a) && out.nodes().count(b)) {
            out.add_edge(a, b);
        }
    }
    return out;
}

GeneSetCollection restrict_to_measured(const GeneSetCollection& collection, const ExpressionDataset& ds) {
    GeneSetCollection out(collection.name());
    out.dropped_empty = collection.dropped_empty;
    for (const auto& s : collection.sets()) {
        std::vector<GeneId> kept;
        for (const auto& g : s.genes) {
            if (ds.has_gene(g)) {
                kept.push_back(g);
            }
        }
        if (kept.empty()) {
            ++out.dropped_empty;
            continue;
        }
        out.add(s.name, std::move(kept));
    }
    return out;
}

namespace {

std::vector<GeneId> label_pool(const std::set<GeneId>& own, PermutationScope scope, const std::vector<GeneId>& universe) {
    if (scope == PermutationScope::Own) {
        return std::vector<GeneId>(own.begin(), own.end());
    }
    std::vector<GeneId> pool = universe;
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    for (const auto& g : own) {
        if (!std::binary_search(pool.begin(), pool.end(), g)) {
            throw Error(ErrorCode::InvalidArgument, "permutation universe lacks gene " + g);
        }
    }
    return pool;
}

// Maps each gene of `own` to a distinct label drawn uniformly from `pool`.
std::unordered_map<GeneId, GeneId> draw_relabeling(const std::set<GeneId>& own, std::vector<GeneId> pool, Rng& rng) {
    std::shuffle(pool.begin(), pool.end(), rng);
    std::unordered_map<GeneId, GeneId> mapping;
    std::size_t i = 0;
    for (const auto& g : own) {
        mapping.emplace(g, pool[i++]);
    }
    return mapping;
}

}

InteractionNetwork randomize_identities(const InteractionNetwork& network, std::uint64_t seed,
                                        PermutationScope scope, const std::vector<GeneId>& universe)
{
    Rng rng(seed);
    auto mapping = draw_relabeling(network.nodes(), label_pool(network.nodes(), scope, universe), rng);
    InteractionNetwork out(network.name());
    for (const auto& n : network.nodes()) {
        out.add_node(mapping.at(n));
    }
    for (const auto& [a, b] : network.edges()) {
        out.add_edge(mapping.at(a), mapping.at(b));
    }
    return out;
}

GeneSetCollection randomize_identities(const GeneSetCollection& collection, std::uint64_t seed,
                                       PermutationScope scope, const std::vector<GeneId>& universe,
                                       bool per_set)
{
    Rng rng(seed);
    auto own = collection.universe();
    auto pool = label_pool(own, scope, universe);
    GeneSetCollection out(collection.name());

    if (!per_set) {
        auto mapping = draw_relabeling(own, pool, rng);
        for (const auto& s : collection.sets()) {
            std::vector<GeneId> genes;
            genes.reserve(s.genes.size());
            for (const auto& g : s.genes) {
                genes.push_back(mapping.at(g));
            }
            out.add(s.name, std::move(genes));
        }
        return out;
    }

    for (const auto& s : collection.sets()) {
        std::vector<GeneId> draw = pool;
        std::shuffle(draw.begin(), draw.end(), rng);
        draw.resize(s.genes.size());
        out.add(s.name, std::move(draw));
    }
    return out;
}

std::set<GeneId> hub_candidates(const InteractionNetwork& network, double fraction) {
    if (!(fraction > 0) || fraction > 1) {
        throw Error(ErrorCode::InvalidArgument, "hub fraction must lie in (0, 1]");
    }
    if (network.nodes().empty()) {
        throw Error(ErrorCode::EmptyNetwork, network.name());
    }
    auto degrees = network.degree_sequence();
    auto rank = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(degrees.size()) + 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, degrees.size());
    const auto threshold = degrees[rank - 1];

    std::set<GeneId> out;
    for (const auto& n : network.nodes()) {
        if (network.degree(n) >= threshold) {
            out.insert(n);
        }
    }
    return out;
}

}
