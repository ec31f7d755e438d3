#include "netclass/error.hpp"
#include "netclass/extractors.hpp"
#include "netclass/parallel.hpp"
#include "netclass/rng.hpp"
#include "netclass/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace netclass {

namespace {

// Network restricted to measured genes, re-indexed so node order equals gene ID order.
struct SearchGraph {
    std::vector<GeneId> nodes;
    std::vector<std::vector<std::uint32_t>> adjacency;
    std::vector<std::size_t> columns;

    SearchGraph(const ExpressionDataset& ds, const InteractionNetwork& network) {
        std::map<GeneId, std::uint32_t> index;
        for (const auto& n : network.nodes()) {
            auto j = ds.gene_index(n);
            if (!j) {
                continue;
            }
            index.emplace(n, static_cast<std::uint32_t>(nodes.size()));
            nodes.push_back(n);
            columns.push_back(*j);
        }
        adjacency.resize(nodes.size());
        for (const auto& [a, b] : network.edges()) {
            auto ia = index.find(a), ib = index.find(b);
            if (ia == index.end() || ib == index.end()) {
                continue;
            }
            adjacency[ia->second].push_back(ib->second);
            adjacency[ib->second].push_back(ia->second);
        }
        for (auto& adj : adjacency) {
            std::sort(adj.begin(), adj.end());
        }
    }

    std::size_t size() const { return nodes.size(); }
};

struct Growth {
    std::vector<std::uint32_t> members;
    std::vector<double> trajectory;
};

class Grower {
public:
    Grower(const SearchGraph& graph, std::span<const std::span<const double>> profiles, std::span<const Label> labels, const ChuangParams& params)
        : graph_(graph), profiles_(profiles), labels_(labels), params_(params),
          depth_(graph.size(), unreached), in_set_(graph.size(), 0),
          sum_(labels.size()), candidate_(labels.size()) {}

    // `columns[node]` selects which expression profile each node carries.
    Growth grow(std::uint32_t seed, std::span<const std::size_t> columns) {
        mark_depths(seed);

        Growth g;
        const std::size_t n = labels_.size();
        auto seed_profile = profiles_[columns[seed]];
        std::copy(seed_profile.begin(), seed_profile.end(), sum_.begin());
        g.members.push_back(seed);
        in_set_[seed] = 1;
        g.trajectory.push_back(stats::binned_mutual_information(sum_, labels_));

        std::vector<std::uint32_t> frontier;
        auto extend_frontier = [&](std::uint32_t node) {
            for (auto nb : graph_.adjacency[node]) {
                if (!in_set_[nb] && depth_[nb] <= params_.max_depth &&
                    std::find(frontier.begin(), frontier.end(), nb) == frontier.end()) {
                    frontier.push_back(nb);
                }
            }
        };
        extend_frontier(seed);

        while (g.members.size() < params_.max_size && !frontier.empty()) {
            std::sort(frontier.begin(), frontier.end());
            const double scale = 1.0 / std::sqrt(static_cast<double>(g.members.size() + 1));
            double best_mi = g.trajectory.back();
            std::ptrdiff_t best_pos = -1;
            for (std::size_t f = 0; f < frontier.size(); ++f) {
                auto profile = profiles_[columns[frontier[f]]];
                for (std::size_t i = 0; i < n; ++i) {
                    candidate_[i] = (sum_[i] + profile[i]) * scale;
                }
                const double mi = stats::binned_mutual_information(candidate_, labels_);
                if (mi > best_mi) {
                    best_mi = mi;
                    best_pos = static_cast<std::ptrdiff_t>(f);
                }
            }
            if (best_pos < 0) {
                break;
            }

            const auto node = frontier[static_cast<std::size_t>(best_pos)];
            frontier.erase(frontier.begin() + best_pos);
            auto profile = profiles_[columns[node]];
            for (std::size_t i = 0; i < n; ++i) {
                sum_[i] += profile[i];
            }
            g.members.push_back(node);
            g.trajectory.push_back(best_mi);
            in_set_[node] = 1;
            extend_frontier(node);
        }

        for (auto m : g.members) {
            in_set_[m] = 0;
        }
        clear_depths();
        return g;
    }

private:
    static constexpr std::size_t unreached = static_cast<std::size_t>(-1);

    void mark_depths(std::uint32_t seed) {
        touched_.clear();
        depth_[seed] = 0;
        touched_.push_back(seed);
        for (std::size_t head = 0; head < touched_.size(); ++head) {
            auto node = touched_[head];
            if (depth_[node] >= params_.max_depth) {
                continue;
            }
            for (auto nb : graph_.adjacency[node]) {
                if (depth_[nb] == unreached) {
                    depth_[nb] = depth_[node] + 1;
                    touched_.push_back(nb);
                }
            }
        }
    }

    void clear_depths() {
        for (auto t : touched_) {
            depth_[t] = unreached;
        }
        touched_.clear();
    }

    const SearchGraph& graph_;
    std::span<const std::span<const double>> profiles_;
    std::span<const Label> labels_;
    const ChuangParams& params_;
    std::vector<std::size_t> depth_;
    std::vector<std::uint32_t> touched_;
    std::vector<char> in_set_;
    std::vector<double> sum_, candidate_;
};

std::vector<std::span<const double>> all_profiles(const ExpressionDataset& ds) {
    std::vector<std::span<const double>> out;
    out.reserve(ds.n_genes());
    for (std::size_t j = 0; j < ds.n_genes(); ++j) {
        out.push_back(ds.gene_values(j));
    }
    return out;
}

std::vector<double> activity_of(std::span<const std::span<const double>> profiles, std::span<const std::size_t> columns,
                                std::span<const std::uint32_t> members, std::size_t n)
{
    std::vector<double> out(n, 0.0);
    for (auto m : members) {
        auto p = profiles[columns[m]];
        for (std::size_t i = 0; i < n; ++i) {
            out[i] += p[i];
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(members.size()));
    for (auto& v : out) {
        v *= scale;
    }
    return out;
}

// Counts null draws reaching `observed`, stopping once rejection at `alpha` is impossible.
// Returns nullopt when stopped early.
template<class Draw_>
std::optional<double> permutation_p(double observed, std::size_t permutations, double alpha, Draw_ draw) {
    const double limit = alpha * static_cast<double>(permutations + 1) - 1.0;
    std::size_t exceed = 0;
    for (std::size_t b = 0; b < permutations; ++b) {
        if (draw() >= observed) {
            ++exceed;
            if (static_cast<double>(exceed) >= limit) {
                return std::nullopt;
            }
        }
    }
    return static_cast<double>(exceed + 1) / static_cast<double>(permutations + 1);
}

std::vector<std::uint32_t> random_connected(const SearchGraph& graph, std::size_t size, Rng& rng) {
    std::uniform_int_distribution<std::uint32_t> pick_start(0, static_cast<std::uint32_t>(graph.size() - 1));
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<std::uint32_t> members{pick_start(rng)};
        std::vector<std::uint32_t> frontier;
        auto add_neighbors = [&](std::uint32_t node) {
            for (auto nb : graph.adjacency[node]) {
                if (std::find(members.begin(), members.end(), nb) == members.end() &&
                    std::find(frontier.begin(), frontier.end(), nb) == frontier.end()) {
                    frontier.push_back(nb);
                }
            }
        };
        add_neighbors(members[0]);
        while (members.size() < size && !frontier.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, frontier.size() - 1);
            auto pos = pick(rng);
            auto node = frontier[pos];
            frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(pos));
            members.push_back(node);
            add_neighbors(node);
        }
        if (members.size() == size) {
            return members;
        }
    }
    return {};
}

}

GrowthResult greedy_grow(const ExpressionDataset& train, const InteractionNetwork& network,
                         const GeneId& seed, const ChuangParams& params)
{
    SearchGraph graph(train, network);
    auto it = std::lower_bound(graph.nodes.begin(), graph.nodes.end(), seed);
    if (it == graph.nodes.end() || *it != seed) {
        throw Error(ErrorCode::UnmeasuredGene, seed);
    }
    auto profiles = all_profiles(train);
    Grower grower(graph, profiles, train.labels(), params);
    auto g = grower.grow(static_cast<std::uint32_t>(it - graph.nodes.begin()), graph.columns);

    GrowthResult out;
    out.seed = seed;
    for (auto m : g.members) {
        out.genes.push_back(graph.nodes[m]);
    }
    out.trajectory = std::move(g.trajectory);
    return out;
}

std::vector<RankedFeature> chuang_search(const ExpressionDataset& train, const InteractionNetwork& network,
                                         const ChuangParams& params, ChuangDiagnostics* diagnostics)
{
    SearchGraph graph(train, network);
    if (graph.size() == 0) {
        throw Error(ErrorCode::EmptyNetwork, "no network node is measured in the training data");
    }
    const auto labels = train.labels();
    const std::size_t n = labels.size();
    const auto profiles = all_profiles(train);

    // Greedy growth from every seed.
    std::vector<Growth> growths(graph.size());
    {
        // Seeds are split into contiguous chunks; each chunk owns one Grower's scratch space.
        const std::size_t chunks = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, params.jobs)), graph.size());
        parallel_for(chunks, params.jobs, [&](std::size_t chunk) {
            Grower grower(graph, profiles, labels, params);
            const std::size_t begin = chunk * graph.size() / chunks, end = (chunk + 1) * graph.size() / chunks;
            for (std::size_t s = begin; s < end; ++s) {
                growths[s] = grower.grow(static_cast<std::uint32_t>(s), graph.columns);
            }
        });
    }

    // Identical gene sets are kept once, attributed to the first seed in gene order.
    std::map<std::vector<std::uint32_t>, std::size_t> unique_sets;
    std::vector<std::size_t> candidates;
    for (std::size_t s = 0; s < growths.size(); ++s) {
        auto key = growths[s].members;
        std::sort(key.begin(), key.end());
        if (unique_sets.emplace(std::move(key), s).second) {
            candidates.push_back(s);
        }
    }

    struct Outcome {
        double mi = 0;
        std::array<std::optional<double>, 3> p;
        int passed = 0;
    };
    std::vector<Outcome> outcomes(candidates.size());

    std::vector<std::size_t> all_columns(train.n_genes());
    std::iota(all_columns.begin(), all_columns.end(), 0);

    parallel_for(candidates.size(), std::max(1, params.jobs), [&](std::size_t c) {
        const auto& growth = growths[candidates[c]];
        auto act = activity_of(profiles, graph.columns, growth.members, n);
        auto& out = outcomes[c];
        out.mi = stats::binned_mutual_information(act, labels);
        if (!params.apply_tests) {
            out.passed = 3;
            return;
        }

        Rng rng(derive_seed(params.seed, graph.nodes[candidates[c]]));

        // Label permutations of the fixed gene set.
        auto bins = stats::discretize(act);
        std::vector<Label> shuffled(labels.begin(), labels.end());
        out.p[0] = permutation_p(out.mi, params.permutations, params.alpha, [&]() {
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            return stats::mutual_information(bins, shuffled);
        });
        if (!out.p[0] || !(*out.p[0] < params.alpha)) {
            return;
        }
        out.passed = 1;

        // Random connected subnetworks of the same size.
        bool no_null = false;
        out.p[2] = permutation_p(out.mi, params.permutations, params.alpha, [&]() {
            auto members = random_connected(graph, growth.members.size(), rng);
            if (members.empty()) {
                no_null = true;
                return out.mi;
            }
            return stats::binned_mutual_information(activity_of(profiles, graph.columns, members, n), labels);
        });
        if (no_null || !out.p[2] || !(*out.p[2] < params.alpha)) {
            return;
        }
        out.passed = 2;

        // Same search from the same seed after reassigning expression profiles to nodes.
        Grower grower(graph, profiles, labels, params);
        std::vector<std::size_t> pool = all_columns;
        const auto seed = static_cast<std::uint32_t>(candidates[c]);
        out.p[1] = permutation_p(out.mi, params.permutations, params.alpha, [&]() {
            std::shuffle(pool.begin(), pool.end(), rng);
            return grower.grow(seed, std::span<const std::size_t>(pool.data(), graph.size())).trajectory.back();
        });
        if (!out.p[1] || !(*out.p[1] < params.alpha)) {
            return;
        }
        out.passed = 3;
    });

    std::vector<RankedFeature> ranked;
    ChuangDiagnostics diag;
    diag.candidates = candidates.size();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const auto& out = outcomes[c];
        if (params.apply_tests) {
            diag.passed[0] += out.passed >= 1;
            diag.passed[2] += out.passed >= 2;
            diag.passed[1] += out.passed >= 3;
        }
        if (out.passed < 3) {
            continue;
        }
        const auto& growth = growths[candidates[c]];
        RankedFeature f;
        f.kind = FeatureKind::Subnetwork;
        f.key = graph.nodes[candidates[c]];
        for (auto m : growth.members) {
            f.genes.push_back(graph.nodes[m]);
        }
        for (std::size_t a = 0; a < f.genes.size(); ++a) {
            for (std::size_t b = a + 1; b < f.genes.size(); ++b) {
                if (network.has_edge(f.genes[a], f.genes[b])) {
                    f.edges.emplace_back(std::min(f.genes[a], f.genes[b]), std::max(f.genes[a], f.genes[b]));
                }
            }
        }
        std::sort(f.edges.begin(), f.edges.end());
        f.score = out.mi;
        if (params.apply_tests) {
            f.p_values = {*out.p[0], *out.p[1], *out.p[2]};
        }
        ranked.push_back(std::move(f));
    }
    diag.survivors = ranked.size();
    rank_features(ranked, false, params.cap);
    if (diagnostics) {
        *diagnostics = diag;
    }
    return ranked;
}

}
