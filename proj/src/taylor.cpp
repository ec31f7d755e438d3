#include "netclass/error.hpp"
#include "netclass/extractors.hpp"
#include "netclass/parallel.hpp"
#include "netclass/rng.hpp"
#include "netclass/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace netclass {

namespace {

// Class-wise Pearson correlation between two profiles.
std::array<double, 2> classwise_correlation(std::span<const double> x, std::span<const double> y, std::span<const Label> labels) {
    double n[2] = {0, 0}, sx[2] = {0, 0}, sy[2] = {0, 0};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto l = labels[i];
        n[l] += 1;
        sx[l] += x[i];
        sy[l] += y[i];
    }
    double mx[2], my[2];
    for (int l = 0; l < 2; ++l) {
        mx[l] = sx[l] / n[l];
        my[l] = sy[l] / n[l];
    }
    double sxy[2] = {0, 0}, sxx[2] = {0, 0}, syy[2] = {0, 0};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto l = labels[i];
        const double dx = x[i] - mx[l], dy = y[i] - my[l];
        sxy[l] += dx * dy;
        sxx[l] += dx * dx;
        syy[l] += dy * dy;
    }
    std::array<double, 2> out;
    for (int l = 0; l < 2; ++l) {
        if (n[l] < 2 || !(sxx[l] > 0) || !(syy[l] > 0)) {
            out[l] = std::numeric_limits<double>::quiet_NaN();
        } else {
            out[l] = std::clamp(sxy[l] / std::sqrt(sxx[l] * syy[l]), -1.0, 1.0);
        }
    }
    return out;
}

double mean_abs_difference(std::span<const double> hub, std::span<const std::span<const double>> interactors, std::span<const Label> labels) {
    double total = 0;
    std::size_t used = 0;
    for (const auto& profile : interactors) {
        auto r = classwise_correlation(hub, profile, labels);
        const double d = r[0] - r[1];
        if (std::isnan(d)) {
            continue;
        }
        total += std::abs(d);
        ++used;
    }
    return used ? total / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
}

}

double average_hub_difference(const ExpressionDataset& train, const GeneId& hub, std::span<const GeneId> interactors) {
    auto h = train.gene_index(hub);
    if (!h) {
        throw Error(ErrorCode::UnmeasuredGene, hub);
    }
    std::vector<std::span<const double>> profiles;
    for (const auto& g : interactors) {
        auto j = train.gene_index(g);
        if (!j) {
            throw Error(ErrorCode::UnmeasuredGene, g);
        }
        profiles.push_back(train.gene_values(*j));
    }
    return mean_abs_difference(train.gene_values(*h), profiles, train.labels());
}

std::vector<RankedFeature> taylor_hubs(const ExpressionDataset& train, const InteractionNetwork& network,
                                       const TaylorParams& params, const std::set<GeneId>* hubs,
                                       TaylorDiagnostics* diagnostics)
{
    std::set<GeneId> computed;
    if (!hubs) {
        computed = hub_candidates(network, params.hub_fraction);
        hubs = &computed;
    }
    const auto labels = train.labels();

    struct Work {
        GeneId hub;
        std::span<const double> hub_profile;
        std::vector<GeneId> interactors;
        std::vector<std::span<const double>> profiles;
    };
    std::vector<Work> work;
    for (const auto& hub : *hubs) {
        auto h = train.gene_index(hub);
        if (!h) {
            continue;
        }
        Work w;
        w.hub = hub;
        w.hub_profile = train.gene_values(*h);
        for (const auto& nb : network.neighbors(hub)) {
            auto j = train.gene_index(nb);
            if (!j) {
                continue;
            }
            auto profile = train.gene_values(*j);
            // Interactors whose class-wise correlation is undefined carry no hub difference.
            auto r = classwise_correlation(w.hub_profile, profile, labels);
            if (std::isnan(r[0] - r[1])) {
                continue;
            }
            w.interactors.push_back(nb);
            w.profiles.push_back(profile);
        }
        if (!w.interactors.empty()) {
            work.push_back(std::move(w));
        }
    }

    // One shared set of label permutations keeps hubs comparable and the result order-independent.
    std::vector<std::vector<Label>> permuted(params.permutations, std::vector<Label>(labels.begin(), labels.end()));
    {
        Rng rng(params.seed);
        for (auto& p : permuted) {
            std::shuffle(p.begin(), p.end(), rng);
        }
    }

    std::vector<HubScore> scores(work.size());
    parallel_for(work.size(), params.jobs, [&](std::size_t w) {
        const auto& item = work[w];
        auto& sc = scores[w];
        sc.hub = item.hub;
        sc.interactors = item.interactors;
        sc.average_difference = mean_abs_difference(item.hub_profile, item.profiles, labels);
        std::size_t exceed = 0;
        for (const auto& p : permuted) {
            const double null = mean_abs_difference(item.hub_profile, item.profiles, p);
            if (!std::isnan(null) && null >= sc.average_difference) {
                ++exceed;
            }
        }
        sc.p_value = static_cast<double>(exceed + 1) / static_cast<double>(params.permutations + 1);
    });

    std::vector<RankedFeature> out;
    for (const auto& sc : scores) {
        if (!(sc.p_value < params.alpha)) {
            continue;
        }
        RankedFeature f;
        f.kind = FeatureKind::HubEdgeSet;
        f.key = sc.hub;
        f.genes.push_back(sc.hub);
        f.genes.insert(f.genes.end(), sc.interactors.begin(), sc.interactors.end());
        for (const auto& nb : sc.interactors) {
            f.edges.emplace_back(sc.hub, nb);
        }
        f.score = sc.average_difference;
        f.p_values = {sc.p_value};
        out.push_back(std::move(f));
    }
    rank_features(out, false);
    if (diagnostics) {
        diagnostics->hubs = std::move(scores);
    }
    return out;
}

}
