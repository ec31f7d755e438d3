#include "netclass/extractors.hpp"
#include "netclass/stats.hpp"

#include <algorithm>
#include <cmath>

namespace netclass {

std::optional<CorgResult> corg_search(const ExpressionDataset& train, const GeneSet& set) {
    auto labels = train.labels();

    struct Member {
        GeneId gene;
        std::size_t column;
        double t;
    };
    std::vector<Member> members;
    for (const auto& g : set.genes) {
        auto j = train.gene_index(g);
        if (!j) {
            continue;
        }
        double t = stats::t_statistic(train.gene_values(*j), labels);
        if (!std::isnan(t)) {
            members.push_back({g, *j, t});
        }
    }
    if (members.empty()) {
        return std::nullopt;
    }

    const auto top = std::max_element(members.begin(), members.end(), [](const Member& a, const Member& b) {
        if (std::abs(a.t) != std::abs(b.t)) {
            return std::abs(a.t) < std::abs(b.t);
        }
        return a.gene > b.gene;
    });
    const bool descending = top->t > 0;
    std::sort(members.begin(), members.end(), [descending](const Member& a, const Member& b) {
        if (a.t != b.t) {
            return descending ? a.t > b.t : a.t < b.t;
        }
        return a.gene < b.gene;
    });

    const std::size_t n = train.n_samples();
    std::vector<double> sum(n, 0.0), candidate(n);
    CorgResult result;
    double best = 0;
    for (std::size_t m = 0; m < members.size(); ++m) {
        auto col = train.gene_values(members[m].column);
        const double scale = 1.0 / std::sqrt(static_cast<double>(m + 1));
        for (std::size_t i = 0; i < n; ++i) {
            candidate[i] = (sum[i] + col[i]) * scale;
        }
        const double t = stats::t_statistic(candidate, labels);
        if (m > 0 && !(std::abs(t) > std::abs(best))) {
            break;
        }
        if (m == 0 && std::isnan(t)) {
            return std::nullopt;
        }
        for (std::size_t i = 0; i < n; ++i) {
            sum[i] += col[i];
        }
        best = t;
        result.genes.push_back(members[m].gene);
        result.trajectory.push_back(t);
    }
    result.score = best;
    return result;
}

std::vector<RankedFeature> lee_corgs(const ExpressionDataset& train, const GeneSetCollection& collection, std::size_t cap) {
    std::vector<RankedFeature> out;
    for (const auto& set : collection.sets()) {
        auto corg = corg_search(train, set);
        if (!corg) {
            continue;
        }
        RankedFeature f;
        f.kind = FeatureKind::CorgSet;
        f.key = set.name;
        f.genes = std::move(corg->genes);
        f.score = corg->score;
        out.push_back(std::move(f));
    }
    rank_features(out, true, cap);
    return out;
}

}
