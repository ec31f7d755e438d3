#include "netclass/error.hpp"
#include "netclass/extractors.hpp"
#include "netclass/stats.hpp"

#include <cmath>

namespace netclass {

namespace {

std::vector<RankedFeature> rank_genes(const ExpressionDataset& train, const std::set<GeneId>* universe, std::size_t cap) {
    auto labels = train.labels();
    std::vector<RankedFeature> out;
    for (std::size_t j = 0; j < train.n_genes(); ++j) {
        const auto& gene = train.genes()[j];
        if (universe && !universe->count(gene)) {
            continue;
        }
        double t = stats::t_statistic(train.gene_values(j), labels);
        if (std::isnan(t)) {
            continue;
        }
        RankedFeature f;
        f.kind = FeatureKind::SingleGene;
        f.key = gene;
        f.genes = {gene};
        f.score = t;
        out.push_back(std::move(f));
    }
    rank_features(out, true, cap);
    return out;
}

}

std::vector<RankedFeature> sg_rank(const ExpressionDataset& train, std::size_t cap) {
    return rank_genes(train, nullptr, cap);
}

std::vector<RankedFeature> sg_rank_restricted(const ExpressionDataset& train, const std::set<GeneId>& universe, std::size_t cap) {
    auto out = rank_genes(train, &universe, cap);
    if (out.empty()) {
        throw Error(ErrorCode::EmptyIntersection, "no measured gene lies in the restricting universe");
    }
    return out;
}

}
