#ifndef NETCLASS_TESTS_ORACLES_HPP
#define NETCLASS_TESTS_ORACLES_HPP

// Brute-force reference implementations. Written from the definitions,
// without sharing code or summation order with the library.

#include "netclass/dataset.hpp"
#include "netclass/rng.hpp"
#include "netclass/secondary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using netclass::Label;

inline long double welch_t(const std::vector<double>& x, const std::vector<Label>& y) {
    std::vector<long double> a, b;
    for (std::size_t i = 0; i < x.size(); ++i) {
        (y[i] ? b : a).push_back(x[i]);
    }
    auto mean = [](const std::vector<long double>& v) {
        long double s = 0;
        for (auto e : v) s += e;
        return s / v.size();
    };
    auto var = [&](const std::vector<long double>& v) {
        long double m = mean(v), s = 0;
        for (auto e : v) s += (e - m) * (e - m);
        return s / (v.size() - 1);
    };
    return (mean(b) - mean(a)) / std::sqrt(var(b) / b.size() + var(a) / a.size());
}

inline long double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const long double n = x.size();
    long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const long double mx = sx / n, my = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

/// P(poor > good) + P(tie)/2 by comparing every (poor, good) pair.
inline long double auc(const std::vector<double>& s, const std::vector<Label>& y) {
    long double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!y[i]) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j]) continue;
            pairs += 1;
            if (s[i] > s[j]) wins += 1;
            else if (s[i] == s[j]) wins += 0.5L;
        }
    }
    return wins / pairs;
}

/// H(label) - H(label | bin) in bits from joint counts.
inline long double mutual_information(const std::vector<std::uint32_t>& bins, const std::vector<Label>& y) {
    std::map<std::pair<std::uint32_t, int>, long double> joint;
    std::map<std::uint32_t, long double> per_bin;
    long double c1 = 0;
    for (std::size_t i = 0; i < bins.size(); ++i) {
        joint[{bins[i], y[i]}] += 1;
        per_bin[bins[i]] += 1;
        c1 += y[i];
    }
    const long double n = bins.size();
    auto h = [](long double p) { return p > 0 ? -p * std::log2(p) : 0.0L; };
    long double h_label = h(c1 / n) + h((n - c1) / n);
    long double h_cond = 0;
    for (const auto& [b, nb] : per_bin) {
        long double k1 = joint.count({b, 1}) ? joint[{b, 1}] : 0;
        h_cond += nb / n * (h(k1 / nb) + h((nb - k1) / nb));
    }
    return h_label - h_cond;
}

/// Equal-width bins from the definition: bin = min(floor((x - min) / width), bins - 1).
inline std::vector<std::uint32_t> equal_width_bins(const std::vector<double>& x) {
    std::size_t bins = 1;
    while ((std::size_t{1} << bins) < x.size()) ++bins;
    const double lo = *std::min_element(x.begin(), x.end());
    const double hi = *std::max_element(x.begin(), x.end());
    std::vector<std::uint32_t> out(x.size(), 0);
    if (!(hi > lo)) return out;
    const double width = (hi - lo) / bins;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = std::min<std::uint32_t>(static_cast<std::uint32_t>(std::floor((x[i] - lo) / width)), bins - 1);
    }
    return out;
}

struct WilcoxonOracle {
    double w = 0;
    double p_greater = 0;
    double p_less = 0;
};

/// Signed-rank test by enumerating all 2^n sign assignments of the midranks.
inline WilcoxonOracle wilcoxon_enumerate(const std::vector<double>& d) {
    std::vector<double> nz;
    for (double v : d) if (v != 0) nz.push_back(v);
    const std::size_t n = nz.size();
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        double below = 0, equal = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(nz[j]) < std::abs(nz[i])) below += 1;
            else if (std::abs(nz[j]) == std::abs(nz[i])) equal += 1;
        }
        rank[i] = below + (equal + 1) / 2;
    }
    WilcoxonOracle out;
    for (std::size_t i = 0; i < n; ++i) if (nz[i] > 0) out.w += rank[i];
    long double ge = 0, le = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        double w = 0;
        for (std::size_t i = 0; i < n; ++i) if (mask >> i & 1) w += rank[i];
        if (w >= out.w - 1e-9) ge += 1;
        if (w <= out.w + 1e-9) le += 1;
    }
    const long double total = std::ldexp(1.0L, static_cast<int>(n));
    out.p_greater = static_cast<double>(ge / total);
    out.p_less = static_cast<double>(le / total);
    return out;
}

/// Random labels with at least `min_per_class` in each class.
inline std::vector<Label> random_labels(std::size_t n, std::size_t min_per_class, netclass::Rng& rng) {
    std::vector<Label> y(n, 0);
    std::bernoulli_distribution coin(0.5);
    for (auto& v : y) v = coin(rng);
    for (std::size_t i = 0; i < min_per_class && 2 * i + 1 < n; ++i) {
        y[2 * i] = 0;
        y[2 * i + 1] = 1;
    }
    std::shuffle(y.begin(), y.end(), rng);
    return y;
}

/// Dataset with N(0,1) values and the given labels; gene IDs g0000.., sample IDs s0...
inline netclass::ExpressionDataset random_dataset(std::size_t n_genes, std::vector<Label> labels, netclass::Rng& rng,
                                                  const std::string& prefix = "s") {
    std::normal_distribution<double> norm;
    std::vector<netclass::GeneId> genes;
    char buf[16];
    for (std::size_t j = 0; j < n_genes; ++j) {
        std::snprintf(buf, sizeof(buf), "g%04zu", j);
        genes.emplace_back(buf);
    }
    std::vector<netclass::SampleId> samples;
    for (std::size_t i = 0; i < labels.size(); ++i) samples.push_back(prefix + std::to_string(i));
    std::vector<double> values(n_genes * labels.size());
    for (auto& v : values) v = norm(rng);
    return netclass::ExpressionDataset(genes, samples, values, std::move(labels));
}

inline std::vector<double> column(const netclass::ExpressionDataset& ds, std::size_t j) {
    auto s = ds.gene_values(j);
    return std::vector<double>(s.begin(), s.end());
}

/// Activity from scratch in long double.
inline std::vector<double> activity(const netclass::ExpressionDataset& ds, const std::vector<std::string>& genes) {
    std::vector<long double> acc(ds.n_samples(), 0);
    for (const auto& g : genes) {
        auto col = ds.gene_values(*ds.gene_index(g));
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += col[i];
    }
    std::vector<double> out(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<double>(acc[i] / std::sqrt(static_cast<long double>(genes.size())));
    return out;
}

struct CorgOracle {
    std::vector<std::string> genes;
    long double score = 0;
};

/**
 * CORG by prefix enumeration: order members by t (direction set by the
 * member with the largest |t|), score every prefix, and return the shortest
 * prefix after which |t| stops increasing.
 */
inline CorgOracle corg_prefixes(const netclass::ExpressionDataset& ds, const std::vector<std::string>& set) {
    std::vector<Label> y(ds.labels().begin(), ds.labels().end());
    std::vector<std::pair<std::string, long double>> members;
    for (const auto& g : set) {
        if (!ds.has_gene(g)) continue;
        members.emplace_back(g, welch_t(column(ds, *ds.gene_index(g)), y));
    }
    std::string top_gene;
    long double top = -1, top_t = 0;
    for (const auto& [g, t] : members) {
        if (std::abs(t) > top || (std::abs(t) == top && g < top_gene)) {
            top = std::abs(t);
            top_t = t;
            top_gene = g;
        }
    }
    const bool desc = top_t > 0;
    std::sort(members.begin(), members.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second) return desc ? a.second > b.second : a.second < b.second;
        return a.first < b.first;
    });
    std::vector<long double> prefix_t;
    std::vector<std::string> prefix;
    for (const auto& m : members) {
        prefix.push_back(m.first);
        prefix_t.push_back(welch_t(activity(ds, prefix), y));
    }
    std::size_t k = 1;
    while (k < prefix_t.size() && std::abs(prefix_t[k]) > std::abs(prefix_t[k - 1])) ++k;
    CorgOracle out;
    out.genes.assign(prefix.begin(), prefix.begin() + static_cast<std::ptrdiff_t>(k));
    out.score = prefix_t[k - 1];
    return out;
}

}

#endif
