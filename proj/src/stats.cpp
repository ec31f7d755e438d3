#include "netclass/stats.hpp"
#include "netclass/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace netclass::stats {

std::vector<double> activity(const ExpressionDataset& ds, std::span<const std::size_t> genes) {
    if (genes.empty()) {
        throw Error(ErrorCode::EmptySubset, "activity of an empty gene subset");
    }
    std::vector<double> out(ds.n_samples(), 0.0);
    for (auto j : genes) {
        if (j >= ds.n_genes()) {
            throw Error(ErrorCode::UnmeasuredGene, "gene index out of range");
        }
        auto col = ds.gene_values(j);
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] += col[i];
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(genes.size()));
    for (auto& v : out) {
        v *= scale;
    }
    return out;
}

std::vector<double> activity(const ExpressionDataset& ds, std::span<const GeneId> genes) {
    std::vector<std::size_t> idx;
    idx.reserve(genes.size());
    for (const auto& g : genes) {
        auto j = ds.gene_index(g);
        if (!j) {
            throw Error(ErrorCode::UnmeasuredGene, g);
        }
        idx.push_back(*j);
    }
    return activity(ds, idx);
}

double t_statistic(std::span<const double> values, std::span<const Label> labels) {
    double sum[2] = {0, 0};
    std::size_t count[2] = {0, 0};
    for (std::size_t i = 0; i < values.size(); ++i) {
        sum[labels[i]] += values[i];
        ++count[labels[i]];
    }
    if (count[0] < 2 || count[1] < 2) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double mean0 = sum[0] / static_cast<double>(count[0]);
    const double mean1 = sum[1] / static_cast<double>(count[1]);
    double ss[2] = {0, 0};
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - (labels[i] ? mean1 : mean0);
        ss[labels[i]] += d * d;
    }
    const double var0 = ss[0] / static_cast<double>(count[0] - 1);
    const double var1 = ss[1] / static_cast<double>(count[1] - 1);
    const double denom = std::sqrt(var1 / static_cast<double>(count[1]) + var0 / static_cast<double>(count[0]));
    if (!(denom > 0)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return (mean1 - mean0) / denom;
}

std::size_t bin_count(std::size_t k) {
    std::size_t bins = 0;
    while ((std::size_t{1} << bins) < k) {
        ++bins;
    }
    return std::max<std::size_t>(bins, 1);
}

std::vector<std::uint32_t> discretize(std::span<const double> values) {
    return discretize(values, bin_count(values.size()));
}

std::vector<std::uint32_t> discretize(std::span<const double> values, std::size_t bins) {
    std::vector<std::uint32_t> out(values.size(), 0);
    if (values.empty() || bins <= 1) {
        return out;
    }
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double min = *lo, max = *hi;
    if (!(max > min)) {
        return out;
    }
    const double width = (max - min) / static_cast<double>(bins);
    const auto last = static_cast<std::uint32_t>(bins - 1);
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto b = static_cast<std::uint32_t>(std::floor((values[i] - min) / width));
        out[i] = std::min(b, last);
    }
    return out;
}

double mutual_information(std::span<const std::uint32_t> bins, std::span<const Label> labels) {
    const std::size_t n = bins.size();
    if (n == 0) {
        return 0;
    }
    std::uint32_t nbins = *std::max_element(bins.begin(), bins.end()) + 1;
    std::vector<std::size_t> joint(2 * nbins, 0);
    std::size_t label_count[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        ++joint[2 * bins[i] + labels[i]];
        ++label_count[labels[i]];
    }

    const double dn = static_cast<double>(n);
    double mi = 0;
    for (std::uint32_t b = 0; b < nbins; ++b) {
        const std::size_t bin_total = joint[2 * b] + joint[2 * b + 1];
        for (int l = 0; l < 2; ++l) {
            const std::size_t c = joint[2 * b + l];
            if (c == 0) {
                continue;
            }
            // p(b,l) log2( p(b,l) / (p(b) p(l)) ) with counts: c/n * log2(c n / (bin_total * label_count)).
            mi += static_cast<double>(c) / dn *
                  std::log2(static_cast<double>(c) * dn / (static_cast<double>(bin_total) * static_cast<double>(label_count[l])));
        }
    }
    return std::max(mi, 0.0);
}

double binned_mutual_information(std::span<const double> values, std::span<const Label> labels) {
    const std::size_t n = values.size();
    if (n == 0) {
        return 0;
    }
    const std::size_t bins = bin_count(n);
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double min = *lo, max = *hi;
    if (bins <= 1 || !(max > min)) {
        return 0;
    }
    const double width = (max - min) / static_cast<double>(bins);
    const auto last = static_cast<std::uint32_t>(bins - 1);

    std::array<std::size_t, 2 * 64> joint{};
    std::size_t label_count[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        auto b = std::min(static_cast<std::uint32_t>(std::floor((values[i] - min) / width)), last);
        ++joint[2 * b + labels[i]];
        ++label_count[labels[i]];
    }

    const double dn = static_cast<double>(n);
    double mi = 0;
    for (std::size_t b = 0; b < bins; ++b) {
        const std::size_t bin_total = joint[2 * b] + joint[2 * b + 1];
        for (int l = 0; l < 2; ++l) {
            const std::size_t c = joint[2 * b + l];
            if (c == 0) {
                continue;
            }
            mi += static_cast<double>(c) / dn *
                  std::log2(static_cast<double>(c) * dn / (static_cast<double>(bin_total) * static_cast<double>(label_count[l])));
        }
    }
    return std::max(mi, 0.0);
}

double pearson(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double mx = mean(x), my = mean(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0) || !(syy > 0)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    // sxy / ((n-1) sd_x sd_y) with the n-1 factors cancelling.
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double auc(std::span<const double> scores, std::span<const Label> labels) {
    const std::size_t n = scores.size();
    std::size_t n_poor = 0;
    for (std::size_t i = 0; i < n; ++i) {
        n_poor += labels[i];
    }
    const std::size_t n_good = n - n_poor;
    if (n_poor == 0 || n_good == 0) {
        throw Error(ErrorCode::SingleClass, "AUC requires both classes");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double poor_rank_sum = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) {
            ++j;
        }
        const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            if (labels[order[k]]) {
                poor_rank_sum += midrank;
            }
        }
        i = j + 1;
    }

    const double np = static_cast<double>(n_poor), ng = static_cast<double>(n_good);
    const double u = poor_rank_sum - np * (np + 1) / 2;
    return u / (np * ng);
}

double jaccard(const std::set<GeneId>& a, const std::set<GeneId>& b) {
    if (a.empty() && b.empty()) {
        return 1.0;
    }
    std::size_t inter = 0;
    for (const auto& g : a) {
        inter += b.count(g);
    }
    const std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

double normal_upper(double z) {
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}

TestResult wilcoxon_signed_rank(std::span<const double> differences, Sidedness sidedness, bool force_normal) {
    std::vector<double> nonzero;
    for (double d : differences) {
        if (d != 0) {
            nonzero.push_back(d);
        }
    }
    const std::size_t n = nonzero.size();
    if (n == 0) {
        throw Error(ErrorCode::AllZeros, "all paired differences are zero");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(nonzero[a]) < std::abs(nonzero[b]); });

    // Doubled midranks keep everything integral for the exact distribution.
    std::vector<std::size_t> rank2(n);
    double tie_term = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(nonzero[order[j + 1]]) == std::abs(nonzero[order[i]])) {
            ++j;
        }
        for (std::size_t k = i; k <= j; ++k) {
            rank2[order[k]] = i + j + 2;
        }
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }

    std::size_t w2 = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (nonzero[k] > 0) {
            w2 += rank2[k];
        }
    }

    TestResult res;
    res.statistic = static_cast<double>(w2) / 2.0;
    res.sidedness = sidedness;
    res.n = n;

    double p_greater = 0, p_less = 0;
    if (n <= wilcoxon_exact_limit && !force_normal) {
        res.exact = true;
        const std::size_t total = std::accumulate(rank2.begin(), rank2.end(), std::size_t{0});
        // counts[s] = number of sign patterns whose positive doubled-rank sum is s.
        std::vector<double> counts(total + 1, 0.0);
        counts[0] = 1;
        std::size_t reach = 0;
        for (auto r : rank2) {
            for (std::size_t s = reach + 1; s-- > 0;) {
                if (counts[s] != 0) {
                    counts[s + r] += counts[s];
                }
            }
            reach += r;
        }
        const double patterns = std::ldexp(1.0, static_cast<int>(n));
        double ge = 0, le = 0;
        for (std::size_t s = 0; s <= total; ++s) {
            if (s >= w2) {
                ge += counts[s];
            }
            if (s <= w2) {
                le += counts[s];
            }
        }
        p_greater = ge / patterns;
        p_less = le / patterns;
    } else {
        const double dn = static_cast<double>(n);
        const double mu = dn * (dn + 1) / 4;
        const double var = dn * (dn + 1) * (2 * dn + 1) / 24 - tie_term / 48;
        const double sd = std::sqrt(var);
        if (sd > 0) {
            p_greater = normal_upper((res.statistic - mu - 0.5) / sd);
            p_less = 1.0 - normal_upper((res.statistic - mu + 0.5) / sd);
        } else {
            p_greater = p_less = 1.0;
        }
    }

    switch (sidedness) {
        case Sidedness::Greater: res.p_value = p_greater; break;
        case Sidedness::Less: res.p_value = p_less; break;
        case Sidedness::TwoSided: res.p_value = std::min(1.0, 2 * std::min(p_greater, p_less)); break;
    }
    res.p_value = std::clamp(res.p_value, 0.0, 1.0);
    return res;
}

std::vector<double> bonferroni(std::span<const double> p_values) {
    const double m = static_cast<double>(p_values.size());
    std::vector<double> out;
    out.reserve(p_values.size());
    for (double p : p_values) {
        if (!(p >= 0 && p <= 1)) {
            throw Error(ErrorCode::InvalidArgument, "p-value outside [0, 1]");
        }
        out.push_back(std::min(1.0, p * m));
    }
    return out;
}

double mean(std::span<const double> values) {
    if (values.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
    if (values.size() < 2) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double m = mean(values);
    double ss = 0;
    for (double v : values) {
        ss += (v - m) * (v - m);
    }
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}
