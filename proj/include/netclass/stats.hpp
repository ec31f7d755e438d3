#ifndef NETCLASS_STATS_HPP
#define NETCLASS_STATS_HPP

#include "netclass/dataset.hpp"

#include <cstdint>
#include <set>
#include <span>
#include <vector>

/**
 * @file stats.hpp
 *
 * @brief Numerical kernel: activity scores, association statistics, AUC,
 * set overlap and the hypothesis tests used by the protocol.
 */

namespace netclass::stats {

/**
 * Activity of a gene subset: per sample, the sum of the member expressions
 * divided by the square root of the subset size.
 *
 * @param genes Column indices into `ds`; must be non-empty.
 */
std::vector<double> activity(const ExpressionDataset& ds, std::span<const std::size_t> genes);

/// Same, resolving gene identifiers; unmeasured genes raise UnmeasuredGene.
std::vector<double> activity(const ExpressionDataset& ds, std::span<const GeneId> genes);

/**
 * Welch t-statistic of class 1 against class 0, using sample variances.
 * Returns NaN when either class has fewer than two samples or the
 * denominator is zero; callers treat NaN as a degenerate feature.
 */
double t_statistic(std::span<const double> values, std::span<const Label> labels);

/// Number of bins used for `k` samples: ceil(log2 k), at least 1.
std::size_t bin_count(std::size_t k);

/**
 * Equal-width binning over [min, max] into `bin_count(values.size())` bins.
 * The maximum falls into the last bin; a constant vector maps entirely to bin 0.
 */
std::vector<std::uint32_t> discretize(std::span<const double> values);
std::vector<std::uint32_t> discretize(std::span<const double> values, std::size_t bins);

/// Plug-in mutual information (bits) between bin indices and binary labels.
double mutual_information(std::span<const std::uint32_t> bins, std::span<const Label> labels);

/// `mutual_information(discretize(values), labels)` without intermediate allocation.
double binned_mutual_information(std::span<const double> values, std::span<const Label> labels);

/// Pearson correlation with n-1 denominators; NaN if either input has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/**
 * Mann-Whitney AUC: P(score_poor > score_good) + P(equal) / 2, using midranks.
 * Raises SingleClass if either class is empty.
 */
double auc(std::span<const double> scores, std::span<const Label> labels);

/// |A n B| / |A u B|; two empty sets give 1.
double jaccard(const std::set<GeneId>& a, const std::set<GeneId>& b);

enum class Sidedness { Greater, Less, TwoSided };

struct TestResult {
    double statistic = 0;
    double p_value = 1;
    Sidedness sidedness = Sidedness::TwoSided;
    /// Number of nonzero differences used.
    std::size_t n = 0;
    bool exact = false;
};

/// Largest sample size for which the exact null distribution is enumerated.
inline constexpr std::size_t wilcoxon_exact_limit = 20;

/**
 * Wilcoxon signed-rank test on paired differences. The statistic is the
 * rank sum of the positive differences; zeros are dropped and tied
 * magnitudes receive midranks. `Greater` tests for a positive location shift.
 *
 * Uses the exact permutation distribution for up to `wilcoxon_exact_limit`
 * nonzero differences, and a continuity-corrected normal approximation
 * above (or whenever `force_normal` is set). Raises AllZeros if nothing is left.
 */
TestResult wilcoxon_signed_rank(std::span<const double> differences, Sidedness sidedness, bool force_normal = false);

/// Multiplies each p-value by the family size, clipped to 1.
std::vector<double> bonferroni(std::span<const double> p_values);

/// Sample mean and standard deviation (n-1).
double mean(std::span<const double> values);
double sample_sd(std::span<const double> values);

/// Linearly interpolated quantile of already-sorted data, `q` in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

}

#endif
