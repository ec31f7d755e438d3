#ifndef NETCLASS_ANALYSIS_HPP
#define NETCLASS_ANALYSIS_HPP

#include "netclass/dataset.hpp"
#include "netclass/features.hpp"
#include "netclass/protocol.hpp"
#include "netclass/stats.hpp"

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace netclass {

/// Pseudo-count added to wins and losses when either is zero.
inline constexpr double win_loss_pseudo_count = 0.5;

struct WinLoss {
    std::size_t wins = 0;
    std::size_t losses = 0;
    std::size_t draws = 0;
    double log2_ratio = 0;
    bool pseudo_count = false;
};

/**
 * Compares AUCs of two result sets aligned by (train, test). Pairs where
 * either side lacks an AUC are skipped; equal AUCs are draws. Raises
 * Misaligned unless both sets cover the same pairs.
 */
WinLoss win_loss(std::span<const ExperimentResult> a, std::span<const ExperimentResult> b);

struct WinLossMatrix {
    std::vector<std::string> labels;
    /// cells[i][j] compares labels[i] against labels[j]; the diagonal is all draws.
    std::vector<std::vector<WinLoss>> cells;
};

WinLossMatrix win_loss_matrix(const std::vector<std::pair<std::string, std::vector<ExperimentResult>>>& groups);

/// Paired Wilcoxon signed-rank on AUC(a) - AUC(b). AllZeros propagates.
stats::TestResult compare_methods(std::span<const ExperimentResult> a, std::span<const ExperimentResult> b,
                                  stats::Sidedness sidedness);

/// Union of member genes over the first `top_k` features.
std::set<GeneId> signature_genes(std::span<const RankedFeature> features, std::size_t top_k);

struct StabilityReport {
    std::vector<std::string> datasets;
    /// Index pairs (i < j) in lexicographic order, one Jaccard value each.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<double> jaccard;
};

StabilityReport pairwise_jaccard(const std::vector<std::string>& datasets, std::span<const std::set<GeneId>> gene_sets);

/// Jaccard of signature genes between every pair of per-dataset feature lists.
StabilityReport stability(const std::vector<std::string>& datasets, std::span<const std::vector<RankedFeature>> features,
                          std::size_t top_k);

/**
 * The `m` genes with the largest |t| in `train` among those annotated in
 * `universe` (ties by gene ID). Raises UniverseTooSmall if fewer than `m`
 * such genes have a defined t-statistic.
 */
std::vector<GeneId> size_matched_control(std::size_t m, const ExpressionDataset& train, const std::set<GeneId>& universe);

struct Summary {
    std::string group;
    std::size_t n = 0;
    double median = 0;
    double q1 = 0;
    double q3 = 0;
    double mean = 0;
    double sd = 0;
    double min = 0;
    double max = 0;
    /// Values beyond 1.5 IQR from the quartiles.
    std::vector<double> outliers;
};

/// Per-group distribution summary (linear-interpolation quantiles), sorted by median descending, then by name.
std::vector<Summary> summarize(const std::map<std::string, std::vector<double>>& groups);

/// Identifies a method combination: method, source, classifier, policy.
std::string combination_label(const ExperimentResult& r);

/// Per-dataset stability of one method combination, composite signatures against size-matched controls.
struct StabilityRecord {
    std::string combination;
    std::size_t top_k = 0;
    StabilityReport composite;
    StabilityReport control;
};

nlohmann::json to_json(const StabilityRecord& record);
StabilityRecord stability_from_json(const nlohmann::json& j);

/**
 * Writes fig1a.csv, fig1b.csv, tests.csv, summary.json and, when stability
 * records are given, fig6.csv and fig7.csv into `out_dir`.
 */
void write_report(std::span<const ExperimentResult> results, std::span<const StabilityRecord> stability,
                  const std::filesystem::path& out_dir);

}

#endif
