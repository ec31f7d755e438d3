#ifndef NETCLASS_DATASET_HPP
#define NETCLASS_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

/**
 * @file dataset.hpp
 *
 * @brief Expression datasets with binary outcome labels, plus loading,
 * normalization, splitting and merging.
 */

namespace netclass {

using GeneId = std::string;
using SampleId = std::string;

/// Binary outcome label: 1 = poor outcome, 0 = good outcome.
using Label = std::uint8_t;

struct Provenance {
    std::vector<std::string> sources;
    bool normalized = false;
};

/**
 * Observer notified whenever the expression values or labels of a dataset
 * are accessed. Attached with `ExpressionDataset::with_monitor()` and
 * inherited by every dataset derived from the monitored one.
 */
class ReadMonitor {
public:
    virtual ~ReadMonitor() = default;
    virtual void on_read(std::string_view what) = 0;
};

/**
 * Gene x sample expression matrix with per-sample outcome labels.
 *
 * Values are stored gene-major so that `gene_values(j)` is a contiguous
 * span over all samples. Instances are immutable after construction.
 */
class ExpressionDataset {
public:
    ExpressionDataset() = default;

    /**
     * @param values Gene-major matrix, `values[j * samples.size() + i]` is gene `j` in sample `i`.
     */
    ExpressionDataset(std::vector<GeneId> genes,
                      std::vector<SampleId> samples,
                      std::vector<double> values,
                      std::vector<Label> labels,
                      Provenance provenance = {});

    std::size_t n_samples() const { return samples_.size(); }
    std::size_t n_genes() const { return genes_.size(); }

    const std::vector<GeneId>& genes() const { return genes_; }
    const std::vector<SampleId>& samples() const { return samples_; }
    const Provenance& provenance() const { return provenance_; }

    /// Genes removed by normalization because they were constant.
    const std::vector<GeneId>& dropped_constant() const { return dropped_constant_; }

    std::optional<std::size_t> gene_index(std::string_view gene) const;
    bool has_gene(std::string_view gene) const { return gene_index(gene).has_value(); }

    std::span<const double> gene_values(std::size_t gene) const;
    std::span<const Label> labels() const;

    std::size_t class_count(Label label) const;

    ExpressionDataset subset_samples(std::span<const std::size_t> indices) const;

    /// Restricts to the listed genes, in the listed order. Unknown genes raise GeneAbsent.
    ExpressionDataset subset_genes(std::span<const GeneId> genes) const;

    /// Returns a copy whose value/label reads are reported to `monitor`.
    ExpressionDataset with_monitor(std::shared_ptr<ReadMonitor> monitor) const;

    /// Content digest over genes, samples, values and labels (hex SHA-256).
    std::string digest() const;

private:
    friend ExpressionDataset z_normalize(const ExpressionDataset&);
    friend ExpressionDataset merge_datasets(std::span<const ExpressionDataset>);

    void report(std::string_view what) const;

    std::vector<GeneId> genes_;
    std::vector<SampleId> samples_;
    std::vector<double> values_;
    std::vector<Label> labels_;
    Provenance provenance_;
    std::vector<GeneId> dropped_constant_;
    std::unordered_map<GeneId, std::size_t> gene_lookup_;
    std::shared_ptr<ReadMonitor> monitor_;
};

/**
 * Follow-up information for one sample. The derived label is poor (1) if a
 * distant event occurred within five years, good (0) if follow-up reached
 * five years without an event, and undefined otherwise (censored early).
 */
struct OutcomeRecord {
    bool event = false;
    double time_to_event = 0;

    std::optional<Label> label(double horizon_years = 5.0) const;
};

struct LoadReport {
    std::size_t collapsed_probes = 0;
    std::size_t excluded_censored = 0;
};

/**
 * Loads a gene x sample TSV ("gene_id" header followed by sample IDs) and a
 * sidecar label TSV with columns sample_id, event, time_years.
 * Duplicate gene rows are collapsed with `collapse_probes()`.
 */
ExpressionDataset load_expression(const std::filesystem::path& expression_path,
                                  const std::filesystem::path& labels_path,
                                  LoadReport* report = nullptr);

/// Index of the row with the largest sample variance; first occurrence wins ties.
std::size_t collapse_probes(std::span<const std::vector<double>> rows);

/**
 * Standardizes every gene to mean 0 and sample standard deviation 1.
 * Constant genes are removed and listed in `dropped_constant()`.
 */
ExpressionDataset z_normalize(const ExpressionDataset& ds);

/// Sample-index partitions stratified by label, deterministic given `seed`.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const Label> labels, std::size_t k, std::uint64_t seed);
std::vector<std::vector<std::size_t>> stratified_kfold(const ExpressionDataset& ds, std::size_t k, std::uint64_t seed);

/**
 * Concatenates samples over the intersection of the gene universes.
 * Inputs are not re-normalized; the normalized flag is set only if all inputs were normalized.
 */
ExpressionDataset merge_datasets(std::span<const ExpressionDataset> datasets);

inline constexpr std::string_view esr1_gene = "ESR1";

/// Samples whose ESR1 value exceeds `threshold`.
ExpressionDataset er_stratify(const ExpressionDataset& ds, double threshold = 0.0);

void write_expression(const ExpressionDataset& ds, const std::filesystem::path& path);

/// Writes a label sidecar; poor samples get an event at 2.5 years, good samples 10 years of event-free follow-up.
void write_labels(const ExpressionDataset& ds, const std::filesystem::path& path);

}

#endif
