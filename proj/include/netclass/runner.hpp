#ifndef NETCLASS_RUNNER_HPP
#define NETCLASS_RUNNER_HPP

#include "netclass/protocol.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

/**
 * @file runner.hpp
 *
 * @brief Experiment spec files, the on-disk extraction cache, and the
 * run / synth / report commands behind the command-line tool.
 */

namespace netclass {

inline constexpr int run_spec_version = 1;
inline constexpr int results_schema_version = 1;
inline constexpr std::string_view tool_version = "0.1.0";

struct DatasetEntry {
    std::string id;
    std::filesystem::path expression;
    std::filesystem::path labels;
};

struct SourceEntry {
    std::string id;
    std::filesystem::path path;
    bool is_network = true;
};

struct MethodEntry {
    MethodKind method = MethodKind::SingleGene;
    /// Empty for plain single genes.
    std::string source;
};

/// Parsed experiment spec file; relative paths are resolved against the spec's directory.
struct RunConfig {
    std::vector<DatasetEntry> datasets;
    std::vector<SourceEntry> sources;
    std::vector<MethodEntry> methods;
    std::vector<ClassifierKind> classifiers{ClassifierKind::NMC};
    std::vector<SettingKind> settings{SettingKind::Paired};
    /// 0 stands for the cross-validated feature count.
    std::vector<std::size_t> policies{0};
    bool normalize = true;
    /// Template for every cell; method, classifier, setting and policy are overwritten.
    ExperimentSpec base;
};

RunConfig parse_run_config(const std::filesystem::path& path);

/// One (method, source, classifier, setting, policy) combination.
struct Cell {
    MethodEntry method;
    ClassifierKind classifier = ClassifierKind::NMC;
    SettingKind setting = SettingKind::Paired;
    std::size_t policy = 0;

    std::string label() const;
};

std::vector<Cell> expand_cells(const RunConfig& config);

/**
 * Feature lists stored one file per key. Each file starts with a header line
 * holding the key and a digest of the body; a body that no longer matches
 * its digest raises CacheMismatch.
 */
class FileCache : public ExtractionCache {
public:
    explicit FileCache(std::filesystem::path dir);
    std::optional<std::vector<RankedFeature>> load(const std::string& key) override;
    void store(const std::string& key, const std::vector<RankedFeature>& features) override;

    std::size_t hits() const { return hits_; }
    std::size_t misses() const { return misses_; }

private:
    std::filesystem::path dir_;
    std::mutex lock_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

struct RunOptions {
    std::filesystem::path spec;
    std::filesystem::path out;
    int jobs = 1;
    std::optional<std::uint64_t> seed_override;
    bool use_cache = true;
    /// Runs only cells whose label contains this text.
    std::string only;
};

struct RunSummary {
    std::size_t cells = 0;
    std::size_t results = 0;
    std::size_t unavailable_cells = 0;
    std::size_t cache_hits = 0;
    std::size_t cache_misses = 0;
};

/**
 * Executes every cell of the spec and writes results.jsonl, traces.csv,
 * stability.jsonl, manifest.json and the analysis bundle into `out`.
 */
RunSummary run_experiments(const RunOptions& options);

/// Writes expression and label TSVs per cohort, truth.json, and any requested network or GMT file.
void synthesize(const std::filesystem::path& spec, const std::filesystem::path& out);

std::vector<ExperimentResult> read_results(const std::filesystem::path& path);

/// Builds the analysis bundle from a run directory. Raises MissingInput when no results exist.
void report(const std::filesystem::path& results_dir, const std::filesystem::path& out_dir);

}

#endif
