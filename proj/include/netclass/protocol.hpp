#ifndef NETCLASS_PROTOCOL_HPP
#define NETCLASS_PROTOCOL_HPP

#include "netclass/classifiers.hpp"
#include "netclass/dataset.hpp"
#include "netclass/extractors.hpp"
#include "netclass/features.hpp"
#include "netclass/secondary.hpp"
#include "netclass/stats.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

/**
 * @file protocol.hpp
 *
 * @brief Strict train/test validation: inner cross-validation chooses the
 * feature count on the training cohort only, the final classifier is trained
 * on the whole training cohort, and the test cohort is read exactly once for
 * scoring.
 */

namespace netclass {

enum class MethodKind { SingleGene, SingleGeneRestricted, Lee, Chuang, Taylor };
enum class ClassifierKind { NMC, LogReg };
enum class SettingKind { Paired, Merged, ErPositive, Randomized };

std::string_view to_string(MethodKind kind);
std::string_view to_string(ClassifierKind kind);
std::string_view to_string(SettingKind kind);
MethodKind method_from_string(std::string_view name);
ClassifierKind classifier_from_string(std::string_view name);
SettingKind setting_from_string(std::string_view name);

/// A network, a gene-set collection, or nothing (plain single genes).
struct SecondarySource {
    std::string id;
    std::variant<std::monostate, InteractionNetwork, GeneSetCollection> data;

    bool empty() const { return std::holds_alternative<std::monostate>(data); }
    const InteractionNetwork* network() const { return std::get_if<InteractionNetwork>(&data); }
    const GeneSetCollection* collection() const { return std::get_if<GeneSetCollection>(&data); }

    /// Genes annotated in the source.
    std::set<GeneId> universe() const;
    std::string digest() const;

    SecondarySource randomized(std::uint64_t seed, PermutationScope scope = PermutationScope::Own,
                               const std::vector<GeneId>& measured = {}, bool per_set = false) const;
};

struct MethodParams {
    std::size_t sg_cap = default_candidate_cap;
    /// 0 keeps all pathways.
    std::size_t lee_cap = 0;
    ChuangParams chuang;
    TaylorParams taylor;
};

struct ExperimentSpec {
    MethodKind method = MethodKind::SingleGene;
    ClassifierKind classifier = ClassifierKind::NMC;
    /// 0 selects the feature count by inner cross-validation; otherwise the fixed count.
    std::size_t fixed_k = 0;
    SettingKind setting = SettingKind::Paired;
    std::uint64_t base_seed = 0;
    std::size_t inner_folds = 5;
    std::size_t randomized_instances = 25;
    double er_threshold = 0.0;
    PermutationScope randomize_scope = PermutationScope::Own;
    bool randomize_per_set = false;
    MethodParams params;
    LogRegParams logreg;
    int jobs = 1;

    /// Canonical text of every parameter that affects extraction output.
    std::string extraction_signature() const;
};

enum class ResultStatus { Ok, Unavailable, NotConverged };
std::string_view to_string(ResultStatus status);

struct ExperimentResult {
    std::string method;
    std::string source;
    std::string classifier;
    std::string setting;
    std::string policy;
    /// -1 for the real secondary source, otherwise the randomized instance index.
    int instance = -1;
    std::string train;
    std::string test;
    ResultStatus status = ResultStatus::Ok;
    std::string reason;
    std::size_t n_star = 0;
    double auc = std::numeric_limits<double>::quiet_NaN();
    std::vector<RankedFeature> selected;
    /// Mean inner-CV AUC for feature counts 1..cap; NaN where no fold produced a value.
    std::vector<double> cv_curve;
    std::size_t cap = 0;
    bool converged = true;
    std::uint64_t seed = 0;
    /// Seed that generated the randomized source (instance >= 0 only).
    std::uint64_t source_seed = 0;
};

nlohmann::json to_json(const ExperimentResult& result);
ExperimentResult result_from_json(const nlohmann::json& j);

/// Persistent store for extracted feature lists, keyed by content digests.
class ExtractionCache {
public:
    virtual ~ExtractionCache() = default;
    virtual std::optional<std::vector<RankedFeature>> load(const std::string& key) = 0;
    virtual void store(const std::string& key, const std::vector<RankedFeature>& features) = 0;
};

enum class Phase { Preparation, InnerCV, FinalExtraction, FinalTraining, FinalScoring };
std::string_view to_string(Phase phase);

/// Hooks for auditing the protocol; every default is a no-op.
class ProtocolObserver {
public:
    virtual ~ProtocolObserver() = default;
    virtual void on_pair(const std::string& /*train*/, const std::string& /*test*/) {}
    virtual void on_phase(Phase /*phase*/) {}
    virtual void on_fold(std::size_t /*fold*/, const ExpressionDataset& /*fit*/, const ExpressionDataset& /*validation*/) {}
    virtual void on_extract(const ExpressionDataset& /*train*/) {}
};

struct ProtocolContext {
    ExtractionCache* cache = nullptr;
    ProtocolObserver* observer = nullptr;
};

struct NamedDataset {
    std::string id;
    ExpressionDataset data;
};

/// Runs the configured extractor on `train` (restricting the source to measured genes as each method requires).
std::vector<RankedFeature> extract_features(const ExpressionDataset& train, const SecondarySource& source,
                                            const ExperimentSpec& spec, std::uint64_t seed, const ProtocolContext& ctx = {});

struct CvSelection {
    std::size_t n_star = 0;
    std::vector<double> mean_auc;
    std::size_t cap = 0;
};

/**
 * Chooses the number of ranked units by stratified k-fold cross-validation on
 * `train`: features are extracted on each fold complement, classifiers with
 * 1..n units are scored on the held-out fold, and the count with the highest
 * mean AUC wins (smallest count on ties). Raises NoFeatures if no fold yields
 * a usable curve.
 */
CvSelection inner_cv_select(const NamedDataset& train, const SecondarySource& source, const ExperimentSpec& spec,
                            const ProtocolContext& ctx = {});

/// Index of the largest finite value; the smallest index wins ties. nullopt if none is finite.
std::optional<std::size_t> argmax_first(std::span<const double> values);

/// Everything derived from the training cohort alone.
struct TrainedPipeline {
    std::string train_id;
    ResultStatus status = ResultStatus::Ok;
    std::string reason;
    std::size_t n_star = 0;
    std::vector<double> cv_curve;
    std::size_t cap = 0;
    std::vector<RankedFeature> selected;
    std::variant<TrainedNMC, TrainedLogReg> model;
};

TrainedPipeline train_pipeline(const NamedDataset& train, const SecondarySource& source, const ExperimentSpec& spec,
                               const ProtocolContext& ctx = {});

/// Optional transformation applied to the test cohort inside the scoring phase (e.g. ER filtering).
using TestTransform = std::function<ExpressionDataset(const ExpressionDataset&)>;

ExperimentResult evaluate_pipeline(const TrainedPipeline& pipeline, const NamedDataset& test, const SecondarySource& source,
                                   const ExperimentSpec& spec, const ProtocolContext& ctx = {},
                                   const TestTransform& transform = {});

/// Train on `train`, validate once on `test`.
ExperimentResult run_pair(const NamedDataset& train, const NamedDataset& test, const SecondarySource& source,
                          const ExperimentSpec& spec, const ProtocolContext& ctx = {});

/// Every ordered (train, test) pair: n (n - 1) results.
std::vector<ExperimentResult> run_paired_setting(std::span<const NamedDataset> datasets, const SecondarySource& source,
                                                 const ExperimentSpec& spec, const ProtocolContext& ctx = {});

/// Leave one cohort out, train on the merge of the rest: n results.
std::vector<ExperimentResult> run_merged_setting(std::span<const NamedDataset> datasets, const SecondarySource& source,
                                                 const ExperimentSpec& spec, const ProtocolContext& ctx = {});

/// As the merged setting, on the ER-positive samples of every cohort: n results.
std::vector<ExperimentResult> run_er_setting(std::span<const NamedDataset> datasets, const SecondarySource& source,
                                             const ExperimentSpec& spec, const ProtocolContext& ctx = {});

struct RandomizedOutcome {
    std::vector<ExperimentResult> real;
    /// One paired-setting result list per instance.
    std::vector<std::vector<ExperimentResult>> instances;
    std::vector<std::uint64_t> seeds;
    /// One-sided paired Wilcoxon (real AUC greater than randomized) per instance.
    std::vector<stats::TestResult> tests;
    std::vector<double> adjusted_p;
};

/**
 * Paired setting on the real source and on `spec.randomized_instances`
 * relabeled copies (instance i uses seed base_seed + i).
 */
RandomizedOutcome run_randomized(std::span<const NamedDataset> datasets, const SecondarySource& source,
                                 const ExperimentSpec& spec, const ProtocolContext& ctx = {});

/// Paired Wilcoxon of real against one randomized instance over pairs where both AUCs exist.
stats::TestResult compare_real_to_randomized(std::span<const ExperimentResult> real, std::span<const ExperimentResult> randomized);

/// Gene IDs present in every dataset, in the order of the first.
std::vector<GeneId> common_genes(std::span<const NamedDataset> datasets);

}

#endif
