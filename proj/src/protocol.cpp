#include "netclass/protocol.hpp"
#include "netclass/digest.hpp"
#include "netclass/error.hpp"
#include "netclass/parallel.hpp"
#include "netclass/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace netclass {

std::string_view to_string(MethodKind kind) {
    switch (kind) {
        case MethodKind::SingleGene: return "sg";
        case MethodKind::SingleGeneRestricted: return "sg_restricted";
        case MethodKind::Lee: return "lee";
        case MethodKind::Chuang: return "chuang";
        case MethodKind::Taylor: return "taylor";
    }
    return "unknown";
}

std::string_view to_string(ClassifierKind kind) {
    return kind == ClassifierKind::NMC ? "nmc" : "logreg";
}

std::string_view to_string(SettingKind kind) {
    switch (kind) {
        case SettingKind::Paired: return "paired";
        case SettingKind::Merged: return "merged";
        case SettingKind::ErPositive: return "er";
        case SettingKind::Randomized: return "randomized";
    }
    return "unknown";
}

std::string_view to_string(ResultStatus status) {
    switch (status) {
        case ResultStatus::Ok: return "ok";
        case ResultStatus::Unavailable: return "unavailable";
        case ResultStatus::NotConverged: return "not_converged";
    }
    return "unknown";
}

std::string_view to_string(Phase phase) {
    switch (phase) {
        case Phase::Preparation: return "preparation";
        case Phase::InnerCV: return "inner_cv";
        case Phase::FinalExtraction: return "final_extraction";
        case Phase::FinalTraining: return "final_training";
        case Phase::FinalScoring: return "final_scoring";
    }
    return "unknown";
}

MethodKind method_from_string(std::string_view name) {
    for (auto k : {MethodKind::SingleGene, MethodKind::SingleGeneRestricted, MethodKind::Lee, MethodKind::Chuang, MethodKind::Taylor}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw Error(ErrorCode::InvalidSpec, "unknown method '" + std::string(name) + "'");
}

ClassifierKind classifier_from_string(std::string_view name) {
    if (name == "nmc") {
        return ClassifierKind::NMC;
    }
    if (name == "logreg") {
        return ClassifierKind::LogReg;
    }
    throw Error(ErrorCode::InvalidSpec, "unknown classifier '" + std::string(name) + "'");
}

SettingKind setting_from_string(std::string_view name) {
    for (auto k : {SettingKind::Paired, SettingKind::Merged, SettingKind::ErPositive, SettingKind::Randomized}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw Error(ErrorCode::InvalidSpec, "unknown setting '" + std::string(name) + "'");
}

std::set<GeneId> SecondarySource::universe() const {
    if (auto n = network()) {
        return n->nodes();
    }
    if (auto c = collection()) {
        return c->universe();
    }
    return {};
}

std::string SecondarySource::digest() const {
    Hasher h;
    h.update(id);
    if (auto n = network()) {
        h.update("network");
        for (const auto& node : n->nodes()) {
            h.update(node);
        }
        h.update_u64(n->edges().size());
        for (const auto& [a, b] : n->edges()) {
            h.update(a).update(b);
        }
    } else if (auto c = collection()) {
        h.update("genesets");
        for (const auto& s : c->sets()) {
            h.update(s.name).update_u64(s.genes.size());
            for (const auto& g : s.genes) {
                h.update(g);
            }
        }
    } else {
        h.update("none");
    }
    return h.hex();
}

SecondarySource SecondarySource::randomized(std::uint64_t seed, PermutationScope scope,
                                            const std::vector<GeneId>& measured, bool per_set) const
{
    std::vector<GeneId> pool;
    if (scope == PermutationScope::Universe) {
        auto own = universe();
        std::set<GeneId> all(measured.begin(), measured.end());
        all.insert(own.begin(), own.end());
        pool.assign(all.begin(), all.end());
    }
    SecondarySource out;
    out.id = id;
    if (auto n = network()) {
        out.data = randomize_identities(*n, seed, scope, pool);
    } else if (auto c = collection()) {
        out.data = randomize_identities(*c, seed, scope, pool, per_set);
    }
    return out;
}

std::string ExperimentSpec::extraction_signature() const {
    std::ostringstream out;
    out.precision(17);
    out << to_string(method);
    switch (method) {
        case MethodKind::SingleGene:
        case MethodKind::SingleGeneRestricted:
            out << ";cap=" << params.sg_cap;
            break;
        case MethodKind::Lee:
            out << ";cap=" << params.lee_cap;
            break;
        case MethodKind::Chuang: {
            const auto& c = params.chuang;
            out << ";size=" << c.max_size << ";depth=" << c.max_depth << ";perm=" << c.permutations << ";alpha=" << c.alpha
                << ";cap=" << c.cap << ";tests=" << c.apply_tests;
            break;
        }
        case MethodKind::Taylor: {
            const auto& t = params.taylor;
            out << ";hubs=" << t.hub_fraction << ";perm=" << t.permutations << ";alpha=" << t.alpha;
            break;
        }
    }
    return out.str();
}

nlohmann::json to_json(const ExperimentResult& r) {
    nlohmann::json j;
    j["schema"] = 1;
    j["method"] = r.method;
    j["source"] = r.source;
    j["classifier"] = r.classifier;
    j["setting"] = r.setting;
    j["policy"] = r.policy;
    j["instance"] = r.instance;
    j["train"] = r.train;
    j["test"] = r.test;
    j["status"] = to_string(r.status);
    j["reason"] = r.reason;
    j["n_star"] = r.n_star;
    j["auc"] = std::isnan(r.auc) ? nlohmann::json(nullptr) : nlohmann::json(r.auc);
    auto features = nlohmann::json::array();
    for (const auto& f : r.selected) {
        features.push_back(to_json(f));
    }
    j["selected"] = std::move(features);
    auto curve = nlohmann::json::array();
    for (double v : r.cv_curve) {
        curve.push_back(std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
    }
    j["cv_curve"] = std::move(curve);
    j["cap"] = r.cap;
    j["converged"] = r.converged;
    j["seed"] = r.seed;
    j["source_seed"] = r.source_seed;
    return j;
}

ExperimentResult result_from_json(const nlohmann::json& j) {
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    auto real = [&](const nlohmann::json& v) { return v.is_null() ? nan : v.get<double>(); };

    ExperimentResult r;
    r.method = j.at("method").get<std::string>();
    r.source = j.at("source").get<std::string>();
    r.classifier = j.at("classifier").get<std::string>();
    r.setting = j.at("setting").get<std::string>();
    r.policy = j.at("policy").get<std::string>();
    r.instance = j.at("instance").get<int>();
    r.train = j.at("train").get<std::string>();
    r.test = j.at("test").get<std::string>();
    const auto status = j.at("status").get<std::string>();
    if (status == "ok") {
        r.status = ResultStatus::Ok;
    } else if (status == "unavailable") {
        r.status = ResultStatus::Unavailable;
    } else if (status == "not_converged") {
        r.status = ResultStatus::NotConverged;
    } else {
        throw Error(ErrorCode::InvalidSpec, "unknown result status '" + status + "'");
    }
    r.reason = j.at("reason").get<std::string>();
    r.n_star = j.at("n_star").get<std::size_t>();
    r.auc = real(j.at("auc"));
    for (const auto& f : j.at("selected")) {
        r.selected.push_back(feature_from_json(f));
    }
    for (const auto& v : j.at("cv_curve")) {
        r.cv_curve.push_back(real(v));
    }
    r.cap = j.at("cap").get<std::size_t>();
    r.converged = j.at("converged").get<bool>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.source_seed = j.at("source_seed").get<std::uint64_t>();
    return r;
}

namespace {

void notify_phase(const ProtocolContext& ctx, Phase phase) {
    if (ctx.observer) {
        ctx.observer->on_phase(phase);
    }
}

std::vector<RankedFeature> run_extractor(const ExpressionDataset& train, const SecondarySource& source,
                                         const ExperimentSpec& spec, std::uint64_t seed)
{
    auto need_network = [&]() -> const InteractionNetwork& {
        if (!source.network()) {
            throw Error(ErrorCode::InvalidSpec, std::string(to_string(spec.method)) + " requires an interaction network");
        }
        return *source.network();
    };

    switch (spec.method) {
        case MethodKind::SingleGene:
            return sg_rank(train, spec.params.sg_cap);
        case MethodKind::SingleGeneRestricted:
            if (source.empty()) {
                throw Error(ErrorCode::InvalidSpec, "sg_restricted requires a secondary source");
            }
            return sg_rank_restricted(train, source.universe(), spec.params.sg_cap);
        case MethodKind::Lee: {
            if (!source.collection()) {
                throw Error(ErrorCode::InvalidSpec, "lee requires a gene-set collection");
            }
            return lee_corgs(train, restrict_to_measured(*source.collection(), train), spec.params.lee_cap);
        }
        case MethodKind::Chuang: {
            auto params = spec.params.chuang;
            params.seed = seed;
            params.jobs = spec.jobs;
            return chuang_search(train, restrict_to_measured(need_network(), train), params);
        }
        case MethodKind::Taylor: {
            auto params = spec.params.taylor;
            params.seed = seed;
            params.jobs = spec.jobs;
            return taylor_hubs(train, need_network(), params);
        }
    }
    throw Error(ErrorCode::InvalidSpec, "unknown method");
}

// AUC of a classifier using the first `units` ranked units; NaN for a non-converged fit.
double classifier_auc(const FeatureMatrix& fit, std::span<const Label> fit_labels, const FeatureMatrix& eval,
                      std::span<const Label> eval_labels, std::size_t units, const ExperimentSpec& spec)
{
    const auto columns = fit.columns_for_units(units);
    if (spec.classifier == ClassifierKind::NMC) {
        auto model = nmc_train(fit, fit_labels, columns);
        return stats::auc(nmc_score(model, eval), eval_labels);
    }
    auto model = logreg_train(fit, fit_labels, spec.logreg, columns);
    if (!model.converged) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return stats::auc(logreg_score(model, eval), eval_labels);
}

std::uint64_t fold_seed(const ExperimentSpec& spec, const std::string& train_id) {
    return derive_seed(spec.base_seed, "folds/" + train_id);
}

std::uint64_t extraction_seed(const ExperimentSpec& spec, const std::string& train_id, const std::string& part) {
    return derive_seed(spec.base_seed, "extract/" + train_id + "/" + part);
}

std::string policy_name(const ExperimentSpec& spec) {
    return spec.fixed_k == 0 ? "cv" : "k" + std::to_string(spec.fixed_k);
}

// Training cohorts are reduced to the genes every cohort of the setting measures (identifiers only).
ExpressionDataset restrict_genes(const ExpressionDataset& ds, const std::vector<GeneId>& genes) {
    if (ds.genes() == genes) {
        return ds;
    }
    return ds.subset_genes(genes);
}

// Infrastructure failures abort the run rather than becoming unavailable results.
std::string reason_of(const Error& e) {
    if (e.code() == ErrorCode::CacheMismatch || e.code() == ErrorCode::Io) {
        throw e;
    }
    return e.what();
}

ExperimentResult result_header(const ExperimentSpec& spec, const SecondarySource& source, const std::string& train,
                               const std::string& test)
{
    ExperimentResult r;
    r.method = to_string(spec.method);
    r.source = source.empty() ? "none" : source.id;
    r.classifier = to_string(spec.classifier);
    r.setting = to_string(spec.setting);
    r.policy = policy_name(spec);
    r.train = train;
    r.test = test;
    r.seed = spec.base_seed;
    return r;
}

ExperimentResult unavailable(const ExperimentSpec& spec, const SecondarySource& source, const std::string& train,
                             const std::string& test, std::string reason)
{
    auto r = result_header(spec, source, train, test);
    r.status = ResultStatus::Unavailable;
    r.reason = std::move(reason);
    return r;
}

std::string join_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) {
            out += '+';
        }
        out += id;
    }
    return out;
}

// Outer jobs run pipelines concurrently; extractors then run single-threaded.
ExperimentSpec inner_spec(const ExperimentSpec& spec, bool outer_parallel) {
    auto copy = spec;
    if (outer_parallel) {
        copy.jobs = 1;
    }
    return copy;
}

int outer_jobs(const ExperimentSpec& spec, const ProtocolContext& ctx) {
    return ctx.observer ? 1 : spec.jobs;
}

}

std::vector<RankedFeature> extract_features(const ExpressionDataset& train, const SecondarySource& source,
                                            const ExperimentSpec& spec, std::uint64_t seed, const ProtocolContext& ctx)
{
    if (ctx.observer) {
        ctx.observer->on_extract(train);
    }
    std::string key;
    if (ctx.cache) {
        Hasher h;
        h.update(train.digest()).update(source.digest()).update(spec.extraction_signature()).update_u64(seed);
        key = h.hex();
        if (auto hit = ctx.cache->load(key)) {
            return *hit;
        }
    }
    auto features = run_extractor(train, source, spec, seed);
    if (ctx.cache) {
        ctx.cache->store(key, features);
    }
    return features;
}

std::optional<std::size_t> argmax_first(std::span<const double> values) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isnan(values[i])) {
            continue;
        }
        if (!best || values[i] > values[*best]) {
            best = i;
        }
    }
    return best;
}

CvSelection inner_cv_select(const NamedDataset& train, const SecondarySource& source, const ExperimentSpec& spec,
                            const ProtocolContext& ctx)
{
    const auto& ds = train.data;
    for (Label l : {Label{0}, Label{1}}) {
        if (ds.class_count(l) < spec.inner_folds) {
            throw Error(ErrorCode::ClassTooSmall, "each class needs at least " + std::to_string(spec.inner_folds) +
                        " samples for inner cross-validation");
        }
    }
    const auto folds = stratified_kfold(ds.labels(), spec.inner_folds, fold_seed(spec, train.id));

    std::vector<std::vector<double>> curves;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<bool> held(ds.n_samples(), false);
        for (auto i : folds[f]) {
            held[i] = true;
        }
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < ds.n_samples(); ++i) {
            if (!held[i]) {
                rest.push_back(i);
            }
        }
        const auto fit = ds.subset_samples(rest);
        const auto validation = ds.subset_samples(folds[f]);
        if (ctx.observer) {
            ctx.observer->on_fold(f, fit, validation);
        }

        const auto features = extract_features(fit, source, spec, extraction_seed(spec, train.id, std::to_string(f)), ctx);
        if (features.empty()) {
            continue;
        }
        const auto x_fit = feature_values(features, fit);
        const auto x_val = feature_values(features, validation);
        const auto fit_labels = fit.labels();
        const auto val_labels = validation.labels();
        std::vector<double> curve(features.size());
        for (std::size_t n = 1; n <= features.size(); ++n) {
            curve[n - 1] = classifier_auc(x_fit, fit_labels, x_val, val_labels, n, spec);
        }
        curves.push_back(std::move(curve));
    }
    if (curves.empty()) {
        throw Error(ErrorCode::NoFeatures, "no inner fold produced any feature");
    }

    CvSelection out;
    out.cap = curves.front().size();
    for (const auto& c : curves) {
        out.cap = std::min(out.cap, c.size());
    }
    out.mean_auc.assign(out.cap, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t n = 0; n < out.cap; ++n) {
        double sum = 0;
        std::size_t used = 0;
        for (const auto& c : curves) {
            if (!std::isnan(c[n])) {
                sum += c[n];
                ++used;
            }
        }
        if (used) {
            out.mean_auc[n] = sum / static_cast<double>(used);
        }
    }
    if (auto best = argmax_first(out.mean_auc)) {
        out.n_star = *best + 1;
    }
    return out;
}

TrainedPipeline train_pipeline(const NamedDataset& train, const SecondarySource& source, const ExperimentSpec& spec,
                               const ProtocolContext& ctx)
{
    TrainedPipeline p;
    p.train_id = train.id;
    try {
        std::size_t n = spec.fixed_k;
        if (spec.fixed_k == 0) {
            notify_phase(ctx, Phase::InnerCV);
            auto selection = inner_cv_select(train, source, spec, ctx);
            p.cv_curve = std::move(selection.mean_auc);
            p.cap = selection.cap;
            if (selection.n_star == 0) {
                p.status = ResultStatus::NotConverged;
                p.reason = "no feature count produced a converged inner-CV fit";
                return p;
            }
            n = selection.n_star;
        }

        notify_phase(ctx, Phase::FinalExtraction);
        auto features = extract_features(train.data, source, spec, extraction_seed(spec, train.id, "full"), ctx);
        if (spec.fixed_k != 0) {
            p.cap = features.size();
            if (features.size() < spec.fixed_k) {
                p.status = ResultStatus::Unavailable;
                p.reason = "only " + std::to_string(features.size()) + " significant features for fixed k = " +
                           std::to_string(spec.fixed_k);
                return p;
            }
        }
        if (features.empty()) {
            p.status = ResultStatus::Unavailable;
            p.reason = "NoFeatures: extraction on the full training set returned no features";
            return p;
        }
        n = std::min(n, features.size());
        features.resize(n);
        p.n_star = n;
        p.selected = std::move(features);

        notify_phase(ctx, Phase::FinalTraining);
        const auto x = feature_values(p.selected, train.data);
        if (spec.classifier == ClassifierKind::NMC) {
            p.model = nmc_train(x, train.data.labels());
        } else {
            auto model = logreg_train(x, train.data.labels(), spec.logreg);
            if (!model.converged) {
                p.status = ResultStatus::NotConverged;
                p.reason = "logistic regression failed: " + std::string(to_string(model.failure));
            }
            p.model = std::move(model);
        }
    } catch (const Error& e) {
        p.status = ResultStatus::Unavailable;
        p.reason = reason_of(e);
    }
    return p;
}

ExperimentResult evaluate_pipeline(const TrainedPipeline& pipeline, const NamedDataset& test, const SecondarySource& source,
                                   const ExperimentSpec& spec, const ProtocolContext& ctx, const TestTransform& transform)
{
    auto r = result_header(spec, source, pipeline.train_id, test.id);
    r.status = pipeline.status;
    r.reason = pipeline.reason;
    r.n_star = pipeline.n_star;
    r.selected = pipeline.selected;
    r.cv_curve = pipeline.cv_curve;
    r.cap = pipeline.cap;
    if (auto lr = std::get_if<TrainedLogReg>(&pipeline.model)) {
        r.converged = lr->converged;
    }
    if (pipeline.status == ResultStatus::NotConverged) {
        r.converged = false;
    }
    if (pipeline.status != ResultStatus::Ok) {
        return r;
    }

    notify_phase(ctx, Phase::FinalScoring);
    try {
        const auto scored = transform ? transform(test.data) : test.data;
        if (scored.n_samples() == 0) {
            throw Error(ErrorCode::EmptyDataset, "test set has no samples");
        }
        const auto x = feature_values(pipeline.selected, scored);
        std::vector<double> scores;
        if (auto nmc = std::get_if<TrainedNMC>(&pipeline.model)) {
            scores = nmc_score(*nmc, x);
        } else {
            scores = logreg_score(std::get<TrainedLogReg>(pipeline.model), x);
        }
        r.auc = stats::auc(scores, scored.labels());
    } catch (const Error& e) {
        r.status = ResultStatus::Unavailable;
        r.reason = reason_of(e);
    }
    return r;
}

std::vector<GeneId> common_genes(std::span<const NamedDataset> datasets) {
    if (datasets.empty()) {
        return {};
    }
    std::vector<GeneId> out;
    for (const auto& g : datasets[0].data.genes()) {
        if (std::all_of(datasets.begin() + 1, datasets.end(), [&](const NamedDataset& d) { return d.data.has_gene(g); })) {
            out.push_back(g);
        }
    }
    return out;
}

ExperimentResult run_pair(const NamedDataset& train, const NamedDataset& test, const SecondarySource& source,
                          const ExperimentSpec& spec, const ProtocolContext& ctx)
{
    if (train.id == test.id) {
        throw Error(ErrorCode::InvalidArgument, "train and test must differ");
    }
    if (ctx.observer) {
        ctx.observer->on_pair(train.id, test.id);
    }
    notify_phase(ctx, Phase::Preparation);
    const std::vector<NamedDataset> both{train, test};
    const auto genes = common_genes(both);
    if (genes.empty()) {
        return unavailable(spec, source, train.id, test.id, "EmptyIntersection: train and test share no genes");
    }
    NamedDataset restricted{train.id, restrict_genes(train.data, genes)};
    auto pipeline = train_pipeline(restricted, source, spec, ctx);
    return evaluate_pipeline(pipeline, test, source, spec, ctx);
}

std::vector<ExperimentResult> run_paired_setting(std::span<const NamedDataset> datasets, const SecondarySource& source,
                                                 const ExperimentSpec& spec, const ProtocolContext& ctx)
{
    notify_phase(ctx, Phase::Preparation);
    const auto genes = common_genes(datasets);
    const auto n = datasets.size();
    const int jobs = outer_jobs(spec, ctx);
    const auto inner = inner_spec(spec, jobs > 1 && n > 1);

    std::vector<std::optional<TrainedPipeline>> pipelines(n);
    std::vector<std::string> failures(n);
    if (genes.empty()) {
        std::fill(failures.begin(), failures.end(), "EmptyIntersection: cohorts share no genes");
    } else if (ctx.observer) {
        // Training is interleaved with scoring so that each pair's phases are reported in order.
    } else {
        parallel_for(n, jobs, [&](std::size_t i) {
            NamedDataset restricted{datasets[i].id, restrict_genes(datasets[i].data, genes)};
            pipelines[i] = train_pipeline(restricted, source, inner, ctx);
        });
    }

    std::vector<ExperimentResult> out;
    out.reserve(n * (n > 0 ? n - 1 : 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            if (!failures[i].empty()) {
                out.push_back(unavailable(spec, source, datasets[i].id, datasets[j].id, failures[i]));
                continue;
            }
            if (ctx.observer) {
                ctx.observer->on_pair(datasets[i].id, datasets[j].id);
                if (!pipelines[i]) {
                    NamedDataset restricted{datasets[i].id, restrict_genes(datasets[i].data, genes)};
                    pipelines[i] = train_pipeline(restricted, source, inner, ctx);
                }
            }
            out.push_back(evaluate_pipeline(*pipelines[i], datasets[j], source, spec, ctx));
        }
    }
    for (auto& r : out) {
        r.setting = to_string(SettingKind::Paired);
    }
    return out;
}

namespace {

void stamp_setting(std::vector<ExperimentResult>& results, SettingKind setting) {
    for (auto& r : results) {
        r.setting = to_string(setting);
    }
}

using TrainPreparer = std::function<std::optional<ExpressionDataset>(const ExpressionDataset&)>;

std::vector<ExperimentResult> leave_one_out(std::span<const NamedDataset> datasets, const SecondarySource& source,
                                            const ExperimentSpec& spec, const ProtocolContext& ctx,
                                            const TrainPreparer& prepare_train, const TestTransform& prepare_test)
{
    notify_phase(ctx, Phase::Preparation);
    const auto genes = common_genes(datasets);
    const auto n = datasets.size();
    const int jobs = outer_jobs(spec, ctx);
    const auto inner = inner_spec(spec, jobs > 1 && n > 1);

    std::vector<ExperimentResult> out(n);
    auto run_one = [&](std::size_t h) {
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < n; ++i) {
            if (i != h) {
                ids.push_back(datasets[i].id);
            }
        }
        const auto train_id = "merged:" + join_ids(ids);
        if (ctx.observer) {
            ctx.observer->on_pair(train_id, datasets[h].id);
        }
        if (genes.empty()) {
            out[h] = unavailable(spec, source, train_id, datasets[h].id, "EmptyIntersection: cohorts share no genes");
            return;
        }
        try {
            std::vector<ExpressionDataset> parts;
            for (std::size_t i = 0; i < n; ++i) {
                if (i == h) {
                    continue;
                }
                auto prepared = prepare_train ? prepare_train(datasets[i].data) : std::optional<ExpressionDataset>(datasets[i].data);
                if (prepared && prepared->n_samples() > 0) {
                    parts.push_back(restrict_genes(*prepared, genes));
                }
            }
            if (parts.empty()) {
                out[h] = unavailable(spec, source, train_id, datasets[h].id, "EmptyDataset: no training samples remain");
                return;
            }
            NamedDataset train{train_id, merge_datasets(parts)};
            auto pipeline = train_pipeline(train, source, inner, ctx);
            out[h] = evaluate_pipeline(pipeline, datasets[h], source, spec, ctx, prepare_test);
        } catch (const Error& e) {
            out[h] = unavailable(spec, source, train_id, datasets[h].id, reason_of(e));
        }
    };
    parallel_for(n, jobs, run_one);
    return out;
}

}

std::vector<ExperimentResult> run_merged_setting(std::span<const NamedDataset> datasets, const SecondarySource& source,
                                                 const ExperimentSpec& spec, const ProtocolContext& ctx)
{
    auto out = leave_one_out(datasets, source, spec, ctx, {}, {});
    stamp_setting(out, SettingKind::Merged);
    return out;
}

std::vector<ExperimentResult> run_er_setting(std::span<const NamedDataset> datasets, const SecondarySource& source,
                                             const ExperimentSpec& spec, const ProtocolContext& ctx)
{
    const double threshold = spec.er_threshold;
    auto filter = [threshold](const ExpressionDataset& ds) { return er_stratify(ds, threshold); };
    auto train_filter = [threshold](const ExpressionDataset& ds) -> std::optional<ExpressionDataset> {
        return er_stratify(ds, threshold);
    };
    auto out = leave_one_out(datasets, source, spec, ctx, train_filter, filter);
    stamp_setting(out, SettingKind::ErPositive);
    return out;
}

stats::TestResult compare_real_to_randomized(std::span<const ExperimentResult> real, std::span<const ExperimentResult> randomized) {
    if (real.size() != randomized.size()) {
        throw Error(ErrorCode::Misaligned, "real and randomized result lists differ in length");
    }
    std::vector<double> diffs;
    for (std::size_t i = 0; i < real.size(); ++i) {
        if (real[i].train != randomized[i].train || real[i].test != randomized[i].test) {
            throw Error(ErrorCode::Misaligned, "real and randomized results are not aligned by pair");
        }
        if (real[i].status == ResultStatus::Ok && randomized[i].status == ResultStatus::Ok) {
            diffs.push_back(real[i].auc - randomized[i].auc);
        }
    }
    try {
        return stats::wilcoxon_signed_rank(diffs, stats::Sidedness::Greater);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::AllZeros) {
            throw;
        }
        stats::TestResult none;
        none.p_value = 1.0;
        none.sidedness = stats::Sidedness::Greater;
        none.n = 0;
        return none;
    }
}

RandomizedOutcome run_randomized(std::span<const NamedDataset> datasets, const SecondarySource& source,
                                 const ExperimentSpec& spec, const ProtocolContext& ctx)
{
    if (source.empty()) {
        throw Error(ErrorCode::InvalidSpec, "randomization requires a secondary source");
    }
    RandomizedOutcome out;
    out.real = run_paired_setting(datasets, source, spec, ctx);
    for (auto& r : out.real) {
        r.setting = to_string(SettingKind::Randomized);
    }

    const auto measured = common_genes(datasets);
    out.instances.resize(spec.randomized_instances);
    out.seeds.resize(spec.randomized_instances);
    for (std::size_t i = 0; i < spec.randomized_instances; ++i) {
        const auto seed = spec.base_seed + i;
        out.seeds[i] = seed;
        const auto random_source = source.randomized(seed, spec.randomize_scope, measured, spec.randomize_per_set);
        auto results = run_paired_setting(datasets, random_source, spec, ctx);
        for (auto& r : results) {
            r.setting = to_string(SettingKind::Randomized);
            r.instance = static_cast<int>(i);
            r.source_seed = seed;
        }
        out.tests.push_back(compare_real_to_randomized(out.real, results));
        out.instances[i] = std::move(results);
    }
    std::vector<double> p;
    for (const auto& t : out.tests) {
        p.push_back(t.p_value);
    }
    out.adjusted_p = stats::bonferroni(p);
    return out;
}

}
