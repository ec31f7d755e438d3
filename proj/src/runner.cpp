#include "netclass/runner.hpp"
#include "netclass/analysis.hpp"
#include "netclass/digest.hpp"
#include "netclass/error.hpp"
#include "netclass/rng.hpp"
#include "netclass/synthetic.hpp"
#include "keyvalue.hpp"
#include "text.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace netclass {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

void require_file(const fs::path& path) {
    if (!fs::is_regular_file(path)) {
        throw Error(ErrorCode::MissingInput, "input file not found: " + path.string());
    }
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
    return out;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

}

RunConfig parse_run_config(const fs::path& path) {
    const auto entries = kv::read(path);
    const auto base = path.parent_path();
    RunConfig config;
    bool versioned = false;
    std::vector<std::pair<kv::Entry, std::vector<std::string>>> method_entries;

    for (const auto& e : entries) {
        auto& spec = config.base;
        if (e.key == "version") {
            if (kv::as_uint(e) != static_cast<std::uint64_t>(run_spec_version)) {
                throw kv::bad(e, "unsupported spec version");
            }
            versioned = true;
        } else if (e.key == "dataset") {
            auto parts = kv::as_list(e);
            if (parts.size() != 3) {
                throw kv::bad(e, "expected: id expression.tsv labels.tsv");
            }
            config.datasets.push_back({parts[0], resolve(base, parts[1]), resolve(base, parts[2])});
        } else if (e.key == "network" || e.key == "genesets") {
            auto parts = kv::as_list(e);
            if (parts.size() != 2) {
                throw kv::bad(e, "expected: id path");
            }
            config.sources.push_back({parts[0], resolve(base, parts[1]), e.key == "network"});
        } else if (e.key == "methods") {
            method_entries.emplace_back(e, kv::as_list(e));
        } else if (e.key == "classifiers") {
            config.classifiers.clear();
            for (const auto& c : kv::as_list(e)) {
                config.classifiers.push_back(classifier_from_string(c));
            }
        } else if (e.key == "settings") {
            config.settings.clear();
            for (const auto& s : kv::as_list(e)) {
                config.settings.push_back(setting_from_string(s));
            }
        } else if (e.key == "policies") {
            config.policies.clear();
            for (const auto& p : kv::as_list(e)) {
                if (p == "cv") {
                    config.policies.push_back(0);
                } else {
                    kv::Entry single{e.key, p, e.line};
                    auto k = kv::as_uint(single);
                    if (k == 0) {
                        throw kv::bad(e, "fixed feature counts must be positive");
                    }
                    config.policies.push_back(k);
                }
            }
        } else if (e.key == "normalize") {
            config.normalize = kv::as_bool(e);
        } else if (e.key == "seed") {
            spec.base_seed = kv::as_uint(e);
        } else if (e.key == "instances") {
            spec.randomized_instances = kv::as_uint(e);
        } else if (e.key == "inner_folds") {
            spec.inner_folds = kv::as_uint(e);
            if (spec.inner_folds < 2) {
                throw kv::bad(e, "at least 2 folds are required");
            }
        } else if (e.key == "er_threshold") {
            spec.er_threshold = kv::as_double(e);
        } else if (e.key == "randomize_scope") {
            if (e.value == "own") {
                spec.randomize_scope = PermutationScope::Own;
            } else if (e.value == "universe") {
                spec.randomize_scope = PermutationScope::Universe;
            } else {
                throw kv::bad(e, "expected own or universe");
            }
        } else if (e.key == "randomize_per_set") {
            spec.randomize_per_set = kv::as_bool(e);
        } else if (e.key == "sg_cap") {
            spec.params.sg_cap = kv::as_uint(e);
        } else if (e.key == "lee_cap") {
            spec.params.lee_cap = kv::as_uint(e);
        } else if (e.key == "chuang_max_size") {
            spec.params.chuang.max_size = kv::as_uint(e);
        } else if (e.key == "chuang_max_depth") {
            spec.params.chuang.max_depth = kv::as_uint(e);
        } else if (e.key == "chuang_permutations") {
            spec.params.chuang.permutations = kv::as_uint(e);
        } else if (e.key == "chuang_alpha") {
            spec.params.chuang.alpha = kv::as_double(e);
        } else if (e.key == "chuang_cap") {
            spec.params.chuang.cap = kv::as_uint(e);
        } else if (e.key == "chuang_tests") {
            spec.params.chuang.apply_tests = kv::as_bool(e);
        } else if (e.key == "taylor_hub_fraction") {
            spec.params.taylor.hub_fraction = kv::as_double(e);
        } else if (e.key == "taylor_permutations") {
            spec.params.taylor.permutations = kv::as_uint(e);
        } else if (e.key == "taylor_alpha") {
            spec.params.taylor.alpha = kv::as_double(e);
        } else if (e.key == "logreg_tolerance") {
            spec.logreg.tolerance = kv::as_double(e);
        } else if (e.key == "logreg_max_iterations") {
            spec.logreg.max_iterations = kv::as_uint(e);
        } else {
            throw kv::bad(e, "unknown key");
        }
    }
    if (!versioned) {
        throw Error(ErrorCode::InvalidSpec, path.string() + ": missing 'version = 1'");
    }
    if (config.datasets.size() < 2) {
        throw Error(ErrorCode::InvalidSpec, path.string() + ": at least two datasets are required");
    }
    for (std::size_t i = 0; i < config.datasets.size(); ++i) {
        for (std::size_t j = i + 1; j < config.datasets.size(); ++j) {
            if (config.datasets[i].id == config.datasets[j].id) {
                throw Error(ErrorCode::InvalidSpec, "duplicate dataset id '" + config.datasets[i].id + "'");
            }
        }
    }

    auto find_source = [&](const std::string& id) -> const SourceEntry* {
        for (const auto& s : config.sources) {
            if (s.id == id) {
                return &s;
            }
        }
        return nullptr;
    };
    for (const auto& [e, items] : method_entries) {
        for (const auto& item : items) {
            MethodEntry m;
            auto colon = item.find(':');
            m.method = method_from_string(item.substr(0, colon));
            if (colon != std::string::npos) {
                m.source = item.substr(colon + 1);
            }
            const SourceEntry* src = m.source.empty() ? nullptr : find_source(m.source);
            if (!m.source.empty() && !src) {
                throw kv::bad(e, "unknown secondary source '" + m.source + "'");
            }
            switch (m.method) {
                case MethodKind::SingleGene:
                    if (src) {
                        throw kv::bad(e, "sg takes no secondary source");
                    }
                    break;
                case MethodKind::SingleGeneRestricted:
                    if (!src) {
                        throw kv::bad(e, "sg_restricted needs a secondary source");
                    }
                    break;
                case MethodKind::Lee:
                    if (!src || src->is_network) {
                        throw kv::bad(e, "lee needs a gene-set collection");
                    }
                    break;
                case MethodKind::Chuang:
                case MethodKind::Taylor:
                    if (!src || !src->is_network) {
                        throw kv::bad(e, std::string(to_string(m.method)) + " needs an interaction network");
                    }
                    break;
            }
            config.methods.push_back(m);
        }
    }
    if (config.methods.empty()) {
        config.methods.push_back(MethodEntry{});
    }
    return config;
}

std::string Cell::label() const {
    std::string out(to_string(method.method));
    if (!method.source.empty()) {
        out += ":" + method.source;
    }
    out += "/" + std::string(to_string(classifier)) + "/" + std::string(to_string(setting)) + "/";
    out += policy == 0 ? "cv" : "k" + std::to_string(policy);
    return out;
}

std::vector<Cell> expand_cells(const RunConfig& config) {
    std::vector<Cell> out;
    for (const auto& m : config.methods) {
        for (auto c : config.classifiers) {
            for (auto s : config.settings) {
                for (auto p : config.policies) {
                    out.push_back(Cell{m, c, s, p});
                }
            }
        }
    }
    return out;
}

FileCache::FileCache(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
}

std::optional<std::vector<RankedFeature>> FileCache::load(const std::string& key) {
    const auto path = dir_ / (key + ".jsonl");
    std::lock_guard<std::mutex> guard(lock_);
    std::ifstream in(path);
    if (!in) {
        ++misses_;
        return std::nullopt;
    }
    std::string header;
    std::getline(in, header);
    std::stringstream body;
    body << in.rdbuf();
    const auto text = body.str();
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(header);
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::CacheMismatch, "corrupt cache header in " + path.string());
    }
    if (h.value("key", "") != key || h.value("digest", "") != sha256_hex(text)) {
        throw Error(ErrorCode::CacheMismatch, "cache entry does not match its digest: " + path.string());
    }
    std::istringstream parse(text);
    ++hits_;
    return read_features_jsonl(parse);
}

void FileCache::store(const std::string& key, const std::vector<RankedFeature>& features) {
    std::ostringstream body;
    write_features_jsonl(body, features);
    const auto text = body.str();
    nlohmann::json h{{"key", key}, {"digest", sha256_hex(text)}};

    std::lock_guard<std::mutex> guard(lock_);
    const auto path = dir_ / (key + ".jsonl");
    const auto tmp = dir_ / (key + ".tmp");
    {
        auto out = open_out(tmp);
        out << h.dump() << '\n' << text;
    }
    fs::rename(tmp, path);
}

namespace {

std::vector<NamedDataset> load_datasets(const RunConfig& config, nlohmann::json& inputs) {
    std::vector<NamedDataset> out;
    for (const auto& d : config.datasets) {
        require_file(d.expression);
        require_file(d.labels);
        inputs[d.expression.string()] = file_digest(d.expression);
        inputs[d.labels.string()] = file_digest(d.labels);
        auto ds = load_expression(d.expression, d.labels);
        out.push_back({d.id, config.normalize ? z_normalize(ds) : std::move(ds)});
    }
    return out;
}

std::map<std::string, SecondarySource> load_sources(const RunConfig& config, nlohmann::json& inputs) {
    std::map<std::string, SecondarySource> out;
    for (const auto& s : config.sources) {
        require_file(s.path);
        inputs[s.path.string()] = file_digest(s.path);
        SecondarySource src;
        src.id = s.id;
        if (s.is_network) {
            src.data = load_network(s.path, s.id);
        } else {
            src.data = load_genesets(s.path, s.id);
        }
        out.emplace(s.id, std::move(src));
    }
    return out;
}

bool is_composite(const std::string& method) {
    return method == "lee" || method == "chuang" || method == "taylor";
}

// Signature genes per training dataset in the paired setting, against size-matched single-gene controls.
std::vector<StabilityRecord> stability_records(std::span<const ExperimentResult> results, std::span<const NamedDataset> datasets,
                                               const std::map<std::string, SecondarySource>& sources)
{
    std::map<std::string, std::map<std::string, const ExperimentResult*>> by_combo;
    for (const auto& r : results) {
        if (r.instance >= 0 || r.setting != "paired" || r.status != ResultStatus::Ok || !is_composite(r.method)) {
            continue;
        }
        by_combo[combination_label(r)].emplace(r.train, &r);
    }
    const auto genes = common_genes(datasets);
    std::vector<StabilityRecord> out;
    for (const auto& [label, per_train] : by_combo) {
        const auto* head = per_train.begin()->second;
        const auto universe = sources.at(head->source).universe();
        std::vector<std::string> ids;
        std::vector<std::set<GeneId>> composite;
        std::vector<std::set<GeneId>> control;
        for (const auto& d : datasets) {
            auto it = per_train.find(d.id);
            if (it == per_train.end()) {
                continue;
            }
            auto sig = signature_genes(it->second->selected, it->second->selected.size());
            try {
                auto ctrl = size_matched_control(sig.size(), d.data.subset_genes(genes), universe);
                control.emplace_back(ctrl.begin(), ctrl.end());
            } catch (const Error& e) {
                if (e.code() != ErrorCode::UniverseTooSmall) {
                    throw;
                }
                continue;
            }
            ids.push_back(d.id);
            composite.push_back(std::move(sig));
        }
        if (ids.size() < 2) {
            continue;
        }
        StabilityRecord rec;
        rec.combination = label;
        rec.composite = pairwise_jaccard(ids, composite);
        rec.control = pairwise_jaccard(ids, control);
        out.push_back(std::move(rec));
    }
    return out;
}

void write_traces(std::span<const ExperimentResult> results, const fs::path& path) {
    auto out = open_out(path);
    out << "combination,setting,instance,train,n_features,mean_auc\n";
    std::set<std::tuple<std::string, std::string, int, std::string>> seen;
    for (const auto& r : results) {
        // Every test shares the curve of its training pipeline.
        if (!seen.emplace(combination_label(r), r.setting, r.instance, r.train).second) {
            continue;
        }
        for (std::size_t n = 0; n < r.cv_curve.size(); ++n) {
            const double v = r.cv_curve[n];
            out << combination_label(r) << ',' << r.setting << ',' << r.instance << ',' << r.train << ',' << (n + 1) << ','
                << (std::isnan(v) ? std::string("NA") : text::format_double(v)) << '\n';
        }
    }
}

}

RunSummary run_experiments(const RunOptions& options) {
    const auto started = utc_now();
    require_file(options.spec);
    auto config = parse_run_config(options.spec);
    if (options.seed_override) {
        config.base.base_seed = *options.seed_override;
    }
    config.base.jobs = std::max(1, options.jobs);

    nlohmann::json inputs = nlohmann::json::object();
    const auto datasets = load_datasets(config, inputs);
    const auto sources = load_sources(config, inputs);

    fs::create_directories(options.out);
    std::unique_ptr<FileCache> cache;
    fs::path cache_dir;
    if (options.use_cache) {
        const char* env = std::getenv("NETCLASS_CACHE_DIR");
        cache_dir = (env && *env) ? fs::path(env) : options.out / "cache";
        cache = std::make_unique<FileCache>(cache_dir);
    }
    ProtocolContext ctx;
    ctx.cache = cache.get();

    RunSummary summary;
    std::vector<ExperimentResult> all;
    nlohmann::json cells = nlohmann::json::array();
    nlohmann::json unavailable_cells = nlohmann::json::array();
    static const SecondarySource no_source{};

    for (const auto& cell : expand_cells(config)) {
        const auto label = cell.label();
        if (!options.only.empty() && label.find(options.only) == std::string::npos) {
            continue;
        }
        ++summary.cells;
        auto spec = config.base;
        spec.method = cell.method.method;
        spec.classifier = cell.classifier;
        spec.setting = cell.setting;
        spec.fixed_k = cell.policy;
        const auto& source = cell.method.source.empty() ? no_source : sources.at(cell.method.source);

        nlohmann::json entry{{"cell", label}};
        std::vector<ExperimentResult> results;
        std::string cell_reason;
        switch (cell.setting) {
            case SettingKind::Paired:
                results = run_paired_setting(datasets, source, spec, ctx);
                break;
            case SettingKind::Merged:
                results = run_merged_setting(datasets, source, spec, ctx);
                break;
            case SettingKind::ErPositive:
                results = run_er_setting(datasets, source, spec, ctx);
                break;
            case SettingKind::Randomized: {
                if (source.empty()) {
                    cell_reason = "randomization requires a secondary source";
                    break;
                }
                auto outcome = run_randomized(datasets, source, spec, ctx);
                results = std::move(outcome.real);
                nlohmann::json tests = nlohmann::json::array();
                for (std::size_t i = 0; i < outcome.instances.size(); ++i) {
                    results.insert(results.end(), outcome.instances[i].begin(), outcome.instances[i].end());
                    tests.push_back({{"instance", i}, {"seed", outcome.seeds[i]}, {"n", outcome.tests[i].n},
                                     {"statistic", outcome.tests[i].statistic}, {"p_value", outcome.tests[i].p_value},
                                     {"adjusted_p", outcome.adjusted_p[i]}});
                }
                entry["instance_seeds"] = outcome.seeds;
                entry["randomization_tests"] = tests;
                break;
            }
        }

        std::size_t ok = 0;
        nlohmann::json missing = nlohmann::json::array();
        for (const auto& r : results) {
            if (r.status == ResultStatus::Ok) {
                ++ok;
            } else {
                missing.push_back({{"train", r.train}, {"test", r.test}, {"instance", r.instance},
                                   {"status", to_string(r.status)}, {"reason", r.reason}});
            }
        }
        entry["results"] = results.size();
        entry["ok"] = ok;
        entry["not_ok"] = missing;
        if (!cell_reason.empty() || ok == 0) {
            entry["status"] = "unavailable";
            if (!cell_reason.empty()) {
                entry["reason"] = cell_reason;
            }
            unavailable_cells.push_back(label);
            ++summary.unavailable_cells;
        } else {
            entry["status"] = "completed";
        }
        cells.push_back(entry);
        all.insert(all.end(), std::make_move_iterator(results.begin()), std::make_move_iterator(results.end()));
    }
    summary.results = all.size();

    {
        auto out = open_out(options.out / "results.jsonl");
        for (const auto& r : all) {
            out << to_json(r).dump() << '\n';
        }
    }
    write_traces(all, options.out / "traces.csv");
    const auto stab = stability_records(all, datasets, sources);
    {
        auto out = open_out(options.out / "stability.jsonl");
        for (const auto& s : stab) {
            out << to_json(s).dump() << '\n';
        }
    }
    if (!all.empty()) {
        write_report(all, stab, options.out / "report");
    }

    if (cache) {
        summary.cache_hits = cache->hits();
        summary.cache_misses = cache->misses();
    }

    nlohmann::json manifest;
    manifest["tool_version"] = tool_version;
    manifest["results_schema"] = results_schema_version;
    manifest["spec"] = options.spec.string();
    manifest["spec_digest"] = file_digest(options.spec);
    manifest["inputs"] = inputs;
    manifest["base_seed"] = config.base.base_seed;
    manifest["jobs"] = config.base.jobs;
    manifest["only"] = options.only;
    manifest["cells"] = cells;
    manifest["unavailable_cells"] = unavailable_cells;
    manifest["cache"] = {{"enabled", options.use_cache}, {"dir", cache_dir.string()},
                         {"hits", summary.cache_hits}, {"misses", summary.cache_misses}};
    manifest["outputs"] = {"results.jsonl", "traces.csv", "stability.jsonl", "report/fig1a.csv", "report/fig1b.csv",
                           "report/tests.csv", "report/summary.json", "report/fig6.csv", "report/fig7.csv"};
    manifest["started_at"] = started;
    manifest["finished_at"] = utc_now();
    auto out = open_out(options.out / "manifest.json");
    out << manifest.dump(2) << '\n';
    return summary;
}

void synthesize(const fs::path& spec_path, const fs::path& out_dir) {
    require_file(spec_path);
    const auto file = parse_synthetic_spec(spec_path);
    fs::create_directories(out_dir);

    nlohmann::json truth;
    truth["seed"] = file.cohort.seed;
    truth["effect_size"] = file.cohort.effect_size;
    nlohmann::json cohorts = nlohmann::json::array();
    std::vector<std::vector<GeneId>> modules;
    std::vector<GeneId> genes;
    for (std::size_t c = 0; c < file.cohorts; ++c) {
        auto spec = file.cohort;
        spec.seed = derive_seed(file.cohort.seed, c);
        spec.sample_prefix = "c" + std::to_string(c + 1) + "_s";
        spec.name = "cohort" + std::to_string(c + 1);
        auto cohort = generate_synthetic(spec);
        const auto stem = "cohort" + std::to_string(c + 1);
        write_expression(cohort.dataset, out_dir / (stem + "_expression.tsv"));
        write_labels(cohort.dataset, out_dir / (stem + "_labels.tsv"));
        cohorts.push_back({{"id", stem}, {"seed", spec.seed}, {"samples", cohort.dataset.n_samples()},
                           {"poor", cohort.dataset.class_count(1)}});
        modules = cohort.modules;
        genes = cohort.dataset.genes();
    }
    truth["cohorts"] = cohorts;
    truth["modules"] = modules;

    if (file.network_nodes > 0) {
        SyntheticNetworkSpec net;
        std::set<GeneId> nodes;
        for (std::size_t i = 0; i < std::min(file.network_nodes, file.cohort.n_genes); ++i) {
            nodes.insert(synthetic_gene_id(i));
        }
        for (const auto& m : modules) {
            nodes.insert(m.begin(), m.end());
        }
        net.nodes.assign(nodes.begin(), nodes.end());
        net.mean_degree = file.network_mean_degree;
        net.modules = modules;
        net.seed = derive_seed(file.cohort.seed, "network");
        net.name = "network";
        write_network(generate_network(net), out_dir / "network.tsv");
        truth["network"] = "network.tsv";
    }
    if (file.geneset_count > 0) {
        GeneSetCollection sets("genesets");
        std::size_t made = 0;
        for (std::size_t m = 0; m < modules.size() && made < file.geneset_count; ++m, ++made) {
            sets.add("module" + std::to_string(m + 1), modules[m]);
        }
        Rng rng(derive_seed(file.cohort.seed, "genesets"));
        std::vector<GeneId> pool;
        for (std::size_t i = 0; i < file.cohort.n_genes; ++i) {
            pool.push_back(synthetic_gene_id(i));
        }
        for (; made < file.geneset_count; ++made) {
            std::shuffle(pool.begin(), pool.end(), rng);
            sets.add("random" + std::to_string(made + 1),
                     std::vector<GeneId>(pool.begin(), pool.begin() + std::min(file.geneset_size, pool.size())));
        }
        write_genesets(sets, out_dir / "genesets.gmt");
        truth["genesets"] = "genesets.gmt";
    }
    auto out = open_out(out_dir / "truth.json");
    out << truth.dump(2) << '\n';
}

std::vector<ExperimentResult> read_results(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::MissingInput, "cannot open " + path.string());
    }
    std::vector<ExperimentResult> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) {
            continue;
        }
        try {
            auto j = nlohmann::json::parse(line);
            if (j.value("schema", 0) != results_schema_version) {
                throw Error(ErrorCode::InvalidSpec, "unsupported results schema");
            }
            out.push_back(result_from_json(j));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::InvalidSpec, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void report(const fs::path& results_dir, const fs::path& out_dir) {
    const auto results_path = results_dir / "results.jsonl";
    if (!fs::is_regular_file(results_path)) {
        throw Error(ErrorCode::MissingInput, "no results.jsonl in " + results_dir.string());
    }
    const auto results = read_results(results_path);
    if (results.empty()) {
        throw Error(ErrorCode::MissingInput, results_path.string() + " holds no results");
    }
    std::vector<StabilityRecord> stab;
    std::ifstream in(results_dir / "stability.jsonl");
    std::string line;
    while (in && std::getline(in, line)) {
        if (!text::trim(line).empty()) {
            stab.push_back(stability_from_json(nlohmann::json::parse(line)));
        }
    }
    write_report(results, stab, out_dir);
}

}
