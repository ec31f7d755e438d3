#include "netclass/dataset.hpp"
#include "netclass/digest.hpp"
#include "netclass/error.hpp"
#include "netclass/rng.hpp"
#include "text.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_set>

namespace netclass {

ExpressionDataset::ExpressionDataset(std::vector<GeneId> genes,
                                     std::vector<SampleId> samples,
                                     std::vector<double> values,
                                     std::vector<Label> labels,
                                     Provenance provenance)
    : genes_(std::move(genes)),
      samples_(std::move(samples)),
      values_(std::move(values)),
      labels_(std::move(labels)),
      provenance_(std::move(provenance))
{
    if (values_.size() != genes_.size() * samples_.size()) {
        throw Error(ErrorCode::DimensionMismatch, "value matrix does not match genes x samples");
    }
    if (labels_.size() != samples_.size()) {
        throw Error(ErrorCode::MissingLabel, "label count does not match sample count");
    }
    for (auto l : labels_) {
        if (l > 1) {
            throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
        }
    }

    gene_lookup_.reserve(genes_.size());
    for (std::size_t j = 0; j < genes_.size(); ++j) {
        if (!gene_lookup_.emplace(genes_[j], j).second) {
            throw Error(ErrorCode::DuplicateGeneId, genes_[j]);
        }
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& s : samples_) {
        if (!seen.insert(s).second) {
            throw Error(ErrorCode::DuplicateSampleId, s);
        }
    }
}

std::optional<std::size_t> ExpressionDataset::gene_index(std::string_view gene) const {
    auto it = gene_lookup_.find(GeneId(gene));
    if (it == gene_lookup_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void ExpressionDataset::report(std::string_view what) const {
    if (monitor_) {
        monitor_->on_read(what);
    }
}

std::span<const double> ExpressionDataset::gene_values(std::size_t gene) const {
    report("values");
    const auto n = samples_.size();
    return std::span<const double>(values_.data() + gene * n, n);
}

std::span<const Label> ExpressionDataset::labels() const {
    report("labels");
    return labels_;
}

std::size_t ExpressionDataset::class_count(Label label) const {
    report("labels");
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

ExpressionDataset ExpressionDataset::subset_samples(std::span<const std::size_t> indices) const {
    report("values");
    report("labels");
    const auto n = samples_.size();
    std::vector<SampleId> samples;
    std::vector<Label> labels;
    samples.reserve(indices.size());
    labels.reserve(indices.size());
    for (auto i : indices) {
        if (i >= n) {
            throw Error(ErrorCode::InvalidArgument, "sample index out of range");
        }
        samples.push_back(samples_[i]);
        labels.push_back(labels_[i]);
    }

    std::vector<double> values(genes_.size() * indices.size());
    for (std::size_t j = 0; j < genes_.size(); ++j) {
        const double* src = values_.data() + j * n;
        double* dest = values.data() + j * indices.size();
        for (std::size_t k = 0; k < indices.size(); ++k) {
            dest[k] = src[indices[k]];
        }
    }

    ExpressionDataset out(genes_, std::move(samples), std::move(values), std::move(labels), provenance_);
    out.dropped_constant_ = dropped_constant_;
    out.monitor_ = monitor_;
    return out;
}

ExpressionDataset ExpressionDataset::subset_genes(std::span<const GeneId> genes) const {
    report("values");
    const auto n = samples_.size();
    std::vector<double> values;
    values.reserve(genes.size() * n);
    for (const auto& g : genes) {
        auto idx = gene_index(g);
        if (!idx) {
            throw Error(ErrorCode::GeneAbsent, g);
        }
        auto col = values_.begin() + static_cast<std::ptrdiff_t>(*idx * n);
        values.insert(values.end(), col, col + static_cast<std::ptrdiff_t>(n));
    }
    ExpressionDataset out(std::vector<GeneId>(genes.begin(), genes.end()), samples_, std::move(values), labels_, provenance_);
    out.dropped_constant_ = dropped_constant_;
    out.monitor_ = monitor_;
    return out;
}

ExpressionDataset ExpressionDataset::with_monitor(std::shared_ptr<ReadMonitor> monitor) const {
    ExpressionDataset out = *this;
    out.monitor_ = std::move(monitor);
    return out;
}

std::string ExpressionDataset::digest() const {
    report("values");
    report("labels");
    Hasher h;
    h.update_u64(genes_.size());
    for (const auto& g : genes_) {
        h.update(g);
    }
    h.update_u64(samples_.size());
    for (const auto& s : samples_) {
        h.update(s);
    }
    h.update(std::span<const double>(values_));
    h.update(std::string_view(reinterpret_cast<const char*>(labels_.data()), labels_.size()));
    return h.hex();
}

std::optional<Label> OutcomeRecord::label(double horizon_years) const {
    if (event && time_to_event < horizon_years) {
        return Label{1};
    }
    if (time_to_event >= horizon_years) {
        return Label{0};
    }
    return std::nullopt;
}

std::size_t collapse_probes(std::span<const std::vector<double>> rows) {
    std::size_t best = 0;
    double best_var = -1;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        double var = 0;
        if (row.size() > 1) {
            double mean = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(row.size());
            for (double v : row) {
                var += (v - mean) * (v - mean);
            }
            var /= static_cast<double>(row.size() - 1);
        }
        if (var > best_var) {
            best_var = var;
            best = r;
        }
    }
    return best;
}

namespace {

std::map<SampleId, OutcomeRecord> read_outcomes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::MissingInput, "cannot open " + path.string());
    }
    std::map<SampleId, OutcomeRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        text::strip_cr(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        auto fields = text::split(line, '\t');
        if (lineno == 1 && !fields.empty() && fields[0] == "sample_id") {
            continue;
        }
        if (fields.size() < 3) {
            throw Error(ErrorCode::MalformedHeader, path.string() + ":" + std::to_string(lineno) + ": expected sample_id, event, time_years");
        }
        auto event = text::parse_double(fields[1]);
        auto time = text::parse_double(fields[2]);
        if (!event || !time || (*event != 0 && *event != 1) || *time < 0) {
            throw Error(ErrorCode::NonNumericCell, path.string() + ":" + std::to_string(lineno));
        }
        OutcomeRecord rec;
        rec.event = *event == 1;
        rec.time_to_event = *time;
        if (!out.emplace(std::string(fields[0]), rec).second) {
            throw Error(ErrorCode::DuplicateSampleId, std::string(fields[0]));
        }
    }
    return out;
}

}

ExpressionDataset load_expression(const std::filesystem::path& expression_path,
                                  const std::filesystem::path& labels_path,
                                  LoadReport* report)
{
    std::ifstream in(expression_path);
    if (!in) {
        throw Error(ErrorCode::MissingInput, "cannot open " + expression_path.string());
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::EmptyDataset, expression_path.string());
    }
    text::strip_cr(line);
    auto header = text::split(line, '\t');
    if (header.size() < 2 || header[0] != "gene_id") {
        throw Error(ErrorCode::MalformedHeader, expression_path.string() + ": first row must be gene_id followed by sample IDs");
    }
    std::vector<SampleId> all_samples(header.begin() + 1, header.end());
    const auto ns = all_samples.size();

    std::vector<GeneId> order;
    std::map<GeneId, std::vector<std::vector<double>>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        text::strip_cr(line);
        if (line.empty()) {
            continue;
        }
        auto fields = text::split(line, '\t');
        if (fields.size() != ns + 1) {
            throw Error(ErrorCode::MalformedHeader, expression_path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(ns + 1) + " fields");
        }
        std::vector<double> row(ns);
        for (std::size_t i = 0; i < ns; ++i) {
            auto v = text::parse_double(fields[i + 1]);
            if (!v) {
                throw Error(ErrorCode::NonNumericCell, expression_path.string() + ":" + std::to_string(lineno) + ": '" + std::string(fields[i + 1]) + "'");
            }
            row[i] = *v;
        }
        GeneId gene(fields[0]);
        auto& bucket = rows[gene];
        if (bucket.empty()) {
            order.push_back(gene);
        }
        bucket.push_back(std::move(row));
    }
    if (order.empty()) {
        throw Error(ErrorCode::EmptyDataset, expression_path.string());
    }

    auto outcomes = read_outcomes(labels_path);
    std::vector<std::size_t> keep;
    std::vector<Label> labels;
    std::size_t censored = 0;
    for (std::size_t i = 0; i < ns; ++i) {
        auto it = outcomes.find(all_samples[i]);
        if (it == outcomes.end()) {
            throw Error(ErrorCode::MissingLabel, all_samples[i]);
        }
        auto lab = it->second.label();
        if (!lab) {
            ++censored;
            continue;
        }
        keep.push_back(i);
        labels.push_back(*lab);
    }
    if (keep.empty()) {
        throw Error(ErrorCode::EmptyDataset, "no labelled samples in " + expression_path.string());
    }

    std::size_t collapsed = 0;
    std::vector<double> values;
    values.reserve(order.size() * keep.size());
    for (const auto& gene : order) {
        const auto& bucket = rows[gene];
        collapsed += bucket.size() - 1;
        const auto& row = bucket[collapse_probes(bucket)];
        for (auto i : keep) {
            values.push_back(row[i]);
        }
    }

    std::vector<SampleId> samples;
    samples.reserve(keep.size());
    for (auto i : keep) {
        samples.push_back(all_samples[i]);
    }

    if (report) {
        report->collapsed_probes = collapsed;
        report->excluded_censored = censored;
    }
    Provenance prov;
    prov.sources.push_back(expression_path.stem().string());
    return ExpressionDataset(std::move(order), std::move(samples), std::move(values), std::move(labels), std::move(prov));
}

ExpressionDataset z_normalize(const ExpressionDataset& ds) {
    const auto n = ds.n_samples();
    if (n < 2) {
        throw Error(ErrorCode::TooFewSamples, "z-normalization needs at least 2 samples");
    }

    std::vector<GeneId> genes;
    std::vector<double> values;
    values.reserve(ds.n_genes() * n);
    std::vector<GeneId> dropped = ds.dropped_constant_;

    for (std::size_t j = 0; j < ds.n_genes(); ++j) {
        auto col = ds.gene_values(j);
        double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n);
        double ss = 0;
        for (double v : col) {
            ss += (v - mean) * (v - mean);
        }
        double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (!(sd > 0) || !std::isfinite(sd)) {
            dropped.push_back(ds.genes()[j]);
            continue;
        }
        genes.push_back(ds.genes()[j]);
        for (double v : col) {
            values.push_back((v - mean) / sd);
        }
    }

    Provenance prov = ds.provenance();
    prov.normalized = true;
    ExpressionDataset out(std::move(genes), ds.samples(), std::move(values),
                          std::vector<Label>(ds.labels().begin(), ds.labels().end()), std::move(prov));
    out.dropped_constant_ = std::move(dropped);
    out.monitor_ = ds.monitor_;
    return out;
}

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const Label> labels, std::size_t k, std::uint64_t seed) {
    if (k == 0) {
        throw Error(ErrorCode::InvalidArgument, "k must be positive");
    }
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        by_class[labels[i]].push_back(i);
    }
    for (const auto& members : by_class) {
        if (members.size() < k) {
            throw Error(ErrorCode::ClassTooSmall, "class with " + std::to_string(members.size()) + " samples cannot fill " + std::to_string(k) + " folds");
        }
    }

    Rng rng(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    // Continue dealing where the previous class stopped so fold sizes stay within one.
    std::size_t next = 0;
    for (auto& members : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
        for (auto i : members) {
            folds[next].push_back(i);
            next = (next + 1) % k;
        }
    }
    for (auto& f : folds) {
        std::sort(f.begin(), f.end());
    }
    return folds;
}

std::vector<std::vector<std::size_t>> stratified_kfold(const ExpressionDataset& ds, std::size_t k, std::uint64_t seed) {
    return stratified_kfold(ds.labels(), k, seed);
}

ExpressionDataset merge_datasets(std::span<const ExpressionDataset> datasets) {
    if (datasets.empty()) {
        throw Error(ErrorCode::EmptyDataset, "nothing to merge");
    }

    std::vector<GeneId> common;
    for (const auto& g : datasets[0].genes()) {
        bool everywhere = std::all_of(datasets.begin() + 1, datasets.end(), [&](const ExpressionDataset& d) { return d.has_gene(g); });
        if (everywhere) {
            common.push_back(g);
        }
    }
    if (common.empty()) {
        throw Error(ErrorCode::EmptyIntersection, "merged datasets share no genes");
    }

    std::vector<SampleId> samples;
    std::vector<Label> labels;
    std::unordered_set<SampleId> seen;
    Provenance prov;
    prov.normalized = true;
    std::vector<GeneId> dropped;
    for (const auto& d : datasets) {
        for (const auto& s : d.samples()) {
            if (!seen.insert(s).second) {
                throw Error(ErrorCode::DuplicateSampleId, s);
            }
            samples.push_back(s);
        }
        auto lab = d.labels();
        labels.insert(labels.end(), lab.begin(), lab.end());
        prov.sources.insert(prov.sources.end(), d.provenance().sources.begin(), d.provenance().sources.end());
        prov.normalized = prov.normalized && d.provenance().normalized;
        dropped.insert(dropped.end(), d.dropped_constant().begin(), d.dropped_constant().end());
    }

    std::vector<double> values;
    values.reserve(common.size() * samples.size());
    for (const auto& g : common) {
        for (const auto& d : datasets) {
            auto col = d.gene_values(*d.gene_index(g));
            values.insert(values.end(), col.begin(), col.end());
        }
    }

    std::sort(dropped.begin(), dropped.end());
    dropped.erase(std::unique(dropped.begin(), dropped.end()), dropped.end());

    ExpressionDataset out(std::move(common), std::move(samples), std::move(values), std::move(labels), std::move(prov));
    out.dropped_constant_ = std::move(dropped);
    for (const auto& d : datasets) {
        if (d.monitor_) {
            out.monitor_ = d.monitor_;
            break;
        }
    }
    return out;
}

ExpressionDataset er_stratify(const ExpressionDataset& ds, double threshold) {
    auto idx = ds.gene_index(esr1_gene);
    if (!idx) {
        throw Error(ErrorCode::GeneAbsent, std::string(esr1_gene));
    }
    auto col = ds.gene_values(*idx);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < col.size(); ++i) {
        if (col[i] > threshold) {
            keep.push_back(i);
        }
    }
    return ds.subset_samples(keep);
}

void write_expression(const ExpressionDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
    out << "gene_id";
    for (const auto& s : ds.samples()) {
        out << '\t' << s;
    }
    out << '\n';
    for (std::size_t j = 0; j < ds.n_genes(); ++j) {
        out << ds.genes()[j];
        for (double v : ds.gene_values(j)) {
            out << '\t' << text::format_double(v);
        }
        out << '\n';
    }
}

void write_labels(const ExpressionDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
    out << "sample_id\tevent\ttime_years\n";
    auto labels = ds.labels();
    for (std::size_t i = 0; i < ds.n_samples(); ++i) {
        out << ds.samples()[i] << '\t' << (labels[i] ? "1\t2.5" : "0\t10") << '\n';
    }
}

}
