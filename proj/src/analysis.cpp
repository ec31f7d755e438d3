#include "netclass/analysis.hpp"
#include "netclass/error.hpp"
#include "netclass/extractors.hpp"
#include "text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace netclass {

namespace {

using PairKey = std::pair<std::string, std::string>;

std::map<PairKey, const ExperimentResult*> index_by_pair(std::span<const ExperimentResult> results) {
    std::map<PairKey, const ExperimentResult*> out;
    for (const auto& r : results) {
        if (!out.emplace(PairKey{r.train, r.test}, &r).second) {
            throw Error(ErrorCode::Misaligned, "duplicate result for pair " + r.train + " -> " + r.test);
        }
    }
    return out;
}

// AUC pairs aligned by (train, test) where both sides have a value.
std::vector<std::pair<double, double>> aligned_aucs(std::span<const ExperimentResult> a, std::span<const ExperimentResult> b) {
    auto ia = index_by_pair(a);
    auto ib = index_by_pair(b);
    if (ia.size() != ib.size()) {
        throw Error(ErrorCode::Misaligned, "result sets cover different numbers of pairs");
    }
    std::vector<std::pair<double, double>> out;
    for (const auto& [key, ra] : ia) {
        auto it = ib.find(key);
        if (it == ib.end()) {
            throw Error(ErrorCode::Misaligned, "pair " + key.first + " -> " + key.second + " missing from one result set");
        }
        const auto* rb = it->second;
        if (ra->status == ResultStatus::Ok && rb->status == ResultStatus::Ok) {
            out.emplace_back(ra->auc, rb->auc);
        }
    }
    return out;
}

std::string fmt(double v) {
    return std::isnan(v) ? "NA" : text::format_double(v);
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
    return out;
}

nlohmann::json report_json(const StabilityReport& r) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [i, j] : r.pairs) {
        pairs.push_back({i, j});
    }
    return {{"datasets", r.datasets}, {"pairs", pairs}, {"jaccard", r.jaccard}};
}

StabilityReport report_from_json(const nlohmann::json& j) {
    StabilityReport r;
    r.datasets = j.at("datasets").get<std::vector<std::string>>();
    for (const auto& p : j.at("pairs")) {
        r.pairs.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>());
    }
    r.jaccard = j.at("jaccard").get<std::vector<double>>();
    return r;
}

}

WinLoss win_loss(std::span<const ExperimentResult> a, std::span<const ExperimentResult> b) {
    WinLoss out;
    for (const auto& [x, y] : aligned_aucs(a, b)) {
        if (x > y) {
            ++out.wins;
        } else if (x < y) {
            ++out.losses;
        } else {
            ++out.draws;
        }
    }
    double w = static_cast<double>(out.wins);
    double l = static_cast<double>(out.losses);
    if (out.wins == 0 && out.losses == 0) {
        out.log2_ratio = 0;
    } else {
        if (out.wins == 0 || out.losses == 0) {
            w += win_loss_pseudo_count;
            l += win_loss_pseudo_count;
            out.pseudo_count = true;
        }
        out.log2_ratio = std::log2(w) - std::log2(l);
    }
    return out;
}

WinLossMatrix win_loss_matrix(const std::vector<std::pair<std::string, std::vector<ExperimentResult>>>& groups) {
    WinLossMatrix m;
    for (const auto& g : groups) {
        m.labels.push_back(g.first);
    }
    m.cells.assign(groups.size(), std::vector<WinLoss>(groups.size()));
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = 0; j < groups.size(); ++j) {
            m.cells[i][j] = win_loss(groups[i].second, groups[j].second);
        }
    }
    return m;
}

stats::TestResult compare_methods(std::span<const ExperimentResult> a, std::span<const ExperimentResult> b,
                                  stats::Sidedness sidedness)
{
    std::vector<double> diffs;
    for (const auto& [x, y] : aligned_aucs(a, b)) {
        diffs.push_back(x - y);
    }
    return stats::wilcoxon_signed_rank(diffs, sidedness);
}

std::set<GeneId> signature_genes(std::span<const RankedFeature> features, std::size_t top_k) {
    auto genes = member_genes(features, top_k);
    return std::set<GeneId>(genes.begin(), genes.end());
}

StabilityReport pairwise_jaccard(const std::vector<std::string>& datasets, std::span<const std::set<GeneId>> gene_sets) {
    if (datasets.size() != gene_sets.size()) {
        throw Error(ErrorCode::DimensionMismatch, "one gene set per dataset is required");
    }
    StabilityReport out;
    out.datasets = datasets;
    for (std::size_t i = 0; i < gene_sets.size(); ++i) {
        for (std::size_t j = i + 1; j < gene_sets.size(); ++j) {
            out.pairs.emplace_back(i, j);
            out.jaccard.push_back(stats::jaccard(gene_sets[i], gene_sets[j]));
        }
    }
    return out;
}

StabilityReport stability(const std::vector<std::string>& datasets, std::span<const std::vector<RankedFeature>> features,
                          std::size_t top_k)
{
    std::vector<std::set<GeneId>> sets;
    for (const auto& f : features) {
        sets.push_back(signature_genes(f, top_k));
    }
    return pairwise_jaccard(datasets, sets);
}

std::vector<GeneId> size_matched_control(std::size_t m, const ExpressionDataset& train, const std::set<GeneId>& universe) {
    std::vector<RankedFeature> ranked;
    try {
        ranked = sg_rank_restricted(train, universe, 0);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyIntersection) {
            throw;
        }
    }
    if (ranked.size() < m) {
        throw Error(ErrorCode::UniverseTooSmall, "only " + std::to_string(ranked.size()) +
                    " annotated genes are available for a control of size " + std::to_string(m));
    }
    std::vector<GeneId> out;
    for (std::size_t i = 0; i < m; ++i) {
        out.push_back(ranked[i].key);
    }
    return out;
}

std::vector<Summary> summarize(const std::map<std::string, std::vector<double>>& groups) {
    std::vector<Summary> out;
    for (const auto& [name, values] : groups) {
        if (values.empty()) {
            continue;
        }
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        Summary s;
        s.group = name;
        s.n = sorted.size();
        s.median = stats::quantile_sorted(sorted, 0.5);
        s.q1 = stats::quantile_sorted(sorted, 0.25);
        s.q3 = stats::quantile_sorted(sorted, 0.75);
        s.mean = stats::mean(sorted);
        s.sd = sorted.size() > 1 ? stats::sample_sd(sorted) : 0.0;
        s.min = sorted.front();
        s.max = sorted.back();
        const double iqr = s.q3 - s.q1;
        for (double v : sorted) {
            if (v < s.q1 - 1.5 * iqr || v > s.q3 + 1.5 * iqr) {
                s.outliers.push_back(v);
            }
        }
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(), [](const Summary& a, const Summary& b) {
        if (a.median != b.median) {
            return a.median > b.median;
        }
        return a.group < b.group;
    });
    return out;
}

std::string combination_label(const ExperimentResult& r) {
    return r.method + "/" + r.source + "/" + r.classifier + "/" + r.policy;
}

nlohmann::json to_json(const StabilityRecord& record) {
    return {{"combination", record.combination},
            {"top_k", record.top_k},
            {"composite", report_json(record.composite)},
            {"control", report_json(record.control)}};
}

StabilityRecord stability_from_json(const nlohmann::json& j) {
    StabilityRecord r;
    r.combination = j.at("combination").get<std::string>();
    r.top_k = j.at("top_k").get<std::size_t>();
    r.composite = report_from_json(j.at("composite"));
    r.control = report_from_json(j.at("control"));
    return r;
}

void write_report(std::span<const ExperimentResult> results, std::span<const StabilityRecord> stability_records,
                  const std::filesystem::path& out_dir)
{
    if (results.empty()) {
        throw Error(ErrorCode::MissingInput, "no results to report");
    }
    std::filesystem::create_directories(out_dir);

    // setting -> combination -> results (real source only)
    std::map<std::string, std::map<std::string, std::vector<ExperimentResult>>> real;
    // combination -> instance -> results
    std::map<std::string, std::map<int, std::vector<ExperimentResult>>> randomized;
    nlohmann::json unavailable = nlohmann::json::array();
    std::size_t ok = 0;
    for (const auto& r : results) {
        if (r.instance < 0) {
            real[r.setting][combination_label(r)].push_back(r);
        } else {
            randomized[combination_label(r)][r.instance].push_back(r);
        }
        if (r.status == ResultStatus::Ok) {
            ++ok;
        } else {
            unavailable.push_back({{"combination", combination_label(r)}, {"setting", r.setting}, {"instance", r.instance},
                                   {"train", r.train}, {"test", r.test}, {"status", to_string(r.status)}, {"reason", r.reason}});
        }
    }

    auto aucs = [](const std::vector<ExperimentResult>& rs) {
        std::vector<double> v;
        for (const auto& r : rs) {
            if (r.status == ResultStatus::Ok) {
                v.push_back(r.auc);
            }
        }
        return v;
    };

    nlohmann::json summary;
    summary["schema"] = 1;
    summary["quantile_method"] = "linear interpolation between order statistics";
    summary["win_loss_pseudo_count"] = win_loss_pseudo_count;
    summary["results"] = results.size();
    summary["ok"] = ok;
    summary["unavailable"] = unavailable;

    {
        auto out = open_out(out_dir / "fig1a.csv");
        out << "setting,combination,n,median,q1,q3,mean,sd,min,max,outliers\n";
        nlohmann::json sections = nlohmann::json::object();
        auto emit = [&](const std::string& setting, const std::vector<Summary>& sums) {
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& s : sums) {
                std::string outliers;
                for (double v : s.outliers) {
                    outliers += (outliers.empty() ? "" : ";") + fmt(v);
                }
                out << setting << ',' << s.group << ',' << s.n << ',' << fmt(s.median) << ',' << fmt(s.q1) << ','
                    << fmt(s.q3) << ',' << fmt(s.mean) << ',' << fmt(s.sd) << ',' << fmt(s.min) << ',' << fmt(s.max)
                    << ',' << outliers << '\n';
                rows.push_back({{"combination", s.group}, {"n", s.n}, {"median", s.median}, {"q1", s.q1}, {"q3", s.q3},
                                {"mean", s.mean}, {"sd", s.sd}});
            }
            sections[setting] = rows;
        };
        for (const auto& [setting, combos] : real) {
            std::map<std::string, std::vector<double>> groups;
            for (const auto& [label, rs] : combos) {
                groups[label] = aucs(rs);
            }
            emit(setting, summarize(groups));
        }
        if (!randomized.empty()) {
            std::map<std::string, std::vector<double>> groups;
            for (const auto& [label, instances] : randomized) {
                for (const auto& [i, rs] : instances) {
                    auto v = aucs(rs);
                    groups[label].insert(groups[label].end(), v.begin(), v.end());
                }
            }
            emit("randomized_instances", summarize(groups));
        }
        summary["fig1a"] = sections;
    }

    {
        auto out = open_out(out_dir / "fig1b.csv");
        out << "setting,row,column,wins,losses,draws,log2_ratio,pseudo_count\n";
        nlohmann::json sections = nlohmann::json::object();
        for (const auto& [setting, combos] : real) {
            std::vector<std::string> labels;
            for (const auto& [label, rs] : combos) {
                labels.push_back(label);
            }
            nlohmann::json matrix = nlohmann::json::array();
            for (const auto& a : labels) {
                nlohmann::json row = nlohmann::json::array();
                for (const auto& b : labels) {
                    try {
                        auto wl = win_loss(combos.at(a), combos.at(b));
                        out << setting << ',' << a << ',' << b << ',' << wl.wins << ',' << wl.losses << ',' << wl.draws
                            << ',' << fmt(wl.log2_ratio) << ',' << (wl.pseudo_count ? 1 : 0) << '\n';
                        row.push_back(wl.log2_ratio);
                    } catch (const Error& e) {
                        if (e.code() != ErrorCode::Misaligned) {
                            throw;
                        }
                        out << setting << ',' << a << ',' << b << ",NA,NA,NA,NA,0\n";
                        row.push_back(nullptr);
                    }
                }
                matrix.push_back(row);
            }
            sections[setting] = {{"labels", labels}, {"log2_ratio", matrix}};
        }
        summary["fig1b"] = sections;
    }

    {
        auto out = open_out(out_dir / "tests.csv");
        out << "family,setting,a,b,instance,n,statistic,p_value,adjusted_p,note\n";
        auto write_family = [&](const std::string& family, const std::string& setting,
                                const std::vector<std::tuple<std::string, std::string, int, std::optional<stats::TestResult>>>& rows) {
            std::vector<double> p;
            for (const auto& row : rows) {
                p.push_back(std::get<3>(row) ? std::get<3>(row)->p_value : 1.0);
            }
            auto adjusted = stats::bonferroni(p);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const auto& [a, b, instance, test] = rows[i];
                out << family << ',' << setting << ',' << a << ',' << b << ',' << instance << ',';
                if (test) {
                    out << test->n << ',' << fmt(test->statistic) << ',' << fmt(test->p_value) << ',' << fmt(adjusted[i]) << ",\n";
                } else {
                    out << "0,NA,1,1,no evidence (all differences zero)\n";
                }
            }
        };
        for (const auto& [setting, combos] : real) {
            std::vector<std::tuple<std::string, std::string, int, std::optional<stats::TestResult>>> rows;
            for (const auto& [label, rs] : combos) {
                const auto& head = rs.front();
                if (head.method == "sg") {
                    continue;
                }
                const auto baseline = "sg/none/" + head.classifier + "/" + head.policy;
                auto it = combos.find(baseline);
                if (it == combos.end()) {
                    continue;
                }
                std::optional<stats::TestResult> test;
                try {
                    test = compare_methods(rs, it->second, stats::Sidedness::TwoSided);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::AllZeros && e.code() != ErrorCode::Misaligned) {
                        throw;
                    }
                }
                rows.emplace_back(label, baseline, -1, test);
            }
            if (!rows.empty()) {
                write_family("versus_single_gene", setting, rows);
            }
        }
        for (const auto& [label, instances] : randomized) {
            auto real_it = real.find("randomized");
            if (real_it == real.end() || !real_it->second.count(label)) {
                continue;
            }
            const auto& reference = real_it->second.at(label);
            std::vector<std::tuple<std::string, std::string, int, std::optional<stats::TestResult>>> rows;
            for (const auto& [i, rs] : instances) {
                std::optional<stats::TestResult> test = compare_real_to_randomized(reference, rs);
                if (test->n == 0) {
                    test.reset();
                }
                rows.emplace_back(label, "randomized", i, test);
            }
            write_family("real_greater_than_randomized", "randomized", rows);
        }
    }

    if (!stability_records.empty()) {
        auto fig6 = open_out(out_dir / "fig6.csv");
        auto fig7 = open_out(out_dir / "fig7.csv");
        fig6 << "combination,top_k,dataset_a,dataset_b,jaccard\n";
        fig7 << "combination,top_k,dataset_a,dataset_b,jaccard\n";
        nlohmann::json sections = nlohmann::json::array();
        for (const auto& rec : stability_records) {
            auto emit = [&](std::ofstream& out, const StabilityReport& rep) {
                for (std::size_t p = 0; p < rep.pairs.size(); ++p) {
                    out << rec.combination << ',' << rec.top_k << ',' << rep.datasets[rep.pairs[p].first] << ','
                        << rep.datasets[rep.pairs[p].second] << ',' << fmt(rep.jaccard[p]) << '\n';
                }
            };
            emit(fig6, rec.composite);
            emit(fig7, rec.control);
            sections.push_back({{"combination", rec.combination},
                                {"composite_mean", rec.composite.jaccard.empty() ? 0.0 : stats::mean(rec.composite.jaccard)},
                                {"control_mean", rec.control.jaccard.empty() ? 0.0 : stats::mean(rec.control.jaccard)}});
        }
        summary["stability"] = sections;
    }

    auto out = open_out(out_dir / "summary.json");
    out << summary.dump(2) << '\n';
}

}
