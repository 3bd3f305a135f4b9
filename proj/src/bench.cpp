#include "fewshot/bench.hpp"

#include "fewshot/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

namespace fewshot {

using json = nlohmann::json;

ConfidenceInterval mean_ci95(std::span<const double> values) {
    ConfidenceInterval ci;
    ci.n = values.size();
    if (values.empty()) return ci;
    double sum = 0.0;
    for (double v : values) sum += v;
    const double n = static_cast<double>(values.size());
    ci.mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - ci.mean) * (v - ci.mean);
    ci.half_width = 1.96 * std::sqrt(ss / n) / std::sqrt(n);
    return ci;
}

ConfidenceInterval paired_difference_ci95(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch("paired_difference_ci95: unequal lengths");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return mean_ci95(d);
}

bool separated(const ConfidenceInterval& a, const ConfidenceInterval& b) {
    return a.lower() > b.upper() || b.lower() > a.upper();
}

std::string_view to_string(HeadKind h) {
    switch (h) {
        case HeadKind::Simple: return "simple";
        case HeadKind::Transductive: return "transductive";
        case HeadKind::ClassificationOnlyTransductive: return "cot";
        case HeadKind::Gmm: return "gmm";
        case HeadKind::GmmEm: return "gmm-em";
    }
    return "unknown";
}

MethodSpec parse_method(std::string_view text) {
    const auto colon = text.find(':');
    const std::string_view head_name = text.substr(0, colon);
    MethodSpec m;
    bool found = false;
    for (auto h : {HeadKind::Simple, HeadKind::Transductive, HeadKind::ClassificationOnlyTransductive,
                   HeadKind::Gmm, HeadKind::GmmEm}) {
        if (to_string(h) == head_name) {
            m.head = h;
            found = true;
        }
    }
    if (!found) throw InvalidConfig("unknown method '" + std::string(text) + "'");
    if (colon != std::string_view::npos) {
        m.metric = parse_metric(text.substr(colon + 1));
        if (m.head == HeadKind::Gmm || m.head == HeadKind::GmmEm) {
            throw InvalidConfig("GMM heads take no metric suffix");
        }
    }
    m.name = std::string(head_name);
    if (m.metric != MetricKind::SquaredMahalanobis) m.name += ":" + std::string(to_string(m.metric));
    return m;
}

std::vector<MethodSpec> default_methods() {
    std::vector<MethodSpec> out;
    for (const char* name : {"simple", "transductive", "cot", "gmm", "gmm-em"}) {
        out.push_back(parse_method(name));
    }
    for (MetricKind metric : kAllMetrics) {
        if (metric == MetricKind::SquaredMahalanobis) continue;
        out.push_back(parse_method("simple:" + std::string(to_string(metric))));
    }
    return out;
}

namespace {

int argmax_row(const Matrix& m, Index row) {
    Index best = 0;
    for (Index k = 1; k < m.cols(); ++k) {
        if (m(row, k) > m(row, best)) best = k;
    }
    return static_cast<int>(best);
}

}  // namespace

std::vector<int> predict_task(const EpisodicTask& task, const MethodSpec& method,
                              const EvalSettings& settings) {
    std::vector<LabeledExample> support = task.support;
    std::vector<Vector> query = task.query_features();
    if (settings.adapt && !query.empty()) {
        const SetEncodings enc = pool_set_encodings(support, query);
        const bool transductive_encoding =
            method.head == HeadKind::Transductive || method.head == HeadKind::GmmEm;
        const Vector center = transductive_encoding
                                  ? Vector(0.5 * (enc.support_encoding + enc.query_encoding))
                                  : enc.support_encoding;
        for (auto& ex : support) ex.features -= center;
        for (auto& q : query) q -= center;
    }

    const int K = task.way;
    std::vector<int> out(query.size());
    const RefineConfig cfg{settings.min_steps, settings.max_steps, settings.beta, method.metric};
    switch (method.head) {
        case HeadKind::Simple: {
            const ClassStatistics stats = estimate_class_statistics(support, settings.beta, K);
            for (std::size_t j = 0; j < query.size(); ++j) {
                out[j] = classify(query[j], stats, method.metric).label;
            }
            break;
        }
        case HeadKind::Gmm: {
            const ClassStatistics stats = estimate_class_statistics(support, settings.beta, K);
            const ClassPrior prior = ClassPrior::uniform(K);
            for (std::size_t j = 0; j < query.size(); ++j) {
                out[j] = gmm_classify(query[j], stats, prior).label;
            }
            break;
        }
        case HeadKind::Transductive:
        case HeadKind::ClassificationOnlyTransductive:
        case HeadKind::GmmEm: {
            const RefineOutcome outcome =
                method.head == HeadKind::GmmEm
                    ? gmm_em_refine(support, query, cfg, ClassPrior::uniform(K))
                    : refine(support, query, cfg, K);
            for (std::size_t j = 0; j < query.size(); ++j) {
                out[j] = argmax_row(outcome.responsibilities.query, static_cast<Index>(j));
            }
            break;
        }
    }
    return out;
}

void BenchConfig::validate() const {
    if (domains.empty()) throw InvalidConfig("bench: need at least one domain");
    for (const auto& d : domains) d.validate();
    sampler.validate();
    if (methods.empty()) throw InvalidConfig("bench: need at least one method");
    if (tasks < 1) throw InvalidConfig("bench: need at least one task");
    RefineConfig{eval.min_steps, eval.max_steps, eval.beta}.validate();
}

json BenchConfig::to_json() const {
    json j;
    json doms = json::array();
    for (const auto& d : domains) {
        doms.push_back({{"domain_id", d.domain_id},
                        {"dims", d.dims},
                        {"class_count", d.class_count},
                        {"anisotropy", d.anisotropy},
                        {"separation", d.separation},
                        {"center_offset", d.center_offset},
                        {"scale", d.scale},
                        {"seed", d.seed}});
    }
    j["domains"] = doms;
    j["sampler"] = {{"mode", sampler.mode == SamplingMode::MetaDatasetLike ? "meta-dataset" : "fixed"},
                    {"way", {sampler.way_min, sampler.way_max}},
                    {"shot", {sampler.shot_min, sampler.shot_max}},
                    {"support_cap", sampler.support_cap},
                    {"query_per_class", sampler.query_per_class},
                    {"fixed_way", sampler.fixed_way},
                    {"fixed_shot", sampler.fixed_shot}};
    json ms = json::array();
    for (const auto& m : methods) ms.push_back(m.name);
    j["methods"] = ms;
    j["tasks"] = tasks;
    j["seed"] = seed;
    j["beta"] = eval.beta;
    j["min_steps"] = eval.min_steps;
    j["max_steps"] = eval.max_steps;
    j["adapt"] = eval.adapt;
    return j;
}

std::vector<std::vector<EpisodicTask>> sample_benchmark_tasks(const BenchConfig& cfg) {
    cfg.validate();
    std::vector<std::vector<EpisodicTask>> out;
    for (std::size_t d = 0; d < cfg.domains.size(); ++d) {
        const ClusterWorld world = make_cluster_world(cfg.domains[d]);
        const EncodingTransform identity = EncodingTransform::identity(world.dims());
        std::vector<EpisodicTask> tasks;
        tasks.reserve(cfg.tasks);
        for (int t = 0; t < cfg.tasks; ++t) {
            tasks.push_back(sample_task(world, cfg.sampler, identity, derive_seed(cfg.seed, 1 + d, t)));
        }
        out.push_back(std::move(tasks));
    }
    return out;
}

std::vector<std::vector<EpisodicTask>> group_by_domain(std::vector<EpisodicTask> tasks) {
    std::vector<std::vector<EpisodicTask>> out;
    std::map<std::string, std::size_t> index;
    for (auto& t : tasks) {
        auto [it, inserted] = index.emplace(t.domain_id, out.size());
        if (inserted) out.emplace_back();
        out[it->second].push_back(std::move(t));
    }
    return out;
}

std::vector<double> rank_descending(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

const MethodSummary& BenchmarkReport::summary(std::string_view domain, std::string_view method) const {
    for (const auto& s : summaries) {
        if (s.domain == domain && s.method == method) return s;
    }
    throw InvalidConfig("no summary for " + std::string(domain) + "/" + std::string(method));
}

std::vector<double> BenchmarkReport::accuracies(std::string_view domain, std::string_view method) const {
    std::vector<double> out;
    for (const auto& r : tasks) {
        if (r.domain == domain && r.method == method) out.push_back(r.accuracy);
    }
    return out;
}

BenchmarkReport run_benchmark_on_tasks(const BenchConfig& cfg,
                                       const std::vector<std::vector<EpisodicTask>>& tasks) {
    BenchmarkReport report;
    report.config = cfg.to_json();
    report.config_hash = fnv1a_hex(report.config.dump());
    const std::size_t M = cfg.methods.size();
    std::vector<double> rank_sum(M, 0.0);
    for (const auto& domain_tasks : tasks) {
        if (domain_tasks.empty()) continue;
        const std::string domain = domain_tasks.front().domain_id;
        std::vector<std::vector<double>> acc(M);
        for (std::size_t t = 0; t < domain_tasks.size(); ++t) {
            const EpisodicTask& task = domain_tasks[t];
            for (std::size_t m = 0; m < M; ++m) {
                const auto pred = predict_task(task, cfg.methods[m], cfg.eval);
                int correct = 0;
                for (std::size_t j = 0; j < pred.size(); ++j) {
                    if (pred[j] == task.query[j].label) ++correct;
                }
                const int total = static_cast<int>(pred.size());
                const double a = total > 0 ? static_cast<double>(correct) / total : 0.0;
                report.tasks.push_back({domain, static_cast<int>(t), cfg.methods[m].name, correct, total, a});
                acc[m].push_back(a);
            }
        }
        std::vector<double> means(M);
        for (std::size_t m = 0; m < M; ++m) means[m] = mean_ci95(acc[m]).mean;
        const auto ranks = rank_descending(means);
        for (std::size_t m = 0; m < M; ++m) {
            MethodSummary s;
            s.domain = domain;
            s.method = cfg.methods[m].name;
            s.accuracy = mean_ci95(acc[m]);
            s.rank = ranks[m];
            s.paired_diff = paired_difference_ci95(acc[m], acc[0]);
            s.significant = m != 0 && (s.paired_diff.lower() > 0.0 || s.paired_diff.upper() < 0.0);
            report.summaries.push_back(s);
            rank_sum[m] += ranks[m];
        }
    }
    const double n_domains = static_cast<double>(tasks.size());
    for (std::size_t m = 0; m < M; ++m) {
        report.average_ranks.emplace_back(cfg.methods[m].name, rank_sum[m] / n_domains);
    }
    return report;
}

BenchmarkReport run_benchmark(const BenchConfig& cfg) {
    return run_benchmark_on_tasks(cfg, sample_benchmark_tasks(cfg));
}

ConfidenceInterval RecallStudy::gap(std::string_view method_a, std::string_view method_b, int lo,
                                    int hi) const {
    const auto ia = std::find(methods.begin(), methods.end(), method_a) - methods.begin();
    const auto ib = std::find(methods.begin(), methods.end(), method_b) - methods.begin();
    if (ia == static_cast<long>(methods.size()) || ib == static_cast<long>(methods.size())) {
        throw InvalidConfig("recall gap: unknown method");
    }
    std::vector<double> a, b;
    for (const auto& c : classes) {
        if (c.shot < lo || c.shot > hi) continue;
        a.push_back(c.recall[ia]);
        b.push_back(c.recall[ib]);
    }
    return paired_difference_ci95(a, b);
}

RecallStudy recall_vs_shot(const BenchConfig& cfg, const std::vector<std::pair<int, int>>& buckets) {
    if (cfg.sampler.mode != SamplingMode::MetaDatasetLike) {
        throw InvalidConfig("recall_vs_shot needs variable-shot (meta-dataset) sampling");
    }
    const auto tasks = sample_benchmark_tasks(cfg);
    RecallStudy study;
    for (const auto& m : cfg.methods) study.methods.push_back(m.name);
    for (const auto& domain_tasks : tasks) {
        for (std::size_t t = 0; t < domain_tasks.size(); ++t) {
            const EpisodicTask& task = domain_tasks[t];
            std::vector<ClassRecall> rows(task.way);
            std::vector<int> per_class(task.way, 0);
            for (const auto& q : task.query) ++per_class[q.label];
            for (int k = 0; k < task.way; ++k) {
                rows[k] = {task.domain_id, static_cast<int>(t), k, task.shots[k],
                           std::vector<double>(cfg.methods.size(), 0.0)};
            }
            for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
                const auto pred = predict_task(task, cfg.methods[m], cfg.eval);
                for (std::size_t j = 0; j < pred.size(); ++j) {
                    if (pred[j] == task.query[j].label) rows[task.query[j].label].recall[m] += 1.0;
                }
            }
            for (int k = 0; k < task.way; ++k) {
                if (per_class[k] == 0) continue;
                for (auto& r : rows[k].recall) r /= per_class[k];
                study.classes.push_back(std::move(rows[k]));
            }
        }
    }
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        RecallCurve curve{cfg.methods[m].name, {}};
        for (const auto& [lo, hi] : buckets) {
            std::vector<double> values;
            for (const auto& c : study.classes) {
                if (c.shot >= lo && c.shot <= hi) values.push_back(c.recall[m]);
            }
            if (values.empty()) continue;
            curve.buckets.push_back({lo, hi, values.size(), mean_ci95(values)});
        }
        study.curves.push_back(std::move(curve));
    }
    return study;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_report_csv(std::ostream& out, const BenchmarkReport& report) {
    json header = report.config;
    header["config_hash"] = report.config_hash;
    header["schema"] = "bench-v1";
    out << "# " << header.dump() << '\n';
    out << "kind,domain,method,task,correct,total,accuracy,ci95,tasks,rank,paired_diff,paired_ci95,"
           "significant\n";
    for (const auto& r : report.tasks) {
        out << "task," << r.domain << ',' << r.method << ',' << r.task << ',' << r.correct << ','
            << r.total << ',' << format_double(r.accuracy) << ",,,,,,\n";
    }
    for (const auto& s : report.summaries) {
        out << "summary," << s.domain << ',' << s.method << ",,,," << format_double(s.accuracy.mean)
            << ',' << format_double(s.accuracy.half_width) << ',' << s.accuracy.n << ','
            << format_double(s.rank) << ',' << format_double(s.paired_diff.mean) << ','
            << format_double(s.paired_diff.half_width) << ',' << (s.significant ? 1 : 0) << '\n';
    }
    for (const auto& [method, rank] : report.average_ranks) {
        out << "rank,all," << method << ",,,,,,," << format_double(rank) << ",,,\n";
    }
}

json report_to_json(const BenchmarkReport& report) {
    json j;
    j["schema"] = "bench-v1";
    j["config"] = report.config;
    j["config_hash"] = report.config_hash;
    json tasks = json::array();
    for (const auto& r : report.tasks) {
        tasks.push_back({{"domain", r.domain}, {"method", r.method}, {"task", r.task},
                         {"correct", r.correct}, {"total", r.total}, {"accuracy", r.accuracy}});
    }
    j["tasks"] = tasks;
    json sums = json::array();
    for (const auto& s : report.summaries) {
        sums.push_back({{"domain", s.domain}, {"method", s.method}, {"accuracy", s.accuracy.mean},
                        {"ci95", s.accuracy.half_width}, {"tasks", s.accuracy.n}, {"rank", s.rank},
                        {"paired_diff", s.paired_diff.mean}, {"paired_ci95", s.paired_diff.half_width},
                        {"significant", s.significant}});
    }
    j["summaries"] = sums;
    json ranks = json::array();
    for (const auto& [method, rank] : report.average_ranks) {
        ranks.push_back({{"method", method}, {"average_rank", rank}});
    }
    j["ranks"] = ranks;
    return j;
}

void write_recall_csv(std::ostream& out, const RecallStudy& study, const json& config) {
    json header = config;
    header["schema"] = "recall-v1";
    out << "# " << header.dump() << '\n';
    out << "method,shot_lo,shot_hi,classes,mean_recall,ci95\n";
    for (const auto& curve : study.curves) {
        for (const auto& b : curve.buckets) {
            out << curve.method << ',' << b.lo << ',' << b.hi << ',' << b.classes << ','
                << format_double(b.recall.mean) << ',' << format_double(b.recall.half_width) << '\n';
        }
    }
}

}  // namespace fewshot
