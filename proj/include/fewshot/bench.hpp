#pragma once

#include "fewshot/episodic.hpp"
#include "fewshot/gmm_head.hpp"
#include "fewshot/transductive.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fewshot {

struct ConfidenceInterval {
    double mean = 0.0;
    /// 1.96 * sigma / sqrt(n), sigma the population standard deviation.
    double half_width = 0.0;
    std::size_t n = 0;

    double lower() const noexcept { return mean - half_width; }
    double upper() const noexcept { return mean + half_width; }
};

ConfidenceInterval mean_ci95(std::span<const double> values);
/// CI of a - b over paired samples.
ConfidenceInterval paired_difference_ci95(std::span<const double> a, std::span<const double> b);
/// True when the two intervals do not overlap.
bool separated(const ConfidenceInterval& a, const ConfidenceInterval& b);

enum class HeadKind { Simple, Transductive, ClassificationOnlyTransductive, Gmm, GmmEm };

std::string_view to_string(HeadKind h);

struct MethodSpec {
    std::string name;
    HeadKind head = HeadKind::Simple;
    MetricKind metric = MetricKind::SquaredMahalanobis;
};

/// "simple", "transductive", "cot", "gmm", "gmm-em", optionally suffixed by
/// ":<metric>" (e.g. "simple:euclidean").
MethodSpec parse_method(std::string_view text);
/// Every head plus the Simple head under each alternative metric.
std::vector<MethodSpec> default_methods();

struct EvalSettings {
    double beta = 1.0;
    int min_steps = 2;
    int max_steps = 4;
    /// Re-center features on the pooled task encoding before classifying:
    /// the support encoding for Simple/GMM/COT, the mean of the support and
    /// query encodings for Transductive/GMM-EM. Off by default, in which case
    /// COT and Transductive coincide.
    bool adapt = false;
};

/// Predicted task-local label for every query example.
std::vector<int> predict_task(const EpisodicTask& task, const MethodSpec& method,
                              const EvalSettings& settings);

struct BenchConfig {
    std::vector<WorldConfig> domains{WorldConfig{}};
    SamplerConfig sampler;
    std::vector<MethodSpec> methods = default_methods();
    /// Tasks per domain.
    int tasks = 100;
    std::uint64_t seed = 0;
    EvalSettings eval;

    void validate() const;
    nlohmann::json to_json() const;
};

/// Tasks for every domain, seeded by (seed, domain, task index).
std::vector<std::vector<EpisodicTask>> sample_benchmark_tasks(const BenchConfig& cfg);

struct TaskRecord {
    std::string domain;
    int task = 0;
    std::string method;
    int correct = 0;
    int total = 0;
    double accuracy = 0.0;
};

struct MethodSummary {
    std::string domain;
    std::string method;
    ConfidenceInterval accuracy;
    double rank = 0.0;
    /// Paired difference against the first method and whether its CI excludes 0.
    ConfidenceInterval paired_diff;
    bool significant = false;
};

struct BenchmarkReport {
    std::vector<TaskRecord> tasks;
    std::vector<MethodSummary> summaries;
    /// Average rank over domains, in method order.
    std::vector<std::pair<std::string, double>> average_ranks;
    nlohmann::json config;
    std::string config_hash;

    const MethodSummary& summary(std::string_view domain, std::string_view method) const;
    /// Per-task accuracies for one (domain, method), in task order.
    std::vector<double> accuracies(std::string_view domain, std::string_view method) const;
};

BenchmarkReport run_benchmark(const BenchConfig& cfg);
/// Evaluates pre-sampled tasks (grouped by domain) with the config's methods.
BenchmarkReport run_benchmark_on_tasks(const BenchConfig& cfg,
                                       const std::vector<std::vector<EpisodicTask>>& tasks);
/// Groups tasks by domain id in first-seen order.
std::vector<std::vector<EpisodicTask>> group_by_domain(std::vector<EpisodicTask> tasks);

/// Ranks (1 = best) with ties sharing their average rank.
std::vector<double> rank_descending(std::span<const double> values);

struct RecallBucket {
    int lo = 0;
    int hi = 0;
    std::size_t classes = 0;
    ConfidenceInterval recall;
};

struct RecallCurve {
    std::string method;
    std::vector<RecallBucket> buckets;
};

struct ClassRecall {
    std::string domain;
    int task = 0;
    int label = 0;
    int shot = 0;
    /// One entry per method.
    std::vector<double> recall;
};

struct RecallStudy {
    std::vector<std::string> methods;
    std::vector<ClassRecall> classes;
    std::vector<RecallCurve> curves;

    /// Paired (a - b) per-class recall difference over classes with shot in [lo, hi].
    ConfidenceInterval gap(std::string_view method_a, std::string_view method_b, int lo,
                           int hi) const;
};

inline const std::vector<std::pair<int, int>> kDefaultShotBuckets{
    {1, 1}, {2, 3}, {4, 7}, {8, 15}, {16, 24}, {25, std::numeric_limits<int>::max()}};

RecallStudy recall_vs_shot(const BenchConfig& cfg,
                           const std::vector<std::pair<int, int>>& buckets = kDefaultShotBuckets);

/// Deterministic decimal formatting used for every CSV cell.
std::string format_double(double v);
std::string fnv1a_hex(std::string_view text);

void write_report_csv(std::ostream& out, const BenchmarkReport& report);
nlohmann::json report_to_json(const BenchmarkReport& report);
void write_recall_csv(std::ostream& out, const RecallStudy& study, const nlohmann::json& config);

}  // namespace fewshot
