#include "helpers.hpp"

#include "fewshot/bench.hpp"
#include "fewshot/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace fewshot;

namespace {

BenchConfig small_config() {
    BenchConfig cfg;
    WorldConfig w;
    w.dims = 4;
    w.class_count = 20;
    cfg.domains = {w};
    cfg.sampler = SamplerConfig::fixed(5, 2, 5);
    cfg.methods = {parse_method("simple"), parse_method("transductive"), parse_method("gmm")};
    cfg.tasks = 30;
    cfg.seed = 5;
    return cfg;
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("confidence intervals") {
    const std::vector<double> acc{0.5, 1.0};
    const ConfidenceInterval ci = mean_ci95(acc);
    CHECK(ci.mean == 0.75);
    CHECK(std::abs(ci.half_width - 1.96 * 0.25 / std::sqrt(2.0)) <= 1e-12);
    CHECK(ci.half_width == doctest::Approx(0.3465).epsilon(1e-4));
    CHECK(ci.n == 2);
    const std::vector<double> same{0.2, 0.2, 0.2};
    CHECK(mean_ci95(same).half_width <= 1e-15);
    const std::vector<double> a{0.9, 0.8, 0.7}, b{0.6, 0.7, 0.5};
    const ConfidenceInterval d = paired_difference_ci95(a, b);
    CHECK(d.mean == doctest::Approx(0.2));
    CHECK(separated(ConfidenceInterval{0.5, 0.1, 10}, ConfidenceInterval{0.75, 0.1, 10}));
    CHECK(!separated(ConfidenceInterval{0.5, 0.2, 10}, ConfidenceInterval{0.75, 0.1, 10}));
}

TEST_CASE("ranks") {
    const std::vector<double> one{0.4};
    CHECK(rank_descending(one) == std::vector<double>{1.0});
    const std::vector<double> v{0.5, 0.9, 0.5, 0.1};
    CHECK(rank_descending(v) == std::vector<double>{2.5, 1.0, 2.5, 4.0});
}

TEST_CASE("method parsing") {
    CHECK(parse_method("simple").head == HeadKind::Simple);
    const MethodSpec m = parse_method("simple:cosine");
    CHECK(m.metric == MetricKind::CosineSimilarity);
    CHECK(m.name == "simple:cosine");
    CHECK(parse_method("gmm-em").head == HeadKind::GmmEm);
    CHECK(parse_method("cot").head == HeadKind::ClassificationOnlyTransductive);
    CHECK_THROWS_AS(parse_method("gmm:euclidean"), InvalidConfig);
    CHECK_THROWS_AS(parse_method("knn"), InvalidConfig);
    CHECK(default_methods().size() == 10);
}

TEST_CASE("report self-consistency and pairing") {
    BenchConfig cfg = small_config();
    cfg.methods.push_back(MethodSpec{"simple-again", HeadKind::Simple, MetricKind::SquaredMahalanobis});
    const BenchmarkReport r = run_benchmark(cfg);
    CHECK(r.tasks.size() == 4 * 30);
    for (const auto& s : r.summaries) {
        CHECK(s.accuracy.n == 30);
        CHECK(s.accuracy.half_width >= 0.0);
        const auto acc = r.accuracies(s.domain, s.method);
        double sum = 0.0;
        for (double a : acc) sum += a;
        CHECK(std::abs(sum / 30.0 - s.accuracy.mean) <= 1e-12);
    }
    for (const auto& t : r.tasks) CHECK(t.accuracy == static_cast<double>(t.correct) / t.total);
    CHECK(r.accuracies("synthetic", "simple") == r.accuracies("synthetic", "simple-again"));
    CHECK(r.summary("synthetic", "simple-again").rank == r.summary("synthetic", "simple").rank);
    CHECK(!r.summary("synthetic", "simple-again").significant);
    CHECK(r.average_ranks.size() == 4);
    CHECK(r.config_hash == run_benchmark(cfg).config_hash);
}

TEST_CASE("tasks are shared across methods and domains get their own seeds") {
    BenchConfig cfg = small_config();
    cfg.domains.push_back(cfg.domains.front());
    cfg.domains[0].domain_id = "a";
    cfg.domains[1].domain_id = "b";
    cfg.domains[1].seed = 1;
    const auto tasks = sample_benchmark_tasks(cfg);
    REQUIRE(tasks.size() == 2);
    CHECK(!(tasks[0][0] == tasks[1][0]));
    CHECK(tasks[0][3].domain_id == "a");
    std::vector<EpisodicTask> flat;
    for (const auto& d : tasks) flat.insert(flat.end(), d.begin(), d.end());
    const auto grouped = group_by_domain(flat);
    CHECK(grouped == tasks);
}

TEST_CASE("perfect classifier has unit recall and empty buckets are dropped") {
    BenchConfig cfg = small_config();
    cfg.domains[0].separation = 200.0;
    cfg.domains[0].anisotropy = 1.0;
    cfg.sampler = SamplerConfig{};
    cfg.sampler.way_max = 6;
    cfg.sampler.shot_max = 3;
    cfg.methods = {parse_method("simple")};
    const RecallStudy st = recall_vs_shot(cfg);
    REQUIRE(st.curves.size() == 1);
    CHECK(st.curves[0].buckets.size() == 2);
    for (const auto& b : st.curves[0].buckets) {
        CHECK(b.recall.mean == 1.0);
        CHECK(b.classes > 0);
    }
    BenchConfig fixed = small_config();
    CHECK_THROWS_AS(recall_vs_shot(fixed), InvalidConfig);
}

TEST_CASE("csv output is deterministic and parseable") {
    const BenchConfig cfg = small_config();
    std::ostringstream a, b;
    write_report_csv(a, run_benchmark(cfg));
    write_report_csv(b, run_benchmark(cfg));
    CHECK(a.str() == b.str());
    std::istringstream in(a.str());
    std::string header, columns;
    std::getline(in, header);
    std::getline(in, columns);
    CHECK(header.rfind("# {", 0) == 0);
    CHECK(columns.rfind("kind,domain,method,task,correct,total,accuracy", 0) == 0);
    const nlohmann::json j = report_to_json(run_benchmark(cfg));
    CHECK(j.contains("summaries"));
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(fnv1a_hex("") == fnv1a_hex(""));
    CHECK(fnv1a_hex("a") != fnv1a_hex("b"));
}

TEST_CASE("config validation") {
    BenchConfig cfg = small_config();
    cfg.tasks = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
    cfg = small_config();
    cfg.methods.clear();
    CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
}

}
