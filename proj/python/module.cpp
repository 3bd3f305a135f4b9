#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fewshot/active.hpp"
#include "fewshot/bench.hpp"
#include "fewshot/continual.hpp"
#include "fewshot/errors.hpp"
#include "fewshot/riemann.hpp"

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace fewshot;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<LabeledExample> examples(const RowMatrix& x, const std::vector<int>& labels) {
    if (static_cast<std::size_t>(x.rows()) != labels.size()) {
        throw DimensionMismatch("features have " + std::to_string(x.rows()) + " rows but " +
                                std::to_string(labels.size()) + " labels were given");
    }
    std::vector<LabeledExample> out;
    for (Index i = 0; i < x.rows(); ++i) out.push_back({x.row(i).transpose(), labels[i]});
    return out;
}

std::vector<Vector> rows(const RowMatrix& x) {
    std::vector<Vector> out;
    for (Index i = 0; i < x.rows(); ++i) out.push_back(x.row(i).transpose());
    return out;
}

RowMatrix stack(const std::vector<LabeledExample>& s, Index dims) {
    RowMatrix m(static_cast<Index>(s.size()), dims);
    for (std::size_t i = 0; i < s.size(); ++i) m.row(static_cast<Index>(i)) = s[i].features.transpose();
    return m;
}

std::vector<int> labels_of(const std::vector<LabeledExample>& s) {
    std::vector<int> out;
    for (const auto& ex : s) out.push_back(ex.label);
    return out;
}

RefineConfig refine_config(int min_steps, int max_steps, double beta, const std::string& metric) {
    RefineConfig cfg;
    cfg.min_steps = min_steps;
    cfg.max_steps = max_steps;
    cfg.beta = beta;
    cfg.metric = parse_metric(metric);
    return cfg;
}

ClassPrior prior_or_uniform(const std::optional<Vector>& prior, int K) {
    return prior ? ClassPrior(*prior) : ClassPrior::uniform(K);
}

py::dict outcome(const RefineOutcome& out) {
    py::dict d;
    d["statistics"] = out.statistics;
    d["query_responsibilities"] = out.responsibilities.query;
    d["iterations_run"] = out.iterations_run;
    d["converged_early"] = out.converged_early;
    d["query_history"] = out.query_history;
    return d;
}

WorldConfig world_config(Index dims, int class_count, double anisotropy, double separation, double scale,
                         double center_offset, std::uint64_t seed) {
    WorldConfig w;
    w.dims = dims;
    w.class_count = class_count;
    w.anisotropy = anisotropy;
    w.separation = separation;
    w.scale = scale;
    w.center_offset = center_offset;
    w.seed = seed;
    return w;
}

SamplerConfig sampler_config(std::optional<int> way, int shot, int query) {
    if (way) return SamplerConfig::fixed(*way, shot, query);
    SamplerConfig s;
    s.query_per_class = query;
    return s;
}

}  // namespace

PYBIND11_MODULE(_fewshot, m) {
    m.doc() = "Few-shot Gaussian classification heads, refinement loops and benchmarks";

    // Translators run most recent first, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidConfig>(m, "InvalidConfig", PyExc_ValueError);
    py::register_exception<InvalidPrior>(m, "InvalidPrior", PyExc_ValueError);
    py::register_exception<DimensionMismatch>(m, "DimensionMismatch", PyExc_ValueError);
    py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite", PyExc_ArithmeticError);
    py::register_exception<EmptyClass>(m, "EmptyClass", PyExc_ValueError);

    py::class_<ClassStatistics>(m, "ClassStatistics")
        .def_property_readonly("class_count", &ClassStatistics::class_count)
        .def_property_readonly("dims", &ClassStatistics::dims)
        .def_property_readonly("means", &ClassStatistics::means)
        .def_property_readonly("counts", &ClassStatistics::counts)
        .def("covariance", [](const ClassStatistics& s, int k) { return s.covariance(k).matrix(); })
        .def_property_readonly("max_jitter", &ClassStatistics::max_jitter);

    m.def("metrics", [] {
        std::vector<std::string> out;
        for (MetricKind k : kAllMetrics) out.emplace_back(to_string(k));
        return out;
    });

    m.def("estimate_class_statistics",
          [](const RowMatrix& x, const std::vector<int>& labels, double beta, int class_count) {
              return estimate_class_statistics(examples(x, labels), beta, class_count);
          },
          py::arg("features"), py::arg("labels"), py::arg("beta") = 1.0, py::arg("class_count") = -1);

    m.def("class_scores",
          [](const Vector& q, const ClassStatistics& s, const std::string& metric) {
              return class_scores(q, s, parse_metric(metric));
          },
          py::arg("query"), py::arg("stats"), py::arg("metric") = "mahalanobis");

    m.def("classify",
          [](const Vector& q, const ClassStatistics& s, const std::string& metric) {
              const Prediction p = classify(q, s, parse_metric(metric));
              return py::make_tuple(p.probs, p.label);
          },
          py::arg("query"), py::arg("stats"), py::arg("metric") = "mahalanobis");

    m.def("bregman_divergence",
          [](const Vector& z, const Vector& ref, const Matrix& q) { return bregman_divergence(z, ref, SymMatrix(q)); },
          py::arg("z"), py::arg("z_ref"), py::arg("q"));

    m.def("refine",
          [](const RowMatrix& support, const std::vector<int>& labels, const RowMatrix& query, int min_steps,
             int max_steps, double beta, const std::string& metric) {
              return outcome(refine(examples(support, labels), rows(query),
                                    refine_config(min_steps, max_steps, beta, metric)));
          },
          py::arg("support"), py::arg("labels"), py::arg("query"), py::arg("min_steps") = 2, py::arg("max_steps") = 4,
          py::arg("beta") = 1.0, py::arg("metric") = "mahalanobis");

    m.def("gmm_classify",
          [](const Vector& q, const ClassStatistics& s, const std::optional<Vector>& prior) {
              const Prediction p = gmm_classify(q, s, prior_or_uniform(prior, s.class_count()));
              return py::make_tuple(p.probs, p.label);
          },
          py::arg("query"), py::arg("stats"), py::arg("prior") = py::none());

    m.def("gmm_em_refine",
          [](const RowMatrix& support, const std::vector<int>& labels, const RowMatrix& query, int min_steps,
             int max_steps, double beta, const std::optional<Vector>& prior) {
              const auto s = examples(support, labels);
              int K = 0;
              for (int l : labels) K = std::max(K, l + 1);
              return outcome(gmm_em_refine(s, rows(query), refine_config(min_steps, max_steps, beta, "mahalanobis"),
                                           prior_or_uniform(prior, K)));
          },
          py::arg("support"), py::arg("labels"), py::arg("query"), py::arg("min_steps") = 2, py::arg("max_steps") = 4,
          py::arg("beta") = 1.0, py::arg("prior") = py::none());

    m.def("acquisition_scores",
          [](const RowMatrix& probs, const std::string& strategy) {
              return acquisition_scores(rows(probs), parse_strategy(strategy));
          },
          py::arg("probs"), py::arg("strategy"));

    m.def("sample_task",
          [](Index dims, int class_count, double anisotropy, double separation, double scale, double center_offset,
             std::uint64_t world_seed, std::optional<int> way, int shot, int query, std::uint64_t seed) {
              const ClusterWorld world = make_cluster_world(
                  world_config(dims, class_count, anisotropy, separation, scale, center_offset, world_seed));
              const EpisodicTask t =
                  sample_task(world, sampler_config(way, shot, query), EncodingTransform::identity(dims), seed);
              py::dict d;
              d["support"] = stack(t.support, dims);
              d["support_labels"] = labels_of(t.support);
              d["query"] = stack(t.query, dims);
              d["query_labels"] = labels_of(t.query);
              d["way"] = t.way;
              d["shots"] = t.shots;
              d["seed"] = t.seed;
              return d;
          },
          py::kw_only(), py::arg("dims") = 8, py::arg("class_count") = 64, py::arg("anisotropy") = 16.0,
          py::arg("separation") = 3.0, py::arg("scale") = 1.0, py::arg("center_offset") = 0.0,
          py::arg("world_seed") = 0, py::arg("way") = py::none(), py::arg("shot") = 1, py::arg("query") = 10,
          py::arg("seed") = 0);

    m.def("_run_benchmark",
          [](const std::vector<std::string>& methods, int tasks, std::uint64_t seed, Index dims, int class_count,
             double anisotropy, double separation, double scale, double center_offset, std::uint64_t world_seed,
             std::optional<int> way, int shot, int query, double beta, int min_steps, int max_steps, bool adapt) {
              BenchConfig cfg;
              cfg.domains = {world_config(dims, class_count, anisotropy, separation, scale, center_offset, world_seed)};
              cfg.sampler = sampler_config(way, shot, query);
              if (!methods.empty()) {
                  cfg.methods.clear();
                  for (const auto& name : methods) cfg.methods.push_back(parse_method(name));
              }
              cfg.tasks = tasks;
              cfg.seed = seed;
              cfg.eval = EvalSettings{beta, min_steps, max_steps, adapt};
              return report_to_json(run_benchmark(cfg)).dump();
          },
          py::kw_only(), py::arg("methods"), py::arg("tasks"), py::arg("seed"), py::arg("dims"),
          py::arg("class_count"), py::arg("anisotropy"), py::arg("separation"), py::arg("scale"),
          py::arg("center_offset"), py::arg("world_seed"), py::arg("way"), py::arg("shot"), py::arg("query"),
          py::arg("beta"), py::arg("min_steps"), py::arg("max_steps"), py::arg("adapt"));

    m.def("run_continual_session",
          [](const std::string& strategy, const std::string& head, Index dims, int class_count, double anisotropy,
             double separation, std::uint64_t world_seed, int tasks, int classes_per_task, int shot, double drift,
             bool refine_on, std::uint64_t seed) {
              const ClusterWorld world =
                  make_cluster_world(world_config(dims, class_count, anisotropy, separation, 1.0, 0.0, world_seed));
              StreamConfig cfg;
              cfg.tasks = tasks;
              cfg.classes_per_task = classes_per_task;
              cfg.shot = shot;
              cfg.drift = drift;
              cfg.refine = refine_on;
              cfg.seed = seed;
              const ContinualResult r =
                  run_continual_session(world, cfg, parse_encoding_strategy(strategy), parse_head_mode(head));
              py::dict d;
              d["accuracy"] = r.accuracy;
              d["class_counts"] = r.class_counts;
              d["max_jitter"] = r.max_jitter;
              return d;
          },
          py::kw_only(), py::arg("strategy") = "first", py::arg("head") = "single-head", py::arg("dims") = 8,
          py::arg("class_count") = 10, py::arg("anisotropy") = 16.0, py::arg("separation") = 3.0,
          py::arg("world_seed") = 0, py::arg("tasks") = 5, py::arg("classes_per_task") = 2, py::arg("shot") = 10,
          py::arg("drift") = 0.5, py::arg("refine") = false, py::arg("seed") = 0);

    m.def("energy_gap",
          [](std::uint64_t seed, double flatness, double support_fraction, Index dims) {
              TwoCentroidFieldConfig cfg;
              cfg.flatness = flatness;
              cfg.support_fraction = support_fraction;
              cfg.dims = dims;
              const MetricField field = make_two_centroid_field(cfg, derive_seed(seed, 0, 0));
              const Vector x = sample_plateau_point(field, 0, derive_seed(seed, 1, 0));
              const EnergyGap g = energy_gap_check(field, x, 0, 1);
              py::dict d;
              d["delta_energy"] = g.delta_energy;
              d["half_gap"] = g.half_gap;
              d["rel_error"] = g.rel_error;
              d["full_delta_energy"] = g.full_delta_energy;
              return d;
          },
          py::arg("seed") = 0, py::arg("flatness") = 0.8, py::arg("support_fraction") = 0.5, py::arg("dims") = 8);

    m.def("mean_ci95", [](const std::vector<double>& v) {
        const ConfidenceInterval ci = mean_ci95(v);
        return py::make_tuple(ci.mean, ci.half_width);
    });
}
