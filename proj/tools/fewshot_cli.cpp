// Command-line front end: benchmarks, recall curves, active and continual
// sessions, metric-field checks and task-file generation.

#include "fewshot/active.hpp"
#include "fewshot/bench.hpp"
#include "fewshot/continual.hpp"
#include "fewshot/errors.hpp"
#include "fewshot/riemann.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::json;
using namespace fewshot;

struct Options {
    std::uint64_t seed = 0;
    int dims = 8;
    double anisotropy = 16.0;
    int tasks = 100;
    std::string out = "-";
    std::vector<std::string> methods;
    std::string metric;
    int min_steps = 2;
    int max_steps = 4;
    double beta = 1.0;

    // World.
    int classes = 64;
    double separation = 3.0;
    double scale = 1.0;
    double center_offset = 0.0;
    int domains = 1;

    // Sampler.
    std::string mode = "meta-dataset";
    int way = 5;
    int shot = 1;
    int query = 10;
    std::string tasks_file;
    bool adapt = false;

    // Sessions.
    int sessions = 20;
    int budget = 20;
    std::vector<std::string> strategies;
    std::string head = "simple";
    std::vector<std::string> head_modes;
    int stream_tasks = 5;
    int stream_shot = 10;
    int classes_per_task = 2;
    double drift = 0.5;
    double offset_scale = 2.0;
    bool refine = false;

    // Metric fields.
    int fields = 100;
    double flatness = 0.8;
    double support_fraction = 0.5;
};

WorldConfig world_config(const Options& o, int domain) {
    WorldConfig w;
    w.dims = o.dims;
    w.class_count = o.classes;
    w.anisotropy = o.anisotropy;
    w.separation = o.separation;
    w.scale = o.scale;
    w.center_offset = o.center_offset;
    w.seed = derive_seed(o.seed, 0, static_cast<std::uint64_t>(domain));
    w.domain_id = o.domains == 1 ? "synthetic" : "synthetic-" + std::to_string(domain);
    return w;
}

SamplerConfig sampler_config(const Options& o) {
    if (o.mode == "meta-dataset") {
        SamplerConfig s;
        s.query_per_class = o.query;
        return s;
    }
    if (o.mode == "fixed") return SamplerConfig::fixed(o.way, o.shot, o.query);
    throw InvalidConfig("unknown --mode '" + o.mode + "' (expected meta-dataset or fixed)");
}

std::vector<MethodSpec> resolve_methods(const Options& o, std::vector<std::string> fallback) {
    std::vector<std::string> names = o.methods.empty() ? std::move(fallback) : o.methods;
    std::vector<MethodSpec> out;
    if (names.empty()) {
        out = default_methods();
    } else {
        for (const auto& n : names) out.push_back(parse_method(n));
    }
    if (!o.metric.empty()) {
        const MetricKind metric = parse_metric(o.metric);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const bool has_suffix = names.empty() ? out[i].metric != MetricKind::SquaredMahalanobis
                                                  : names[i].find(':') != std::string::npos;
            const bool gmm = out[i].head == HeadKind::Gmm || out[i].head == HeadKind::GmmEm;
            if (!has_suffix && !gmm) {
                out[i] = parse_method(std::string(to_string(out[i].head)) + ":" +
                                      std::string(to_string(metric)));
            }
        }
    }
    return out;
}

BenchConfig bench_config(const Options& o, std::vector<std::string> fallback_methods) {
    BenchConfig cfg;
    cfg.domains.clear();
    if (o.domains < 1) throw InvalidConfig("--domains must be at least 1");
    for (int d = 0; d < o.domains; ++d) cfg.domains.push_back(world_config(o, d));
    cfg.sampler = sampler_config(o);
    cfg.methods = resolve_methods(o, std::move(fallback_methods));
    cfg.tasks = o.tasks;
    cfg.seed = o.seed;
    cfg.eval = EvalSettings{o.beta, o.min_steps, o.max_steps, o.adapt};
    cfg.validate();
    return cfg;
}

RefineConfig refine_config(const Options& o) {
    RefineConfig r{o.min_steps, o.max_steps, o.beta,
                   o.metric.empty() ? MetricKind::SquaredMahalanobis : parse_metric(o.metric)};
    r.validate();
    return r;
}

bool wants_json(const std::string& path) {
    return path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
}

template <typename Writer>
void emit(const std::string& path, Writer&& write) {
    if (path == "-") {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open '" + path + "' for writing");
    write(file);
    if (!file) throw IoError("failed writing '" + path + "'");
}

void echo_config(const json& config, std::uint64_t seed) {
    std::cerr << "config: " << config.dump() << "\nseed: " << seed << '\n';
}

std::string csv_header(json config, const char* schema) {
    config["schema"] = schema;
    return "# " + config.dump() + "\n";
}

int run_bench(const Options& o) {
    BenchConfig cfg = bench_config(o, {});
    BenchmarkReport report;
    if (!o.tasks_file.empty()) {
        auto groups = group_by_domain(read_tasks(o.tasks_file));
        if (groups.empty()) throw InvalidConfig("task file '" + o.tasks_file + "' holds no tasks");
        cfg.tasks = static_cast<int>(groups.front().size());
        report = run_benchmark_on_tasks(cfg, groups);
    } else {
        report = run_benchmark(cfg);
    }
    echo_config(report.config, o.seed);
    emit(o.out, [&](std::ostream& out) {
        if (wants_json(o.out)) {
            out << report_to_json(report).dump(2) << '\n';
        } else {
            write_report_csv(out, report);
        }
    });
    return 0;
}

int run_recall(const Options& o) {
    const BenchConfig cfg = bench_config(o, {"simple", "transductive"});
    if (cfg.sampler.mode != SamplingMode::MetaDatasetLike) {
        throw InvalidConfig("recall needs --mode meta-dataset (variable shots)");
    }
    const RecallStudy study = recall_vs_shot(cfg);
    const json config = cfg.to_json();
    echo_config(config, o.seed);
    emit(o.out, [&](std::ostream& out) {
        if (wants_json(o.out)) {
            json j{{"schema", "recall-v1"}, {"config", config}, {"curves", json::array()}};
            for (const auto& c : study.curves) {
                json buckets = json::array();
                for (const auto& b : c.buckets) {
                    buckets.push_back({{"shot_lo", b.lo}, {"shot_hi", b.hi}, {"classes", b.classes},
                                       {"mean_recall", b.recall.mean}, {"ci95", b.recall.half_width}});
                }
                j["curves"].push_back({{"method", c.method}, {"buckets", buckets}});
            }
            out << j.dump(2) << '\n';
        } else {
            write_recall_csv(out, study, config);
        }
    });
    return 0;
}

template <typename E, typename Parse, typename All>
std::vector<E> parse_list(const std::vector<std::string>& names, Parse&& parse, All all) {
    if (names.empty()) return std::vector<E>(all.begin(), all.end());
    std::vector<E> out;
    for (const auto& n : names) out.push_back(parse(n));
    return out;
}

int run_active(const Options& o) {
    if (o.sessions < 1) throw InvalidConfig("--sessions must be at least 1");
    if (o.head != "simple" && o.head != "transductive") {
        throw InvalidConfig("active --head must be simple or transductive");
    }
    const auto strategies = parse_list<AcquisitionStrategy>(
        o.strategies, parse_strategy,
        std::vector{AcquisitionStrategy::Random, AcquisitionStrategy::PredictiveEntropy,
                    AcquisitionStrategy::VariationRatios});
    const WorldConfig wcfg = world_config(o, 0);
    const ClusterWorld world = make_cluster_world(wcfg);
    ActiveHead head{o.head == "transductive", refine_config(o)};
    ActiveWorldConfig layout;
    layout.way = o.way;

    json config{{"command", "active"}, {"seed", o.seed}, {"sessions", o.sessions},
                {"budget", o.budget}, {"head", o.head}, {"way", o.way},
                {"dims", o.dims}, {"anisotropy", o.anisotropy}, {"separation", o.separation},
                {"classes", o.classes}, {"min_steps", o.min_steps}, {"max_steps", o.max_steps},
                {"beta", o.beta}, {"metric", std::string(to_string(head.refine.metric))}};
    json names = json::array();
    for (auto s : strategies) names.push_back(std::string(to_string(s)));
    config["strategies"] = names;
    echo_config(config, o.seed);

    std::ostringstream body;
    body << csv_header(config, "active-v1") << "session_id,strategy,step,accuracy\n";
    for (int i = 0; i < o.sessions; ++i) {
        const std::uint64_t session_seed = derive_seed(o.seed, 10, static_cast<std::uint64_t>(i));
        for (auto s : strategies) {
            const ActiveSession session = make_active_session(world, layout, o.budget, s, session_seed);
            const ActiveResult r = run_active_session(session, head);
            for (std::size_t t = 0; t < r.curve.size(); ++t) {
                body << i << ',' << to_string(s) << ',' << t << ',' << format_double(r.curve[t]) << '\n';
            }
        }
    }
    emit(o.out, [&](std::ostream& out) { out << body.str(); });
    return 0;
}

int run_continual(const Options& o) {
    if (o.sessions < 1) throw InvalidConfig("--sessions must be at least 1");
    const auto strategies = parse_list<EncodingStrategy>(
        o.strategies, parse_encoding_strategy,
        std::vector{EncodingStrategy::Moving, EncodingStrategy::First, EncodingStrategy::Averaging});
    const auto modes = parse_list<HeadMode>(o.head_modes, parse_head_mode,
                                            std::vector{HeadMode::MultiHead, HeadMode::SingleHead});
    StreamConfig stream;
    stream.tasks = o.stream_tasks;
    stream.classes_per_task = o.classes_per_task;
    stream.shot = o.stream_shot;
    stream.query_per_class = o.query;
    stream.drift = o.drift;
    stream.offset_scale = o.offset_scale;
    stream.refine = o.refine;
    stream.refine_config = refine_config(o);
    stream.validate();

    json config{{"command", "continual"}, {"seed", o.seed}, {"sessions", o.sessions},
                {"stream_tasks", o.stream_tasks}, {"classes_per_task", o.classes_per_task},
                {"shot", o.stream_shot}, {"query", o.query}, {"drift", o.drift},
                {"offset_scale", o.offset_scale}, {"refine", o.refine}, {"dims", o.dims},
                {"anisotropy", o.anisotropy}, {"separation", o.separation}, {"classes", o.classes},
                {"min_steps", o.min_steps}, {"max_steps", o.max_steps}, {"beta", o.beta}};
    echo_config(config, o.seed);

    std::ostringstream body;
    body << csv_header(config, "continual-v1") << "session,strategy,head,step,task,accuracy\n";
    for (int i = 0; i < o.sessions; ++i) {
        WorldConfig wcfg = world_config(o, 0);
        wcfg.seed = derive_seed(o.seed, 21, static_cast<std::uint64_t>(i));
        const ClusterWorld world = make_cluster_world(wcfg);
        StreamConfig sc = stream;
        sc.seed = derive_seed(o.seed, 20, static_cast<std::uint64_t>(i));
        for (auto s : strategies) {
            for (auto m : modes) {
                const ContinualResult r = run_continual_session(world, sc, s, m);
                for (Index step = 0; step < r.accuracy.rows(); ++step) {
                    for (Index task = 0; task <= step; ++task) {
                        body << i << ',' << to_string(s) << ',' << to_string(m) << ',' << step << ','
                             << task << ',' << format_double(r.accuracy(step, task)) << '\n';
                    }
                }
            }
        }
    }
    emit(o.out, [&](std::ostream& out) { out << body.str(); });
    return 0;
}

int run_riemann(const Options& o) {
    if (o.fields < 1) throw InvalidConfig("--fields must be at least 1");
    TwoCentroidFieldConfig fcfg;
    fcfg.dims = o.dims;
    fcfg.anisotropy = o.anisotropy;
    fcfg.separation = o.separation;
    fcfg.beta = o.beta;
    fcfg.support_fraction = o.support_fraction;
    fcfg.flatness = o.flatness;
    fcfg.validate();

    json config{{"command", "riemann"}, {"seed", o.seed}, {"fields", o.fields}, {"dims", o.dims},
                {"anisotropy", o.anisotropy}, {"separation", o.separation}, {"beta", o.beta},
                {"support_fraction", o.support_fraction}, {"flatness", o.flatness}};
    echo_config(config, o.seed);

    std::ostringstream body;
    body << csv_header(config, "riemann-v1") << "field_seed,pair,delta_energy,half_gap,rel_error\n";
    int within = 0;
    for (int f = 0; f < o.fields; ++f) {
        const std::uint64_t field_seed = derive_seed(o.seed, 30, static_cast<std::uint64_t>(f));
        const MetricField field = make_two_centroid_field(fcfg, field_seed);
        const Vector x = sample_plateau_point(field, 0, derive_seed(o.seed, 31, static_cast<std::uint64_t>(f)));
        const EnergyGap g = energy_gap_check(field, x, 0, 1);
        if (g.rel_error < 0.05) ++within;
        body << field_seed << ",0-1," << format_double(g.delta_energy) << ','
             << format_double(g.half_gap) << ',' << format_double(g.rel_error) << '\n';
    }
    std::fprintf(stderr, "fields: %d, relative error < 5%%: %d\n", o.fields, within);
    emit(o.out, [&](std::ostream& out) { out << body.str(); });
    return 0;
}

int run_gen_tasks(const Options& o) {
    if (o.out == "-") throw InvalidConfig("gen-tasks needs --out <file>");
    const BenchConfig cfg = bench_config(o, {"simple"});
    std::vector<EpisodicTask> flat;
    for (auto& group : sample_benchmark_tasks(cfg)) {
        for (auto& t : group) flat.push_back(std::move(t));
    }
    echo_config(cfg.to_json(), o.seed);
    write_tasks(o.out, flat);
    std::fprintf(stderr, "wrote %zu tasks to %s\n", flat.size(), o.out.c_str());
    return 0;
}

void add_world_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--classes", o.classes, "Classes per synthetic world");
    cmd->add_option("--separation", o.separation, "Radius of the class-mean shell");
    cmd->add_option("--scale", o.scale, "Geometric mean of covariance eigenvalues");
    cmd->add_option("--center-offset", o.center_offset, "Distance of the shell centre from the origin");
}

void add_sampler_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--mode", o.mode, "meta-dataset or fixed");
    cmd->add_option("--way", o.way, "Classes per task (fixed mode)");
    cmd->add_option("--shot", o.shot, "Support examples per class (fixed mode)");
    cmd->add_option("--query", o.query, "Query examples per class");
    cmd->add_option("--domains", o.domains, "Number of synthetic domains");
    cmd->add_flag("--adapt", o.adapt, "Re-center features on the pooled task encoding");
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"Few-shot classification heads, refinement and benchmark harness"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", o.seed, "Base seed");
    app.add_option("--dims", o.dims, "Feature dimension");
    app.add_option("--anisotropy", o.anisotropy, "Condition number of class covariances");
    app.add_option("--tasks", o.tasks, "Tasks per domain");
    app.add_option("--out", o.out, "Output path (.json for JSON, otherwise CSV; - for stdout)");
    app.add_option("--method", o.methods, "Method(s): simple, transductive, cot, gmm, gmm-em[:metric]")
        ->delimiter(',');
    app.add_option("--metric", o.metric, "Metric for heads without an explicit one");
    app.add_option("--min-steps", o.min_steps, "Minimum refinement steps");
    app.add_option("--max-steps", o.max_steps, "Maximum refinement steps");
    app.add_option("--beta", o.beta, "Covariance regularizer");

    auto* bench = app.add_subcommand("bench", "Evaluate methods on sampled or stored tasks");
    add_world_flags(bench, o);
    add_sampler_flags(bench, o);
    bench->add_option("--tasks-file", o.tasks_file, "Evaluate tasks from a JSON Lines file");

    auto* recall = app.add_subcommand("recall", "Class recall against support shot");
    add_world_flags(recall, o);
    add_sampler_flags(recall, o);

    auto* active = app.add_subcommand("active", "Active label acquisition sessions");
    add_world_flags(active, o);
    active->add_option("--way", o.way, "Classes per session");
    active->add_option("--sessions", o.sessions, "Paired sessions per strategy");
    active->add_option("--budget", o.budget, "Labels acquired per session");
    active->add_option("--strategy", o.strategies, "random, entropy, variation-ratios")->delimiter(',');
    active->add_option("--head", o.head, "simple or transductive");

    auto* continual = app.add_subcommand("continual", "Continual learning over task streams");
    add_world_flags(continual, o);
    continual->add_option("--sessions", o.sessions, "Seeded streams");
    continual->add_option("--stream-tasks", o.stream_tasks, "Tasks per stream");
    continual->add_option("--classes-per-task", o.classes_per_task, "Classes per stream task");
    continual->add_option("--shot", o.stream_shot, "Support examples per class");
    continual->add_option("--query", o.query, "Query examples per class");
    continual->add_option("--drift", o.drift, "Strength of each task's feature transform");
    continual->add_option("--offset-scale", o.offset_scale, "Offset size relative to drift");
    continual->add_option("--strategy", o.strategies, "moving, first, averaging")->delimiter(',');
    continual->add_option("--head", o.head_modes, "multi-head, single-head")->delimiter(',');
    continual->add_flag("--refine", o.refine, "Refine each task with its query set");

    auto* riemann = app.add_subcommand("riemann", "Energy-gap checks on two-centroid metric fields");
    riemann->add_option("--separation", o.separation, "Radius of the class-mean shell");
    riemann->add_option("--fields", o.fields, "Seeded fields");
    riemann->add_option("--flatness", o.flatness, "Plateau radius as a fraction of the support");
    riemann->add_option("--support-fraction", o.support_fraction,
                        "Support radius as a fraction of the centroid distance");

    auto* gen = app.add_subcommand("gen-tasks", "Sample tasks and write them as JSON Lines");
    add_world_flags(gen, o);
    add_sampler_flags(gen, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        if (e.get_exit_code() == 0) return 0;
        std::cerr << app.help();
        return 2;
    }

    try {
        if (*bench) return run_bench(o);
        if (*recall) return run_recall(o);
        if (*active) return run_active(o);
        if (*continual) return run_continual(o);
        if (*riemann) return run_riemann(o);
        if (*gen) return run_gen_tasks(o);
    } catch (const InvalidConfig& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidPrior& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const NotEnoughClasses& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
