// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "../oracle/brute_force.hpp"

#include "fewshot/active.hpp"
#include "fewshot/bench.hpp"
#include "fewshot/continual.hpp"
#include "fewshot/episodic.hpp"
#include "fewshot/gmm_head.hpp"
#include "fewshot/riemann.hpp"
#include "fewshot/transductive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace fewshot;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Suite-wide numerical invariants, fed by every criterion.
struct Invariants {
    double max_jitter = 0.0;
    double max_prob_error = 0.0;
    std::size_t stats_checked = 0;
    std::size_t probs_checked = 0;

    void stats(const ClassStatistics& s) {
        max_jitter = std::max(max_jitter, s.max_jitter());
        ++stats_checked;
    }
    void probs(const Vector& p) {
        max_prob_error = std::max(max_prob_error, std::abs(p.sum() - 1.0));
        ++probs_checked;
    }
    void rows(const Matrix& m) {
        for (Index r = 0; r < m.rows(); ++r) probs(m.row(r).transpose());
    }
};

Invariants inv;
int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] %2d %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

oracle::Vec ov(const Vector& v) { return oracle::Vec(v.data(), v.data() + v.size()); }

std::vector<oracle::Vec> ovs(const std::vector<LabeledExample>& s) {
    std::vector<oracle::Vec> out;
    for (const auto& ex : s) out.push_back(ov(ex.features));
    return out;
}

std::vector<int> labels(const std::vector<LabeledExample>& s) {
    std::vector<int> out;
    for (const auto& ex : s) out.push_back(ex.label);
    return out;
}

Vector gaussian(Index d, Rng& rng, double scale) {
    Vector v(d);
    for (Index i = 0; i < d; ++i) v(i) = scale * rng.normal();
    return v;
}

/// Class k centred at 1.5 k along a random axis with a random linear stretch.
std::vector<LabeledExample> random_support(int K, Index d, int n, Rng& rng) {
    Matrix a(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) a(i, j) = rng.normal() * (i == j ? 1.0 : 0.3);
    std::vector<LabeledExample> s;
    for (int i = 0; i < n; ++i) {
        const int label = i < K ? i : static_cast<int>(rng.uniform_int(0, K - 1));
        Vector z = a * gaussian(d, rng, 1.0);
        z(0) += 1.5 * label;
        s.push_back({z, label});
    }
    return s;
}

double max_abs_diff(const oracle::Vec& a, const Vector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b(static_cast<Index>(i))));
    return m;
}

double stats_diff(const ClassStatistics& s, const oracle::Stats& o) {
    double m = 0.0;
    for (int k = 0; k < s.class_count(); ++k) {
        m = std::max(m, max_abs_diff(o.means[k], s.mean(k)));
        for (Index a = 0; a < s.dims(); ++a)
            for (Index b = 0; b < s.dims(); ++b) m = std::max(m, std::abs(o.covs[k][a][b] - s.covariance(k)(a, b)));
    }
    return m;
}

// ---------------------------------------------------------------------------

void criterion_1() {
    const auto t0 = Clock::now();
    Rng rng(101);
    double worst_stats = 0.0, worst_probs = 0.0;
    int label_mismatch = 0;
    for (int t = 0; t < 500; ++t) {
        const Index d = 1 + static_cast<Index>(rng.uniform_int(0, 7));
        const int K = 1 + static_cast<int>(rng.uniform_int(0, 4));
        const int n_support = K + static_cast<int>(rng.uniform_int(0, 20 - K));
        const int n_query = static_cast<int>(rng.uniform_int(1, 40 - n_support));
        const auto support = random_support(K, d, n_support, rng);
        const ClassStatistics st = estimate_class_statistics(support, 1.0, K);
        inv.stats(st);
        const oracle::Stats ref = oracle::support_stats(ovs(support), labels(support), K, 1.0);
        worst_stats = std::max(worst_stats, stats_diff(st, ref));
        for (int j = 0; j < n_query; ++j) {
            const Vector q = gaussian(d, rng, 2.0);
            const Prediction p = classify(q, st, MetricKind::SquaredMahalanobis);
            inv.probs(p.probs);
            const oracle::Vec want = oracle::softmax(oracle::scores(ov(q), ref, oracle::Metric::Mahalanobis));
            worst_probs = std::max(worst_probs, max_abs_diff(want, p.probs));
            label_mismatch += p.label != oracle::argmax(want);
        }
    }
    const double secs = seconds_since(t0);
    report(1, "simple-head oracle", worst_stats <= 1e-10 && worst_probs <= 1e-10 && label_mismatch == 0 && secs < 10.0,
           fmt("500 tasks, max stats diff %.2e, max prob diff %.2e, label mismatches %d, %.2f s", worst_stats,
               worst_probs, label_mismatch, secs));
}

void criterion_2() {
    Rng rng(202);
    double worst_trace = 0.0, worst_first = 0.0;
    int iteration_mismatch = 0, empty_mismatch = 0;
    const oracle::Assign assign = [](const oracle::Vec& z, const oracle::Stats& s) {
        return oracle::softmax(oracle::scores(z, s, oracle::Metric::Mahalanobis));
    };
    for (int t = 0; t < 200; ++t) {
        const Index d = 2 + static_cast<Index>(rng.uniform_int(0, 2));
        const int K = 2 + static_cast<int>(rng.uniform_int(0, 1));
        const auto support = random_support(K, d, K + static_cast<int>(rng.uniform_int(0, 5)), rng);
        std::vector<Vector> query;
        std::vector<oracle::Vec> oq;
        const int m = 1 + static_cast<int>(rng.uniform_int(0, 8));
        for (int j = 0; j < m; ++j) {
            query.push_back(gaussian(d, rng, 1.5));
            query.back()(0) += 0.75 * static_cast<double>(K - 1);
            oq.push_back(ov(query.back()));
        }
        RefineConfig cfg;
        cfg.min_steps = 1 + static_cast<int>(rng.uniform_int(0, 2));
        cfg.max_steps = cfg.min_steps + static_cast<int>(rng.uniform_int(0, 7));
        const RefineOutcome out = refine(support, query, cfg, K);
        inv.stats(out.statistics);
        inv.rows(out.responsibilities.query);
        const oracle::RefineTrace ref =
            oracle::refine(ovs(support), labels(support), oq, K, cfg.min_steps, cfg.max_steps, cfg.beta, assign);
        if (out.iterations_run != ref.iterations || out.converged_early != ref.converged) {
            ++iteration_mismatch;
            continue;
        }
        for (std::size_t it = 0; it < ref.query_history.size(); ++it) {
            inv.rows(out.query_history[it]);
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < K; ++k)
                    worst_trace = std::max(worst_trace, std::abs(out.query_history[it](j, k) - ref.query_history[it][j][k]));
        }
        const ClassStatistics simple = estimate_class_statistics(support, cfg.beta, K);
        for (int j = 0; j < m; ++j) {
            const Prediction p = classify(query[j], simple, MetricKind::SquaredMahalanobis);
            worst_first = std::max(worst_first, (out.query_history.front().row(j).transpose() - p.probs).cwiseAbs().maxCoeff());
        }
        const RefineOutcome empty = refine(support, std::vector<Vector>{}, cfg, K);
        for (int k = 0; k < K; ++k) {
            empty_mismatch += empty.statistics.mean(k) != simple.mean(k);
            empty_mismatch += empty.statistics.covariance(k).matrix() != simple.covariance(k).matrix();
        }
    }
    report(2, "refinement oracle",
           worst_trace <= 1e-10 && worst_first <= 1e-12 && iteration_mismatch == 0 && empty_mismatch == 0,
           fmt("200 tasks, max trace diff %.2e, iteration-1 diff %.2e, iteration-count mismatches %d, "
               "empty-query mismatches %d",
               worst_trace, worst_first, iteration_mismatch, empty_mismatch));
}

/// Anisotropic world shared by criteria 3 and 5.
BenchConfig metric_world() {
    BenchConfig cfg;
    WorldConfig w;
    w.dims = 8;
    w.anisotropy = 32.0;
    w.separation = 0.75;
    w.scale = 0.1;
    w.center_offset = 6.0;
    w.class_count = 64;
    w.seed = 11;
    cfg.domains = {w};
    cfg.tasks = 1000;
    cfg.seed = 0;
    cfg.methods.clear();
    for (const char* m : {"simple", "simple:euclidean", "simple:cosine", "simple:dot", "gmm", "transductive", "gmm-em"})
        cfg.methods.push_back(parse_method(m));
    return cfg;
}

/// Criterion 5 reuses the criterion 3 report; its line is printed after 4.
std::function<void()> pending_5;

void criteria_3_and_5() {
    const BenchConfig cfg = metric_world();
    const auto t0 = Clock::now();
    const BenchmarkReport r = run_benchmark(cfg);
    const double secs = seconds_since(t0);
    auto acc = [&](const char* m) { return r.summary("synthetic", m).accuracy; };
    const auto maha = acc("simple"), eu = acc("simple:euclidean"), cos = acc("simple:cosine"), dot = acc("simple:dot");
    const bool c3 = maha.mean - eu.mean >= 0.02 && separated(maha, eu) && eu.mean >= cos.mean && cos.mean >= dot.mean &&
                    secs < 120.0;
    report(3, "metric ordering", c3,
           fmt("mahalanobis %.4f±%.4f, euclidean %.4f±%.4f, cosine %.4f, dot %.4f, gap %.4f, %.1f s for 7 methods",
               maha.mean, maha.half_width, eu.mean, eu.half_width, cos.mean, dot.mean, maha.mean - eu.mean, secs));

    const auto gmm = acc("gmm"), trans = acc("transductive"), em = acc("gmm-em");
    const bool c5 = gmm.mean < maha.mean && separated(gmm, maha) && em.mean < trans.mean && separated(em, trans);
    pending_5 = [=] {
        report(5, "gmm degradation", c5,
               fmt("gmm %.4f±%.4f vs simple %.4f±%.4f; gmm-em %.4f±%.4f vs transductive %.4f±%.4f", gmm.mean,
                   gmm.half_width, maha.mean, maha.half_width, em.mean, em.half_width, trans.mean, trans.half_width));
    };
}

void criterion_5() {
    if (!pending_5) throw std::runtime_error("criterion 5 needs the criterion 3 benchmark");
    pending_5();
}

void criterion_4() {
    Rng rng(404);
    int disagree = 0;
    for (int t = 0; t < 10000; ++t) {
        const Index d = 1 + static_cast<Index>(rng.uniform_int(0, 7));
        const int K = 2 + static_cast<int>(rng.uniform_int(0, 8));
        const auto support = random_support(K, d, K + static_cast<int>(rng.uniform_int(0, 3 * K)), rng);
        const ClassStatistics st = estimate_class_statistics(support, 1.0, K);
        inv.stats(st);
        const Vector q = gaussian(d, rng, 2.0);
        const Prediction a = classify(q, st, MetricKind::SquaredMahalanobis);
        const Prediction b = classify(q, st, MetricKind::RootRiemannian);
        inv.probs(a.probs);
        inv.probs(b.probs);
        disagree += a.label != b.label;
    }
    report(4, "root-riemannian decisions", disagree == 0, fmt("10000 pairs, %d argmax disagreements", disagree));
}

void criterion_6() {
    BenchConfig cfg;
    WorldConfig w;
    w.dims = 8;
    w.anisotropy = 16.0;
    w.separation = 3.0;
    w.class_count = 64;
    w.seed = 11;
    cfg.domains = {w};
    cfg.tasks = 2000;
    cfg.methods = {parse_method("simple"), parse_method("transductive")};
    const RecallStudy st = recall_vs_shot(cfg);
    const auto low = st.gap("transductive", "simple", 1, 1);
    const auto high = st.gap("transductive", "simple", 25, std::numeric_limits<int>::max());
    const auto& simple_1 = st.curves[0].buckets.front();
    const auto& trans_1 = st.curves[1].buckets.front();
    const bool pass = simple_1.lo == 1 && trans_1.lo == 1 && low.mean > 0.0 && separated(trans_1.recall, simple_1.recall) &&
                      low.lower() > 0.0 && high.mean < low.mean;
    report(6, "low-shot transductive gain", pass,
           fmt("2000 tasks, 1-shot recall simple %.4f±%.4f transductive %.4f±%.4f (gap %+.4f±%.4f, %zu classes), "
               ">=25-shot gap %+.4f±%.4f",
               simple_1.recall.mean, simple_1.recall.half_width, trans_1.recall.mean, trans_1.recall.half_width,
               low.mean, low.half_width, simple_1.classes, high.mean, high.half_width));
}

void criterion_7() {
    WorldConfig w;
    w.dims = 8;
    w.anisotropy = 16.0;
    w.separation = 3.0;
    w.class_count = 64;
    w.seed = 5;
    const ClusterWorld world = make_cluster_world(w);
    const int sessions = 500;
    std::vector<ConfidenceInterval> finals;
    for (auto s : {AcquisitionStrategy::Random, AcquisitionStrategy::PredictiveEntropy,
                   AcquisitionStrategy::VariationRatios}) {
        std::vector<double> fin;
        for (int i = 0; i < sessions; ++i) {
            const ActiveSession sess = make_active_session(world, ActiveWorldConfig{}, 20, s, derive_seed(3, 0, i));
            fin.push_back(run_active_session(sess, ActiveHead{}).curve.back());
        }
        finals.push_back(mean_ci95(fin));
    }
    int differing = 0;
    for (int i = 0; i < 200; ++i) {
        for (bool trans : {false, true}) {
            ActiveHead head;
            head.transductive = trans;
            const ActiveSession a = make_active_session(world, ActiveWorldConfig{2, 1, 20, 20}, 20,
                                                        AcquisitionStrategy::PredictiveEntropy, derive_seed(4, 0, i));
            ActiveSession b = a;
            b.strategy = AcquisitionStrategy::VariationRatios;
            differing += run_active_session(a, head).acquired_order != run_active_session(b, head).acquired_order;
        }
    }
    const bool pass = finals[1].mean > finals[0].mean && separated(finals[1], finals[0]) &&
                      finals[2].mean > finals[0].mean && separated(finals[2], finals[0]) && differing == 0;
    report(7, "active learning", pass,
           fmt("%d sessions, final accuracy random %.4f±%.4f, entropy %.4f±%.4f, variation ratios %.4f±%.4f; "
               "two-class sequence mismatches %d/400",
               sessions, finals[0].mean, finals[0].half_width, finals[1].mean, finals[1].half_width, finals[2].mean,
               finals[2].half_width, differing));
}

void criterion_8() {
    const int streams = 100;
    StreamConfig base;
    struct Cell {
        std::vector<double> final_avg, task1_first, task1_last;
    };
    Cell cells[2][3];
    const EncodingStrategy strategies[3] = {EncodingStrategy::Moving, EncodingStrategy::First, EncodingStrategy::Averaging};
    const HeadMode heads[2] = {HeadMode::SingleHead, HeadMode::MultiHead};
    for (int i = 0; i < streams; ++i) {
        WorldConfig w;
        w.dims = 8;
        w.anisotropy = 16.0;
        w.separation = 3.0;
        w.class_count = 10;
        w.seed = derive_seed(9, 0, i);
        const ClusterWorld world = make_cluster_world(w);
        StreamConfig cfg = base;
        cfg.seed = derive_seed(9, 1, i);
        for (int h = 0; h < 2; ++h)
            for (int s = 0; s < 3; ++s) {
                const ContinualResult r = run_continual_session(world, cfg, strategies[s], heads[h]);
                inv.max_jitter = std::max(inv.max_jitter, r.max_jitter);
                ++inv.stats_checked;
                const Index T = r.accuracy.rows();
                cells[h][s].final_avg.push_back(r.accuracy.row(T - 1).mean());
                cells[h][s].task1_first.push_back(r.accuracy(0, 0));
                cells[h][s].task1_last.push_back(r.accuracy(T - 1, 0));
            }
    }
    auto ci = [](const std::vector<double>& v) { return mean_ci95(v); };
    const auto moving = ci(cells[0][0].final_avg), first = ci(cells[0][1].final_avg), avg = ci(cells[0][2].final_avg);
    const double t1_start = ci(cells[0][0].task1_first).mean, t1_end = ci(cells[0][0].task1_last).mean;
    bool multi_ok = true;
    std::string multi;
    for (int s = 0; s < 3; ++s) {
        const double m = ci(cells[1][s].final_avg).mean, sgl = ci(cells[0][s].final_avg).mean;
        multi_ok = multi_ok && m >= sgl;
        multi += fmt(" %s %.4f/%.4f", std::string(to_string(strategies[s])).c_str(), m, sgl);
    }
    const bool pass = first.mean > moving.mean && separated(first, moving) && t1_end < t1_start && multi_ok;
    report(8, "continual forgetting", pass,
           fmt("%d streams, single-head final-row accuracy moving %.4f±%.4f, first %.4f±%.4f, averaging %.4f; "
               "task 1 under moving %.4f -> %.4f; multi/single:%s",
               streams, moving.mean, moving.half_width, first.mean, first.half_width, avg.mean, t1_start, t1_end,
               multi.c_str()));
}

void criterion_9() {
    Rng rng(909);
    double worst_const = 0.0;
    for (int t = 0; t < 200; ++t) {
        const Index d = 2 + static_cast<Index>(rng.uniform_int(0, 6));
        Matrix a(d, d);
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) a(i, j) = rng.normal();
        const SymMatrix q(a * a.transpose() + Matrix::Identity(d, d));
        Vector far = Vector::Zero(d);
        far(0) = 10.0;
        const MetricField field({Vector::Zero(d), far}, {q, q}, PartitionOfUnity{{1.0, 1.0}, {3.0, 3.0}});
        const Vector x = gaussian(d, rng, 3.0), y = gaussian(d, rng, 3.0);
        const double want = quad_form(cholesky(q), y - x);
        worst_const = std::max(worst_const, std::abs(path_energy(field, x, y) - want) / want);
    }

    int good = 0;
    double worst_gap = 0.0;
    for (int f = 0; f < 100; ++f) {
        const MetricField field = make_two_centroid_field(TwoCentroidFieldConfig{}, derive_seed(1, 0, f));
        const Vector x = sample_plateau_point(field, 0, derive_seed(1, 1, f));
        const EnergyGap g = energy_gap_check(field, x, 0, 1);
        good += g.rel_error < 0.05;
        worst_gap = std::max(worst_gap, g.rel_error);
    }

    int violations = 0;
    const MetricField field = make_two_centroid_field(TwoCentroidFieldConfig{}, 77);
    for (int t = 0; t < 1000; ++t) {
        const Vector x = gaussian(8, rng, 2.0), y = gaussian(8, rng, 2.0);
        const double l = path_arclength(field, x, y);
        violations += l * l > path_energy(field, x, y) * (1.0 + 1e-12);
    }
    report(9, "riemannian approximation", worst_const <= 1e-8 && good >= 90 && violations == 0,
           fmt("constant-field max rel diff %.2e; %d/100 plateau points under 5%% (worst %.3f); "
               "arclength^2 > energy in %d/1000 pairs",
               worst_const, good, worst_gap, violations));
}

/// Regularized upper incomplete gamma Q(a, x) by series or continued fraction.
double gamma_q(double a, double x) {
    if (x <= 0.0) return 1.0;
    const double log_front = -x + a * std::log(x) - std::lgamma(a);
    if (x < a + 1.0) {
        double sum = 1.0 / a, term = sum;
        for (int n = 1; n < 1000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(log_front);
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    return std::exp(log_front) * h;
}

void criterion_10() {
    const ClusterWorld world = make_cluster_world(8, 64, 16.0, 10);
    const SamplerConfig cfg;
    std::vector<int> hist(46, 0);
    std::size_t max_support = 0;
    int bad_class = 0, out_of_range = 0;
    for (int t = 0; t < 10000; ++t) {
        const EpisodicTask task = sample_task(world, cfg, EncodingTransform::identity(8), derive_seed(10, 0, t));
        if (task.way < 5 || task.way > 50) {
            ++out_of_range;
        } else {
            ++hist[task.way - 5];
        }
        max_support = std::max(max_support, task.support.size());
        std::vector<int> sup(task.way, 0), qry(task.way, 0);
        for (const auto& ex : task.support) ++sup[ex.label];
        for (const auto& ex : task.query) ++qry[ex.label];
        for (int k = 0; k < task.way; ++k) bad_class += sup[k] < 1 || qry[k] != 10;
    }
    const double expected = 10000.0 / 46.0;
    double chi2 = 0.0;
    for (int c : hist) chi2 += (c - expected) * (c - expected) / expected;
    const double p = gamma_q(45.0 / 2.0, chi2 / 2.0);
    report(10, "sampler conformance", p > 0.01 && max_support <= 500 && bad_class == 0 && out_of_range == 0,
           fmt("10000 tasks, way chi-square %.2f on 45 dof (p = %.3f), max support %zu, bad classes %d, "
               "ways out of range %d",
               chi2, p, max_support, bad_class, out_of_range));
}

std::string report_csv(const BenchConfig& cfg) {
    std::ostringstream out;
    write_report_csv(out, run_benchmark(cfg));
    return out.str();
}

void criterion_11() {
    // Statistics of every head on the benchmark tasks of criteria 3 and 6.
    BenchConfig a = metric_world();
    a.tasks = 300;
    BenchConfig b = a;
    b.domains[0].anisotropy = 16.0;
    b.domains[0].separation = 3.0;
    b.domains[0].scale = 1.0;
    b.domains[0].center_offset = 0.0;
    for (const BenchConfig* cfg : {&a, &b}) {
        const auto tasks = sample_benchmark_tasks(*cfg);
        for (const auto& task : tasks.front()) {
            const auto query = task.query_features();
            const ClassStatistics simple = estimate_class_statistics(task.support, 1.0, task.way);
            inv.stats(simple);
            for (const auto& q : query) {
                inv.probs(classify(q, simple, MetricKind::SquaredMahalanobis).probs);
                inv.probs(gmm_classify(q, simple, ClassPrior::uniform(task.way)).probs);
            }
            const RefineOutcome t = refine(task.support, query, RefineConfig{}, task.way);
            inv.stats(t.statistics);
            inv.rows(t.responsibilities.query);
            const RefineOutcome e = gmm_em_refine(task.support, query, RefineConfig{}, ClassPrior::uniform(task.way));
            inv.stats(e.statistics);
            inv.rows(e.responsibilities.query);
        }
    }

    BenchConfig small = metric_world();
    small.tasks = 100;
    small.seed = 7;
    small.methods = default_methods();
    const bool bench_same = report_csv(small) == report_csv(small);

    BenchConfig recall_cfg = b;
    recall_cfg.tasks = 100;
    recall_cfg.methods = {parse_method("simple"), parse_method("transductive")};
    std::ostringstream r1, r2;
    write_recall_csv(r1, recall_vs_shot(recall_cfg), recall_cfg.to_json());
    write_recall_csv(r2, recall_vs_shot(recall_cfg), recall_cfg.to_json());

    const bool pass = inv.max_jitter == 0.0 && inv.max_prob_error <= 1e-9 && bench_same && r1.str() == r2.str();
    report(11, "numerical invariants", pass,
           fmt("%zu statistics sets, max jitter %g; %zu probability vectors, max |sum - 1| %.2e; "
               "benchmark CSV identical %s, recall CSV identical %s",
               inv.stats_checked, inv.max_jitter, inv.probs_checked, inv.max_prob_error, bench_same ? "yes" : "no",
               r1.str() == r2.str() ? "yes" : "no"));
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    const std::vector<std::function<void()>> steps{criterion_1, criterion_2,  criteria_3_and_5, criterion_4,
                                                   criterion_5, criterion_6,  criterion_7,      criterion_8,
                                                   criterion_9, criterion_10, criterion_11};
    for (const auto& step : steps) {
        try {
            step();
        } catch (const std::exception& e) {
            std::printf("[FAIL] criterion raised: %s\n", e.what());
            ++failures;
        }
    }
    std::printf("%d failing, %.1f s total\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
