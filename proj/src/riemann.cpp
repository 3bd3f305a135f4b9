#include "fewshot/riemann.hpp"

#include "fewshot/episodic.hpp"
#include "fewshot/errors.hpp"
#include "fewshot/metric_head.hpp"
#include "fewshot/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace fewshot {

namespace {

double bump(double r, double plateau, double support) {
    if (r <= plateau) return 1.0;
    if (r >= support) return 0.0;
    const double s = (r - plateau) / (support - plateau);
    return 1.0 - s * s * (3.0 - 2.0 * s);
}

}  // namespace

std::vector<double> PartitionOfUnity::weights(const std::vector<Vector>& centroids,
                                              const Vector& x) const {
    const std::size_t K = centroids.size();
    std::vector<double> phi(K), dist(K);
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        dist[k] = (x - centroids[k]).norm();
        phi[k] = bump(dist[k], plateau_radius[k], support_radius[k]);
        total += phi[k];
    }
    const double gap = std::max(0.0, 1.0 - total);
    const double eps = gap * gap * gap;
    std::vector<double> w(K);
    if (eps == 0.0) {
        for (std::size_t k = 0; k < K; ++k) w[k] = phi[k] / total;
        return w;
    }
    // Softmax of -r_k / R_k, shifted for stability.
    std::vector<double> psi(K);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) best = std::max(best, -dist[k] / support_radius[k]);
    double psi_sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        psi[k] = std::exp(-dist[k] / support_radius[k] - best);
        psi_sum += psi[k];
    }
    for (std::size_t k = 0; k < K; ++k) {
        w[k] = (phi[k] + eps * psi[k] / psi_sum) / (total + eps);
    }
    return w;
}

MetricField::MetricField(std::vector<Vector> centroids, std::vector<SymMatrix> covariances,
                         PartitionOfUnity partition)
    : centroids_(std::move(centroids)), partition_(std::move(partition)) {
    const std::size_t K = centroids_.size();
    if (K == 0) throw InvalidConfig("metric field: need at least one centroid");
    if (covariances.size() != K || partition_.plateau_radius.size() != K ||
        partition_.support_radius.size() != K) {
        throw DimensionMismatch("metric field: centroids, metrics and partition differ in size");
    }
    for (std::size_t k = 0; k < K; ++k) {
        if (!(partition_.plateau_radius[k] >= 0.0) ||
            !(partition_.support_radius[k] > partition_.plateau_radius[k])) {
            throw InvalidConfig("metric field: need 0 <= plateau < support radius");
        }
        for (std::size_t j = 0; j < K; ++j) {
            if (j != k && (centroids_[j] - centroids_[k]).norm() <= partition_.support_radius[j]) {
                throw InvalidConfig("metric field: support of centroid " + std::to_string(j) +
                                    " reaches centroid " + std::to_string(k));
            }
        }
        factors_.push_back(cholesky(covariances[k]));
        inverses_.push_back(inverse_spd(factors_.back()));
    }
}

SymMatrix MetricField::metric_at(const Vector& x) const {
    const auto w = weights(x);
    Matrix g = Matrix::Zero(dims(), dims());
    for (int k = 0; k < size(); ++k) {
        if (w[k] != 0.0) g += w[k] * inverses_[k].matrix();
    }
    return SymMatrix(g);
}

double MetricField::quadratic_at(const Vector& x, const Vector& v) const {
    const auto w = weights(x);
    double s = 0.0;
    for (int k = 0; k < size(); ++k) {
        if (w[k] != 0.0) s += w[k] * quad_form(factors_[k], v);
    }
    return s;
}

std::vector<double> MetricField::breakpoints(const Vector& x, const Vector& y) const {
    const Vector v = y - x;
    const double a = v.squaredNorm();
    std::vector<double> out;
    if (a == 0.0) return out;
    for (int k = 0; k < size(); ++k) {
        const Vector r0 = x - centroids_[k];
        const double b = 2.0 * r0.dot(v);
        for (double radius : {partition_.plateau_radius[k], partition_.support_radius[k]}) {
            const double c = r0.squaredNorm() - radius * radius;
            const double disc = b * b - 4.0 * a * c;
            if (disc <= 0.0) continue;
            const double sq = std::sqrt(disc);
            for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
                if (t > 0.0 && t < 1.0) out.push_back(t);
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

GaussLegendre gauss_legendre(int order) {
    if (order < 1) throw InvalidConfig("gauss_legendre: order must be positive");
    static std::mutex mutex;
    static std::map<int, GaussLegendre> cache;
    std::lock_guard lock(mutex);
    if (auto it = cache.find(order); it != cache.end()) return it->second;

    GaussLegendre rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int n = order;
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    cache.emplace(order, rule);
    return rule;
}

namespace {

template <typename F>
double integrate_unit(const std::vector<double>& breaks, int points, F&& f) {
    if (points < 1) throw InvalidConfig("quadrature needs at least one point");
    const int order = std::min(points, 8);
    const int panels = (points + order - 1) / order;
    const GaussLegendre rule = gauss_legendre(order);
    std::vector<double> edges{0.0};
    edges.insert(edges.end(), breaks.begin(), breaks.end());
    edges.push_back(1.0);
    double total = 0.0;
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
        const double h = (edges[s + 1] - edges[s]) / panels;
        for (int p = 0; p < panels; ++p) {
            const double a = edges[s] + p * h;
            for (int q = 0; q < order; ++q) {
                const double t = a + 0.5 * h * (rule.nodes[q] + 1.0);
                total += 0.5 * h * rule.weights[q] * f(t);
            }
        }
    }
    return total;
}

}  // namespace

double path_energy(const MetricField& field, const Vector& x, const Vector& y,
                   int quadrature_points) {
    const Vector v = y - x;
    if (v.squaredNorm() == 0.0) return 0.0;
    return integrate_unit(field.breakpoints(x, y), quadrature_points, [&](double t) {
        return field.quadratic_at(x + t * v, v);
    });
}

double path_arclength(const MetricField& field, const Vector& x, const Vector& y,
                      int quadrature_points) {
    const Vector v = y - x;
    if (v.squaredNorm() == 0.0) return 0.0;
    return integrate_unit(field.breakpoints(x, y), quadrature_points, [&](double t) {
        return std::sqrt(field.quadratic_at(x + t * v, v));
    });
}

EnergyGap energy_gap_check(const MetricField& field, const Vector& x, int i, int j,
                           int quadrature_points) {
    if (i == j) throw InvalidConfig("energy_gap_check: classes must differ");
    const Vector& mu_i = field.centroid(i);
    const Vector& mu_j = field.centroid(j);
    // int_{1/2}^{1} D^T g(l mu + (1 - l) x) D dl equals twice the energy of
    // the straight segment from the midpoint to mu.
    auto centroid_half = [&](const Vector& mu) {
        return 2.0 * path_energy(field, 0.5 * (x + mu), mu, quadrature_points);
    };
    EnergyGap gap{};
    gap.delta_energy = centroid_half(mu_i) - centroid_half(mu_j);
    gap.half_gap =
        0.5 * (quad_form(field.factor(i), x - mu_i) - quad_form(field.factor(j), x - mu_j));
    gap.full_delta_energy = path_energy(field, x, mu_i, quadrature_points) -
                            path_energy(field, x, mu_j, quadrature_points);
    const double diff = std::abs(gap.delta_energy - gap.half_gap);
    if (gap.delta_energy != 0.0) {
        gap.rel_error = diff / std::abs(gap.delta_energy);
    } else {
        gap.rel_error = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return gap;
}

void TwoCentroidFieldConfig::validate() const {
    if (dims < 2 || !(anisotropy >= 1.0) || !(separation > 0.0) || shot < 1 || !(beta > 0.0) ||
        !(support_fraction > 0.0) || !(support_fraction < 1.0) || !(flatness >= 0.0) ||
        !(flatness < 1.0)) {
        throw InvalidConfig("two-centroid field: invalid configuration");
    }
}

MetricField make_two_centroid_field(const TwoCentroidFieldConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    WorldConfig world_cfg;
    world_cfg.dims = cfg.dims;
    world_cfg.class_count = 2;
    world_cfg.anisotropy = cfg.anisotropy;
    world_cfg.separation = cfg.separation;
    world_cfg.seed = derive_seed(seed, 0, 0);
    const ClusterWorld world = make_cluster_world(world_cfg);
    const EpisodicTask task = sample_task(world, SamplerConfig::fixed(2, cfg.shot, 1),
                                          EncodingTransform::identity(cfg.dims), derive_seed(seed, 0, 1));
    const ClassStatistics stats = estimate_class_statistics(task.support, cfg.beta, 2);
    const double distance = (stats.mean(0) - stats.mean(1)).norm();
    if (!(distance > 0.0)) throw InvalidConfig("two-centroid field: coincident centroids");
    const double support = cfg.support_fraction * distance;
    PartitionOfUnity pou{{cfg.flatness * support, cfg.flatness * support}, {support, support}};
    return MetricField({stats.mean(0), stats.mean(1)}, {stats.covariance(0), stats.covariance(1)},
                       std::move(pou));
}

Vector sample_plateau_point(const MetricField& field, int i, std::uint64_t seed) {
    Rng rng(seed);
    const Index d = field.dims();
    const double radius = field.partition().plateau_radius.at(i);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        Vector dir(d);
        for (Index k = 0; k < d; ++k) dir(k) = rng.normal();
        const double n = dir.norm();
        if (n == 0.0) continue;
        const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
        const Vector x = field.centroid(i) + (r / n) * dir;
        bool clear = true;
        for (int k = 0; k < field.size(); ++k) {
            if (k != i && (x - field.centroid(k)).norm() <= field.partition().support_radius[k]) {
                clear = false;
            }
        }
        if (clear) return x;
    }
    throw InvalidConfig("sample_plateau_point: plateau lies entirely inside other supports");
}

}  // namespace fewshot
