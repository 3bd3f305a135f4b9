#pragma once

#include "fewshot/linalg.hpp"

#include <cstdint>
#include <vector>

namespace fewshot {

/// Compactly supported bumps w_k(r): 1 on the plateau |r| <= plateau[k], a C1
/// cubic decay to 0 at support[k], renormalized to sum to one. Where the
/// bumps sum to less than one, inverse-distance softmax weights are blended in
/// with weight (1 - sum)^3 so the metric stays defined and continuous
/// everywhere.
struct PartitionOfUnity {
    std::vector<double> plateau_radius;
    std::vector<double> support_radius;

    std::vector<double> weights(const std::vector<Vector>& centroids, const Vector& x) const;
};

/// g(x) = sum_k w_k(x - mu_k) Q_k^{-1}.
class MetricField {
public:
    /// `covariances` are the Q_k; the local metrics are their inverses. Throws
    /// InvalidConfig if a support reaches another centroid (w_k(0) = 1 would fail).
    MetricField(std::vector<Vector> centroids, std::vector<SymMatrix> covariances,
                PartitionOfUnity partition);

    int size() const noexcept { return static_cast<int>(centroids_.size()); }
    Index dims() const noexcept { return centroids_.front().size(); }
    const Vector& centroid(int k) const { return centroids_.at(k); }
    const CholeskyFactor& factor(int k) const { return factors_.at(k); }
    const PartitionOfUnity& partition() const noexcept { return partition_; }

    std::vector<double> weights(const Vector& x) const { return partition_.weights(centroids_, x); }
    SymMatrix metric_at(const Vector& x) const;
    /// v^T g(x) v without forming g.
    double quadratic_at(const Vector& x, const Vector& v) const;

    /// Sorted path parameters in (0, 1) where the segment x -> y crosses a
    /// plateau or support sphere; the integrand is smooth between them.
    std::vector<double> breakpoints(const Vector& x, const Vector& y) const;

private:
    std::vector<Vector> centroids_;
    std::vector<CholeskyFactor> factors_;
    std::vector<SymMatrix> inverses_;
    PartitionOfUnity partition_;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussLegendre gauss_legendre(int order);

/// Straight-line energy  int_0^1 (y-x)^T g((1-l) x + l y) (y-x) dl.
/// Each smooth piece between breakpoints gets `quadrature_points` nodes:
/// ceil(points / 8) panels of an order-min(points, 8) rule.
double path_energy(const MetricField& field, const Vector& x, const Vector& y,
                   int quadrature_points = 64);

/// Straight-line arclength  int_0^1 sqrt((y-x)^T g(c(l)) (y-x)) dl.
double path_arclength(const MetricField& field, const Vector& x, const Vector& y,
                      int quadrature_points = 64);

struct EnergyGap {
    /// Centroid-side half-path term: int_{1/2}^{1} [D_i^T g_i D_i - D_j^T g_j D_j] dl.
    double delta_energy;
    /// 1/2 [(x - mu_i)^T Q_i^{-1} (x - mu_i) - (x - mu_j)^T Q_j^{-1} (x - mu_j)].
    double half_gap;
    /// |delta_energy - half_gap| / |delta_energy|.
    double rel_error;
    /// Full straight-line energy difference E(x, mu_i) - E(x, mu_j), for reference.
    double full_delta_energy;
};

/// First-order check of the class-score / energy-gap relation. The half of
/// each path nearest the centroid survives the expansion; the half at x is the
/// dropped term, reported separately through full_delta_energy.
EnergyGap energy_gap_check(const MetricField& field, const Vector& x, int i, int j,
                           int quadrature_points = 64);

struct TwoCentroidFieldConfig {
    Index dims = 8;
    /// Condition number of the two true class covariances.
    double anisotropy = 16.0;
    /// Shell radius of the true class means.
    double separation = 3.0;
    /// Support examples per class used to estimate the local metrics.
    int shot = 5;
    double beta = 1.0;
    /// Support radius as a fraction of the centroid distance (< 1).
    double support_fraction = 0.5;
    /// Plateau radius as a fraction of the support radius (< 1).
    double flatness = 0.8;

    void validate() const;
};

/// Centroids and local metrics taken from the class statistics of a sampled
/// two-class support set, so the field interpolates the classifier's own Q_k.
/// Deterministic in seed.
MetricField make_two_centroid_field(const TwoCentroidFieldConfig& cfg, std::uint64_t seed);

/// Uniform point inside centroid i's plateau and outside every other support.
Vector sample_plateau_point(const MetricField& field, int i, std::uint64_t seed);

}  // namespace fewshot
