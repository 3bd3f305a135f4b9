#pragma once

#include "fewshot/linalg.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace fewshot {

struct LabeledExample {
    Vector features;
    int label = 0;
};

enum class MetricKind {
    SquaredMahalanobis,
    RootRiemannian,
    SquaredEuclidean,
    AbsoluteL1,
    CosineSimilarity,
    NegativeDotProduct,
};

inline constexpr std::array<MetricKind, 6> kAllMetrics{
    MetricKind::SquaredMahalanobis, MetricKind::RootRiemannian,   MetricKind::SquaredEuclidean,
    MetricKind::AbsoluteL1,         MetricKind::CosineSimilarity, MetricKind::NegativeDotProduct,
};

std::string_view to_string(MetricKind metric);
/// Accepts the names produced by to_string. Throws InvalidConfig otherwise.
MetricKind parse_metric(std::string_view name);

/// Per-class means, regularized covariances and (possibly soft) counts.
/// Immutable; every covariance is factorized once at construction.
class ClassStatistics {
public:
    ClassStatistics(std::vector<Vector> means, std::vector<SymMatrix> covariances,
                    std::vector<double> counts);

    int class_count() const noexcept { return static_cast<int>(means_.size()); }
    Index dims() const noexcept { return means_.front().size(); }

    const Vector& mean(int k) const { return means_.at(k); }
    const SymMatrix& covariance(int k) const { return covariances_.at(k); }
    const CholeskyFactor& factor(int k) const { return factors_.at(k); }
    double count(int k) const { return counts_.at(k); }
    /// Diagonal jitter that had to be added before Q_k factorized (0 normally).
    double jitter(int k) const { return jitters_.at(k); }
    double max_jitter() const noexcept;

    const std::vector<Vector>& means() const noexcept { return means_; }
    const std::vector<double>& counts() const noexcept { return counts_; }

private:
    std::vector<Vector> means_;
    std::vector<SymMatrix> covariances_;
    std::vector<CholeskyFactor> factors_;
    std::vector<double> counts_;
    std::vector<double> jitters_;
};

/// Closed-form class statistics from a labelled support set:
///   mu_k = class mean,
///   Q_k  = lambda_k Sigma_k + (1 - lambda_k) Sigma + beta I,  lambda_k = n_k / (n_k + 1),
/// with Sigma and Sigma_k the 1/n-normalized scatter around the task mean and
/// the class mean. class_count < 0 infers K from the largest label.
ClassStatistics estimate_class_statistics(std::span<const LabeledExample> support,
                                          double beta = 1.0, int class_count = -1);

/// Blends already-normalized scatters into Q = lambda Sigma_k + (1 - lambda) Sigma + beta I.
SymMatrix regularized_covariance(const Matrix& class_scatter, const Matrix& task_scatter,
                                 double count, double beta);

/// Length-K score vector, higher meaning more likely.
Vector class_scores(const Vector& query, const ClassStatistics& stats, MetricKind metric);

struct Prediction {
    Vector probs;
    int label = 0;
};

/// Max-shifted softmax plus argmax with ties going to the lowest index.
Prediction softmax_prediction(const Vector& scores);

Prediction classify(const Vector& query, const ClassStatistics& stats, MetricKind metric);

/// F(z) - F(z') - grad F(z')^T (z - z') for F(z) = z^T Q^{-1} z.
double bregman_divergence(const Vector& z, const Vector& z_ref, const SymMatrix& q);

}  // namespace fewshot
