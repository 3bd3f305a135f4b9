#include "fewshot/metric_head.hpp"

#include "fewshot/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fewshot {

std::string_view to_string(MetricKind metric) {
    switch (metric) {
        case MetricKind::SquaredMahalanobis: return "mahalanobis";
        case MetricKind::RootRiemannian: return "root-riemannian";
        case MetricKind::SquaredEuclidean: return "euclidean";
        case MetricKind::AbsoluteL1: return "l1";
        case MetricKind::CosineSimilarity: return "cosine";
        case MetricKind::NegativeDotProduct: return "dot";
    }
    return "unknown";
}

MetricKind parse_metric(std::string_view name) {
    for (MetricKind m : kAllMetrics) {
        if (to_string(m) == name) return m;
    }
    throw InvalidConfig("unknown metric '" + std::string(name) + "'");
}

ClassStatistics::ClassStatistics(std::vector<Vector> means, std::vector<SymMatrix> covariances,
                                 std::vector<double> counts)
    : means_(std::move(means)), covariances_(std::move(covariances)), counts_(std::move(counts)) {
    if (means_.empty()) throw InvalidConfig("ClassStatistics: need at least one class");
    if (covariances_.size() != means_.size() || counts_.size() != means_.size()) {
        throw DimensionMismatch("ClassStatistics: means, covariances and counts differ in length");
    }
    const Index d = means_.front().size();
    factors_.reserve(means_.size());
    jitters_.reserve(means_.size());
    for (std::size_t k = 0; k < means_.size(); ++k) {
        if (means_[k].size() != d || covariances_[k].dim() != d) {
            throw DimensionMismatch("ClassStatistics: class " + std::to_string(k) +
                                    " has inconsistent dimension");
        }
        if (!(counts_[k] > 0.0)) throw EmptyClass(static_cast<int>(k));
        RepairedMatrix r = ensure_pd(covariances_[k]);
        covariances_[k] = std::move(r.matrix);
        factors_.push_back(std::move(r.factor));
        jitters_.push_back(r.jitter);
    }
}

double ClassStatistics::max_jitter() const noexcept {
    return *std::max_element(jitters_.begin(), jitters_.end());
}

SymMatrix regularized_covariance(const Matrix& class_scatter, const Matrix& task_scatter,
                                 double count, double beta) {
    const double lambda = count / (count + 1.0);
    Matrix q = lambda * class_scatter + (1.0 - lambda) * task_scatter;
    q.diagonal().array() += beta;
    return SymMatrix(q);
}

ClassStatistics estimate_class_statistics(std::span<const LabeledExample> support, double beta,
                                          int class_count) {
    if (support.empty()) throw InvalidConfig("estimate_class_statistics: empty support set");
    if (beta < 0.0) throw InvalidConfig("estimate_class_statistics: beta must be nonnegative");
    const Index d = support.front().features.size();
    int k_max = -1;
    for (const auto& ex : support) {
        if (ex.features.size() != d) {
            throw DimensionMismatch("estimate_class_statistics: mixed feature dimensions");
        }
        if (ex.label < 0) throw InvalidConfig("estimate_class_statistics: negative label");
        k_max = std::max(k_max, ex.label);
    }
    const int K = class_count < 0 ? k_max + 1 : class_count;
    if (k_max >= K) throw InvalidConfig("estimate_class_statistics: label exceeds class count");

    std::vector<double> counts(K, 0.0);
    std::vector<Vector> sums(K, Vector::Zero(d));
    Vector task_sum = Vector::Zero(d);
    for (const auto& ex : support) {
        counts[ex.label] += 1.0;
        sums[ex.label] += ex.features;
        task_sum += ex.features;
    }
    for (int k = 0; k < K; ++k) {
        if (counts[k] == 0.0) throw EmptyClass(k);
    }
    const double n = static_cast<double>(support.size());
    const Vector task_mean = task_sum / n;

    std::vector<Vector> means(K);
    for (int k = 0; k < K; ++k) means[k] = sums[k] / counts[k];

    Matrix task_scatter = Matrix::Zero(d, d);
    std::vector<Matrix> class_scatter(K, Matrix::Zero(d, d));
    for (const auto& ex : support) {
        const Vector dt = ex.features - task_mean;
        task_scatter.noalias() += dt * dt.transpose();
        const Vector dk = ex.features - means[ex.label];
        class_scatter[ex.label].noalias() += dk * dk.transpose();
    }
    task_scatter /= n;

    std::vector<SymMatrix> covs;
    covs.reserve(K);
    for (int k = 0; k < K; ++k) {
        class_scatter[k] /= counts[k];
        covs.push_back(regularized_covariance(class_scatter[k], task_scatter, counts[k], beta));
    }
    return ClassStatistics(std::move(means), std::move(covs), std::move(counts));
}

Vector class_scores(const Vector& query, const ClassStatistics& stats, MetricKind metric) {
    if (query.size() != stats.dims()) {
        throw DimensionMismatch("class_scores: query has dim " + std::to_string(query.size()) +
                                ", statistics have dim " + std::to_string(stats.dims()));
    }
    const int K = stats.class_count();
    Vector scores(K);
    for (int k = 0; k < K; ++k) {
        const Vector& mu = stats.mean(k);
        switch (metric) {
            case MetricKind::SquaredMahalanobis:
                scores(k) = -quad_form(stats.factor(k), query - mu);
                break;
            case MetricKind::RootRiemannian:
                scores(k) = -std::sqrt(quad_form(stats.factor(k), query - mu));
                break;
            case MetricKind::SquaredEuclidean:
                scores(k) = -(query - mu).squaredNorm();
                break;
            case MetricKind::AbsoluteL1:
                scores(k) = -(query - mu).lpNorm<1>();
                break;
            case MetricKind::CosineSimilarity: {
                const double denom = query.norm() * mu.norm();
                scores(k) = denom > 0.0 ? query.dot(mu) / denom : 0.0;
                break;
            }
            case MetricKind::NegativeDotProduct:
                scores(k) = query.dot(mu);
                break;
        }
    }
    return scores;
}

Prediction softmax_prediction(const Vector& scores) {
    Prediction p;
    Index best = 0;
    for (Index k = 1; k < scores.size(); ++k) {
        if (scores(k) > scores(best)) best = k;
    }
    p.label = static_cast<int>(best);
    p.probs = (scores.array() - scores(best)).exp().matrix();
    p.probs /= p.probs.sum();
    return p;
}

Prediction classify(const Vector& query, const ClassStatistics& stats, MetricKind metric) {
    return softmax_prediction(class_scores(query, stats, metric));
}

double bregman_divergence(const Vector& z, const Vector& z_ref, const SymMatrix& q) {
    if (z.size() != q.dim() || z_ref.size() != q.dim()) {
        throw DimensionMismatch("bregman_divergence: vector and matrix dimensions differ");
    }
    const CholeskyFactor f = cholesky(q);
    const double f_z = quad_form(f, z);
    const double f_ref = quad_form(f, z_ref);
    const Vector grad_ref = 2.0 * solve_spd(f, z_ref);
    return std::max(0.0, f_z - f_ref - grad_ref.dot(z - z_ref));
}

}  // namespace fewshot
