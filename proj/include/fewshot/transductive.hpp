#pragma once

#include "fewshot/metric_head.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace fewshot {

/// Soft class-membership weights: support rows (n x K) are one-hot labels,
/// query rows (m x K) are predicted probabilities (all zero before the first
/// refresh).
struct ResponsibilityMatrix {
    Matrix support;
    Matrix query;

    int class_count() const noexcept { return static_cast<int>(support.cols()); }
};

struct RefineConfig {
    int min_steps = 2;
    int max_steps = 4;
    double beta = 1.0;
    MetricKind metric = MetricKind::SquaredMahalanobis;

    void validate() const;

    /// Min 2 / max 4: the variable way/shot setting.
    static RefineConfig variable_way_shot();
    /// Min 2 / max 10: fixed way/shot worlds.
    static RefineConfig fixed_way_shot();
    /// A single support-only estimate, i.e. no refinement at all.
    static RefineConfig single_estimate();
};

struct RefineOutcome {
    ClassStatistics statistics;
    ResponsibilityMatrix responsibilities;
    int iterations_run = 0;
    bool converged_early = false;
    /// Query responsibilities after each iteration, in order.
    std::vector<Matrix> query_history;
};

struct SetEncodings {
    Vector support_encoding;
    Vector query_encoding;
};

/// Class-balanced mean of support codes and plain mean of query codes.
/// Codes are accumulated in sorted order, so any permutation of the inputs
/// gives bit-identical encodings.
SetEncodings pool_set_encodings(std::span<const LabeledExample> support_codes,
                                std::span<const Vector> query_codes);

ResponsibilityMatrix init_responsibilities(std::span<const int> support_labels, Index query_count,
                                           int class_count);

/// Weighted means and regularized covariances over support-then-query
/// features. Reduces to estimate_class_statistics (bit for bit) when every
/// query row is zero.
ClassStatistics weighted_class_statistics(std::span<const Vector> all_features,
                                          const ResponsibilityMatrix& w, double beta);

/// Maps a query vector to class probabilities under the current statistics.
using AssignmentRule = std::function<Prediction(const Vector&, const ClassStatistics&)>;

/// The soft k-means loop with a pluggable responsibility refresh. Runs at
/// least min_steps and at most max_steps iterations, stopping once the
/// per-query argmax labels repeat.
RefineOutcome refine_with_assignment(std::span<const LabeledExample> support,
                                     std::span<const Vector> query, int min_steps,
                                     int max_steps, double beta, const AssignmentRule& assign,
                                     int class_count = -1);

RefineOutcome refine(std::span<const LabeledExample> support, std::span<const Vector> query,
                     const RefineConfig& cfg, int class_count = -1);

}  // namespace fewshot
