#pragma once

#include "fewshot/transductive.hpp"

namespace fewshot {

/// Class prior pi_k. Every entry must be strictly positive and the entries
/// must sum to 1 within 1e-9.
class ClassPrior {
public:
    explicit ClassPrior(Vector priors);

    static ClassPrior uniform(int class_count);
    /// pi_k proportional to the (soft) class counts.
    static ClassPrior from_counts(const ClassStatistics& stats);

    int class_count() const noexcept { return static_cast<int>(priors_.size()); }
    const Vector& values() const noexcept { return priors_; }

private:
    Vector priors_;
};

/// log pi_k - 1/2 (z - mu_k)^T Q_k^{-1} (z - mu_k) - 1/2 log|Q_k|.
Vector gmm_log_scores(const Vector& query, const ClassStatistics& stats, const ClassPrior& prior);

Prediction gmm_classify(const Vector& query, const ClassStatistics& stats, const ClassPrior& prior);

/// The refinement loop with the GMM responsibility refresh. The prior stays
/// fixed across iterations.
RefineOutcome gmm_em_refine(std::span<const LabeledExample> support, std::span<const Vector> query,
                            const RefineConfig& cfg, const ClassPrior& prior);

}  // namespace fewshot
