#include "fewshot/gmm_head.hpp"

#include "fewshot/errors.hpp"

#include <cmath>
#include <string>

namespace fewshot {

ClassPrior::ClassPrior(Vector priors) : priors_(std::move(priors)) {
    if (priors_.size() < 1) throw InvalidPrior("class prior is empty");
    for (Index k = 0; k < priors_.size(); ++k) {
        if (!(priors_(k) > 0.0) || !std::isfinite(priors_(k))) {
            throw InvalidPrior("class prior entry " + std::to_string(k) +
                               " must be strictly positive");
        }
    }
    if (std::abs(priors_.sum() - 1.0) > 1e-9) {
        throw InvalidPrior("class prior sums to " + std::to_string(priors_.sum()));
    }
}

ClassPrior ClassPrior::uniform(int class_count) {
    if (class_count < 1) throw InvalidPrior("uniform prior needs at least one class");
    return ClassPrior(Vector::Constant(class_count, 1.0 / class_count));
}

ClassPrior ClassPrior::from_counts(const ClassStatistics& stats) {
    Vector p = Eigen::Map<const Vector>(stats.counts().data(), stats.class_count());
    return ClassPrior(p / p.sum());
}

Vector gmm_log_scores(const Vector& query, const ClassStatistics& stats, const ClassPrior& prior) {
    if (prior.class_count() != stats.class_count()) {
        throw DimensionMismatch("gmm_log_scores: prior has " + std::to_string(prior.class_count()) +
                                " classes, statistics have " +
                                std::to_string(stats.class_count()));
    }
    if (query.size() != stats.dims()) {
        throw DimensionMismatch("gmm_log_scores: query dimension mismatch");
    }
    Vector scores(stats.class_count());
    for (int k = 0; k < stats.class_count(); ++k) {
        const CholeskyFactor& f = stats.factor(k);
        scores(k) = std::log(prior.values()(k)) - 0.5 * quad_form(f, query - stats.mean(k)) -
                    0.5 * logdet(f);
    }
    return scores;
}

Prediction gmm_classify(const Vector& query, const ClassStatistics& stats, const ClassPrior& prior) {
    return softmax_prediction(gmm_log_scores(query, stats, prior));
}

RefineOutcome gmm_em_refine(std::span<const LabeledExample> support, std::span<const Vector> query,
                            const RefineConfig& cfg, const ClassPrior& prior) {
    cfg.validate();
    return refine_with_assignment(
        support, query, cfg.min_steps, cfg.max_steps, cfg.beta,
        [&prior](const Vector& z, const ClassStatistics& s) { return gmm_classify(z, s, prior); },
        prior.class_count());
}

}  // namespace fewshot
