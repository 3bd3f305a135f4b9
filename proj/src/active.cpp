#include "fewshot/active.hpp"

#include "fewshot/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

namespace fewshot {

std::string_view to_string(AcquisitionStrategy s) {
    switch (s) {
        case AcquisitionStrategy::Random: return "random";
        case AcquisitionStrategy::PredictiveEntropy: return "entropy";
        case AcquisitionStrategy::VariationRatios: return "variation-ratios";
    }
    return "unknown";
}

AcquisitionStrategy parse_strategy(std::string_view name) {
    for (auto s : {AcquisitionStrategy::Random, AcquisitionStrategy::PredictiveEntropy,
                   AcquisitionStrategy::VariationRatios}) {
        if (to_string(s) == name) return s;
    }
    throw InvalidConfig("unknown acquisition strategy '" + std::string(name) + "'");
}

Vector acquisition_scores(std::span<const Vector> pool_probs, AcquisitionStrategy strategy) {
    if (strategy == AcquisitionStrategy::Random) throw StrategyHasNoScore();
    Vector scores(static_cast<Index>(pool_probs.size()));
    for (std::size_t i = 0; i < pool_probs.size(); ++i) {
        const Vector& p = pool_probs[i];
        double s = 0.0;
        if (strategy == AcquisitionStrategy::PredictiveEntropy) {
            for (Index k = 0; k < p.size(); ++k) {
                if (p(k) > 0.0) s -= p(k) * std::log(p(k));
            }
        } else {
            Index best = 0;
            for (Index k = 1; k < p.size(); ++k) {
                if (p(k) > p(best)) best = k;
            }
            for (Index k = 0; k < p.size(); ++k) {
                if (k != best) s += p(k);
            }
        }
        scores(static_cast<Index>(i)) = s;
    }
    return scores;
}

std::size_t select_next(std::span<const Vector> pool_probs, const std::vector<bool>& acquired,
                        AcquisitionStrategy strategy, Rng& rng) {
    if (acquired.size() != pool_probs.size()) {
        throw DimensionMismatch("select_next: acquired mask and pool differ in length");
    }
    const auto remaining =
        static_cast<std::size_t>(std::count(acquired.begin(), acquired.end(), false));
    if (remaining == 0) throw PoolExhausted();

    if (strategy == AcquisitionStrategy::Random) {
        auto pick = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(remaining) - 1));
        for (std::size_t i = 0; i < acquired.size(); ++i) {
            if (acquired[i]) continue;
            if (pick-- == 0) return i;
        }
    }
    const Vector scores = acquisition_scores(pool_probs, strategy);
    std::size_t best = acquired.size();
    for (std::size_t i = 0; i < acquired.size(); ++i) {
        if (acquired[i]) continue;
        if (best == acquired.size() || scores(static_cast<Index>(i)) > scores(static_cast<Index>(best))) {
            best = i;
        }
    }
    return best;
}

namespace {

struct Fit {
    std::optional<ClassStatistics> stats;
    std::vector<Vector> pool_probs;
};

Fit fit_head(const std::vector<LabeledExample>& labelled, const ActiveSession& session,
             const std::vector<bool>& acquired, const ActiveHead& head, int K) {
    Fit fit;
    fit.pool_probs.assign(session.pool.size(), Vector::Zero(K));
    if (head.transductive) {
        std::vector<Vector> unlabelled;
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < session.pool.size(); ++i) {
            if (acquired[i]) continue;
            unlabelled.push_back(session.pool[i].features);
            rows.push_back(i);
        }
        RefineOutcome out = refine(labelled, unlabelled, head.refine, K);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            fit.pool_probs[rows[r]] = out.responsibilities.query.row(static_cast<Index>(r)).transpose();
        }
        fit.stats.emplace(std::move(out.statistics));
    } else {
        fit.stats.emplace(estimate_class_statistics(labelled, head.refine.beta, K));
        for (std::size_t i = 0; i < session.pool.size(); ++i) {
            if (acquired[i]) continue;
            fit.pool_probs[i] = classify(session.pool[i].features, *fit.stats, head.refine.metric).probs;
        }
    }
    return fit;
}

double test_accuracy(const ActiveSession& session, const ClassStatistics& stats, MetricKind metric) {
    if (session.test.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& ex : session.test) {
        if (classify(ex.features, stats, metric).label == ex.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(session.test.size());
}

}  // namespace

ActiveResult run_active_session(const ActiveSession& session, const ActiveHead& head) {
    head.refine.validate();
    if (session.seed_support.empty()) throw InvalidConfig("active session: empty seed support");
    if (session.budget < 0) throw InvalidConfig("active session: negative budget");
    if (static_cast<std::size_t>(session.budget) > session.pool.size()) throw PoolExhausted();
    int K = 0;
    for (const auto& ex : session.seed_support) K = std::max(K, ex.label + 1);

    Rng rng(session.seed);
    std::vector<LabeledExample> labelled = session.seed_support;
    std::vector<bool> acquired(session.pool.size(), false);
    ActiveResult result;
    Fit fit = fit_head(labelled, session, acquired, head, K);
    result.curve.push_back(test_accuracy(session, *fit.stats, head.refine.metric));
    for (int t = 1; t <= session.budget; ++t) {
        const std::size_t idx = select_next(fit.pool_probs, acquired, session.strategy, rng);
        acquired[idx] = true;
        labelled.push_back(session.pool[idx]);
        result.acquired_order.push_back(idx);
        fit = fit_head(labelled, session, acquired, head, K);
        result.curve.push_back(test_accuracy(session, *fit.stats, head.refine.metric));
    }
    return result;
}

ActiveSession make_active_session(const ClusterWorld& world, const ActiveWorldConfig& cfg,
                                  int budget, AcquisitionStrategy strategy, std::uint64_t seed) {
    if (cfg.way > world.class_count()) throw NotEnoughClasses(cfg.way, world.class_count());
    if (cfg.way < 1 || cfg.seed_per_class < 1) {
        throw InvalidConfig("active session: way and seed_per_class must be positive");
    }
    Rng rng(seed);
    std::vector<int> classes(world.class_count());
    std::iota(classes.begin(), classes.end(), 0);
    for (int k = 0; k < cfg.way; ++k) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(k, world.class_count() - 1));
        std::swap(classes[k], classes[j]);
    }
    ActiveSession s;
    s.budget = budget;
    s.strategy = strategy;
    s.seed = derive_seed(seed, 1, 0);
    for (int k = 0; k < cfg.way; ++k) {
        for (int i = 0; i < cfg.seed_per_class; ++i) s.seed_support.push_back({world.draw(classes[k], rng), k});
    }
    for (int k = 0; k < cfg.way; ++k) {
        for (int i = 0; i < cfg.pool_per_class; ++i) s.pool.push_back({world.draw(classes[k], rng), k});
    }
    // Interleave classes so that index tie-breaks carry no class information.
    for (std::size_t i = s.pool.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(s.pool[i - 1], s.pool[j]);
    }
    for (int k = 0; k < cfg.way; ++k) {
        for (int i = 0; i < cfg.test_per_class; ++i) s.test.push_back({world.draw(classes[k], rng), k});
    }
    return s;
}

}  // namespace fewshot
