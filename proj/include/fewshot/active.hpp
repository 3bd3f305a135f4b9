#pragma once

#include "fewshot/episodic.hpp"
#include "fewshot/transductive.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace fewshot {

enum class AcquisitionStrategy { Random, PredictiveEntropy, VariationRatios };

std::string_view to_string(AcquisitionStrategy s);
AcquisitionStrategy parse_strategy(std::string_view name);

/// Higher means acquire first. PredictiveEntropy is -sum p log p; variation
/// ratio is 1 - max p, evaluated as the mass outside the argmax so it does not
/// cancel to zero for confident rows. Random throws StrategyHasNoScore.
Vector acquisition_scores(std::span<const Vector> pool_probs, AcquisitionStrategy strategy);

/// Index of the next pool example to label. `acquired` marks rows that are
/// already labelled; they are never selected.
std::size_t select_next(std::span<const Vector> pool_probs, const std::vector<bool>& acquired,
                        AcquisitionStrategy strategy, Rng& rng);

struct ActiveSession {
    std::vector<LabeledExample> seed_support;
    /// Labels stay hidden from the head until acquired.
    std::vector<LabeledExample> pool;
    std::vector<LabeledExample> test;
    int budget = 20;
    AcquisitionStrategy strategy = AcquisitionStrategy::Random;
    std::uint64_t seed = 0;
};

struct ActiveHead {
    bool transductive = false;
    RefineConfig refine = RefineConfig::variable_way_shot();
};

struct ActiveResult {
    /// curve[t]: test accuracy after t acquisitions (length budget + 1).
    std::vector<double> curve;
    std::vector<std::size_t> acquired_order;
};

/// Refits from scratch after every acquisition. The transductive head uses the
/// still-unlabelled pool as its query set.
ActiveResult run_active_session(const ActiveSession& session, const ActiveHead& head);

struct ActiveWorldConfig {
    int way = 5;
    int seed_per_class = 1;
    int pool_per_class = 20;
    int test_per_class = 20;
};

/// Draws seed support, pool and test sets for `way` random world classes.
ActiveSession make_active_session(const ClusterWorld& world, const ActiveWorldConfig& cfg,
                                  int budget, AcquisitionStrategy strategy, std::uint64_t seed);

}  // namespace fewshot
