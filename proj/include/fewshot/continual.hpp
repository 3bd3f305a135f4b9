#pragma once

#include "fewshot/episodic.hpp"
#include "fewshot/transductive.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>

namespace fewshot {

enum class EncodingStrategy { Moving, First, Averaging };
enum class HeadMode { MultiHead, SingleHead };

std::string_view to_string(EncodingStrategy s);
std::string_view to_string(HeadMode m);
EncodingStrategy parse_encoding_strategy(std::string_view name);
HeadMode parse_head_mode(std::string_view name);

struct MergedClass {
    Vector mean;
    SymMatrix covariance;
    /// Support examples seen so far.
    double count;
};

/// Count-weighted convex combination of saved and new class statistics.
MergedClass merge_class_statistics(const MergedClass& saved, const MergedClass& fresh);

struct ContinualState {
    explicit ContinualState(EncodingStrategy strategy) : strategy(strategy) {}

    EncodingStrategy strategy;
    int tasks_seen = 0;
    std::optional<EncodingTransform> first;
    std::optional<EncodingTransform> current;
    /// Keyed by world class id.
    std::map<int, MergedClass> classes;
};

/// Advances the state to the next task and returns the working encoding:
/// Moving takes the new encoding, First keeps the first one, Averaging keeps
/// the running parameterwise mean (1/t) new + ((t-1)/t) previous.
EncodingTransform update_encoding(ContinualState& state, const EncodingTransform& new_encoding);

struct StreamConfig {
    int tasks = 5;
    int classes_per_task = 2;
    int shot = 10;
    int query_per_class = 10;
    /// Strength of each task's own feature transform.
    double drift = 0.5;
    double offset_scale = 2.0;
    bool refine = false;
    RefineConfig refine_config = RefineConfig::variable_way_shot();
    std::uint64_t seed = 0;

    void validate() const;
};

struct ContinualResult {
    /// accuracy(i, j): task j's query after tasks 0..i; NaN above the diagonal.
    Matrix accuracy;
    /// Final support count per world class.
    std::map<int, double> class_counts;
    /// Largest Cholesky jitter needed by any merged covariance (0 normally).
    double max_jitter = 0.0;
};

/// Task t uses world classes [t * c, (t + 1) * c). Saved statistics are never
/// re-extracted when the working encoding changes.
ContinualResult run_continual_session(const ClusterWorld& world, const StreamConfig& cfg,
                                      EncodingStrategy strategy, HeadMode head);

}  // namespace fewshot
