#include "fewshot/continual.hpp"

#include "fewshot/errors.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace fewshot {

std::string_view to_string(EncodingStrategy s) {
    switch (s) {
        case EncodingStrategy::Moving: return "moving";
        case EncodingStrategy::First: return "first";
        case EncodingStrategy::Averaging: return "averaging";
    }
    return "unknown";
}

std::string_view to_string(HeadMode m) {
    return m == HeadMode::MultiHead ? "multi-head" : "single-head";
}

EncodingStrategy parse_encoding_strategy(std::string_view name) {
    for (auto s : {EncodingStrategy::Moving, EncodingStrategy::First, EncodingStrategy::Averaging}) {
        if (to_string(s) == name) return s;
    }
    throw InvalidConfig("unknown encoding strategy '" + std::string(name) + "'");
}

HeadMode parse_head_mode(std::string_view name) {
    for (auto m : {HeadMode::MultiHead, HeadMode::SingleHead}) {
        if (to_string(m) == name) return m;
    }
    throw InvalidConfig("unknown head mode '" + std::string(name) + "'");
}

MergedClass merge_class_statistics(const MergedClass& saved, const MergedClass& fresh) {
    if (saved.mean.size() != fresh.mean.size() || saved.covariance.dim() != fresh.covariance.dim() ||
        saved.mean.size() != saved.covariance.dim()) {
        throw DimensionMismatch("merge_class_statistics: dimensions differ");
    }
    if (!(saved.count > 0.0) || !(fresh.count > 0.0)) {
        throw InvalidConfig("merge_class_statistics: counts must be positive");
    }
    const double total = saved.count + fresh.count;
    const double w_new = fresh.count / total;
    const double w_old = saved.count / total;
    return MergedClass{w_new * fresh.mean + w_old * saved.mean,
                       SymMatrix(w_new * fresh.covariance.matrix() + w_old * saved.covariance.matrix()),
                       total};
}

EncodingTransform update_encoding(ContinualState& state, const EncodingTransform& new_encoding) {
    ++state.tasks_seen;
    const int t = state.tasks_seen;
    if (t == 1) {
        state.first = new_encoding;
        state.current = new_encoding;
        return new_encoding;
    }
    switch (state.strategy) {
        case EncodingStrategy::Moving:
            state.current = new_encoding;
            break;
        case EncodingStrategy::First:
            state.current = *state.first;
            break;
        case EncodingStrategy::Averaging: {
            // prev + (new - prev) / t == (1/t) new + ((t-1)/t) prev, and is
            // exactly prev when new == prev.
            const EncodingTransform& prev = *state.current;
            EncodingTransform avg{prev.linear + (new_encoding.linear - prev.linear) / t,
                                  prev.offset + (new_encoding.offset - prev.offset) / t};
            avg.validate();
            state.current = std::move(avg);
            break;
        }
    }
    return *state.current;
}

void StreamConfig::validate() const {
    if (tasks < 1) throw InvalidConfig("stream: need at least one task");
    if (classes_per_task < 1) throw InvalidConfig("stream: classes_per_task must be positive");
    if (shot < 1) throw InvalidConfig("stream: shot must be positive");
    if (query_per_class < 1) throw InvalidConfig("stream: query_per_class must be positive");
    if (drift < 0.0) throw InvalidConfig("stream: drift must be nonnegative");
    refine_config.validate();
}

namespace {

struct RawTask {
    std::vector<int> classes;
    std::vector<std::pair<Vector, int>> support;  // (raw point, local label)
    std::vector<std::pair<Vector, int>> query;
    EncodingTransform encoding;
};

std::vector<LabeledExample> realize(const std::vector<std::pair<Vector, int>>& raw,
                                    const EncodingTransform& enc) {
    std::vector<LabeledExample> out;
    out.reserve(raw.size());
    for (const auto& [x, y] : raw) out.push_back({enc.apply(x), y});
    return out;
}

}  // namespace

ContinualResult run_continual_session(const ClusterWorld& world, const StreamConfig& cfg,
                                      EncodingStrategy strategy, HeadMode head) {
    cfg.validate();
    const int needed = cfg.tasks * cfg.classes_per_task;
    if (needed > world.class_count()) throw NotEnoughClasses(needed, world.class_count());

    std::vector<RawTask> stream(cfg.tasks);
    for (int t = 0; t < cfg.tasks; ++t) {
        RawTask& task = stream[t];
        Rng rng(derive_seed(cfg.seed, 1, t));
        for (int k = 0; k < cfg.classes_per_task; ++k) {
            const int c = t * cfg.classes_per_task + k;
            task.classes.push_back(c);
            for (int s = 0; s < cfg.shot; ++s) task.support.emplace_back(world.draw(c, rng), k);
            for (int q = 0; q < cfg.query_per_class; ++q) task.query.emplace_back(world.draw(c, rng), k);
        }
        task.encoding =
            random_encoding(world.dims(), cfg.drift, cfg.offset_scale, derive_seed(cfg.seed, 2, t));
    }

    ContinualState state(strategy);
    ContinualResult result;
    result.accuracy = Matrix::Constant(cfg.tasks, cfg.tasks, std::numeric_limits<double>::quiet_NaN());
    const MetricKind metric = cfg.refine_config.metric;
    for (int i = 0; i < cfg.tasks; ++i) {
        const EncodingTransform working = update_encoding(state, stream[i].encoding);
        const auto support = realize(stream[i].support, working);
        const auto query = realize(stream[i].query, working);
        const int K = cfg.classes_per_task;
        std::optional<ClassStatistics> stats;
        if (cfg.refine) {
            std::vector<Vector> qf;
            for (const auto& q : query) qf.push_back(q.features);
            stats.emplace(refine(support, qf, cfg.refine_config, K).statistics);
        } else {
            stats.emplace(estimate_class_statistics(support, cfg.refine_config.beta, K));
        }
        for (int k = 0; k < K; ++k) {
            const int c = stream[i].classes[k];
            MergedClass fresh{stats->mean(k), stats->covariance(k), static_cast<double>(cfg.shot)};
            auto it = state.classes.find(c);
            if (it == state.classes.end()) {
                state.classes.emplace(c, std::move(fresh));
            } else {
                it->second = merge_class_statistics(it->second, fresh);
            }
        }

        for (int j = 0; j <= i; ++j) {
            std::vector<int> candidates;
            if (head == HeadMode::MultiHead) {
                candidates = stream[j].classes;
            } else {
                for (const auto& [c, _] : state.classes) candidates.push_back(c);
            }
            std::vector<Vector> means;
            std::vector<SymMatrix> covs;
            std::vector<double> counts;
            for (int c : candidates) {
                const MergedClass& mc = state.classes.at(c);
                means.push_back(mc.mean);
                covs.push_back(mc.covariance);
                counts.push_back(mc.count);
            }
            const ClassStatistics eval(std::move(means), std::move(covs), std::move(counts));
            result.max_jitter = std::max(result.max_jitter, eval.max_jitter());
            int correct = 0;
            for (const auto& [x, y] : stream[j].query) {
                const int pred = classify(working.apply(x), eval, metric).label;
                if (candidates[pred] == stream[j].classes[y]) ++correct;
            }
            result.accuracy(i, j) = static_cast<double>(correct) / static_cast<double>(stream[j].query.size());
        }
    }
    for (const auto& [c, mc] : state.classes) result.class_counts[c] = mc.count;
    return result;
}

}  // namespace fewshot
