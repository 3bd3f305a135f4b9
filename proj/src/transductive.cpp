#include "fewshot/transductive.hpp"

#include "fewshot/errors.hpp"

#include <algorithm>
#include <string>

namespace fewshot {

namespace {

// Soft counts below this are treated as an empty class.
constexpr double kMinSoftCount = 1e-12;

bool lex_less(const Vector& a, const Vector& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                        b.data() + b.size());
}

Vector sorted_mean(std::vector<Vector> codes) {
    std::sort(codes.begin(), codes.end(), lex_less);
    Vector sum = Vector::Zero(codes.front().size());
    for (const auto& c : codes) sum += c;
    return sum / static_cast<double>(codes.size());
}

int infer_class_count(std::span<const LabeledExample> support, int class_count) {
    int k_max = -1;
    for (const auto& ex : support) k_max = std::max(k_max, ex.label);
    return class_count < 0 ? k_max + 1 : class_count;
}

}  // namespace

void RefineConfig::validate() const {
    if (min_steps < 1) throw InvalidConfig("refine: min_steps must be positive");
    if (max_steps < min_steps) throw InvalidConfig("refine: max_steps must be >= min_steps");
    if (beta < 0.0) throw InvalidConfig("refine: beta must be nonnegative");
}

RefineConfig RefineConfig::variable_way_shot() { return RefineConfig{2, 4}; }

RefineConfig RefineConfig::fixed_way_shot() { return RefineConfig{2, 10}; }

RefineConfig RefineConfig::single_estimate() { return RefineConfig{1, 1}; }

SetEncodings pool_set_encodings(std::span<const LabeledExample> support_codes,
                                std::span<const Vector> query_codes) {
    if (query_codes.empty()) throw EmptyQuery();
    if (support_codes.empty()) throw EmptyClass(0);
    const Index d = support_codes.front().features.size();
    const int K = infer_class_count(support_codes, -1);
    std::vector<std::vector<Vector>> per_class(K);
    for (const auto& ex : support_codes) {
        if (ex.features.size() != d) throw DimensionMismatch("pool_set_encodings: mixed lengths");
        per_class.at(ex.label).push_back(ex.features);
    }
    std::vector<Vector> class_means;
    class_means.reserve(K);
    for (int k = 0; k < K; ++k) {
        if (per_class[k].empty()) throw EmptyClass(k);
        class_means.push_back(sorted_mean(std::move(per_class[k])));
    }
    // Classes are already in a canonical (label) order.
    Vector e_s = Vector::Zero(d);
    for (const auto& m : class_means) e_s += m;
    e_s /= static_cast<double>(K);

    std::vector<Vector> q(query_codes.begin(), query_codes.end());
    for (const auto& v : q) {
        if (v.size() != d) throw DimensionMismatch("pool_set_encodings: mixed lengths");
    }
    return SetEncodings{std::move(e_s), sorted_mean(std::move(q))};
}

ResponsibilityMatrix init_responsibilities(std::span<const int> support_labels, Index query_count,
                                           int class_count) {
    ResponsibilityMatrix w;
    w.support = Matrix::Zero(static_cast<Index>(support_labels.size()), class_count);
    for (std::size_t i = 0; i < support_labels.size(); ++i) {
        const int y = support_labels[i];
        if (y < 0 || y >= class_count) {
            throw InvalidConfig("init_responsibilities: label " + std::to_string(y) +
                                " outside [0, " + std::to_string(class_count) + ")");
        }
        w.support(static_cast<Index>(i), y) = 1.0;
    }
    w.query = Matrix::Zero(query_count, class_count);
    return w;
}

ClassStatistics weighted_class_statistics(std::span<const Vector> all_features,
                                          const ResponsibilityMatrix& w, double beta) {
    const Index n = w.support.rows();
    const Index m = w.query.rows();
    const int K = w.class_count();
    if (static_cast<Index>(all_features.size()) != n + m) {
        throw DimensionMismatch("weighted_class_statistics: " +
                                std::to_string(all_features.size()) + " features for " +
                                std::to_string(n + m) + " responsibility rows");
    }
    if (w.query.cols() != K) throw DimensionMismatch("weighted_class_statistics: K mismatch");
    if (all_features.empty()) throw InvalidConfig("weighted_class_statistics: no features");
    const Index d = all_features.front().size();
    auto row = [&](Index j) { return j < n ? w.support.row(j) : w.query.row(j - n); };

    std::vector<double> counts(K, 0.0);
    std::vector<Vector> sums(K, Vector::Zero(d));
    Vector task_sum = Vector::Zero(d);
    for (Index j = 0; j < n + m; ++j) {
        const Vector& z = all_features[j];
        if (z.size() != d) throw DimensionMismatch("weighted_class_statistics: mixed dimensions");
        const auto r = row(j);
        double row_mass = 0.0;
        for (int k = 0; k < K; ++k) {
            const double wk = r(k);
            counts[k] += wk;
            sums[k] += wk * z;
            row_mass += wk;
        }
        task_sum += row_mass * z;
    }
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
        if (!(counts[k] > kMinSoftCount)) throw EmptyClass(k);
        total += counts[k];
    }
    const Vector task_mean = task_sum / total;

    std::vector<Vector> means(K);
    for (int k = 0; k < K; ++k) means[k] = sums[k] / counts[k];

    Matrix task_scatter = Matrix::Zero(d, d);
    std::vector<Matrix> class_scatter(K, Matrix::Zero(d, d));
    for (Index j = 0; j < n + m; ++j) {
        const Vector& z = all_features[j];
        const auto r = row(j);
        double row_mass = 0.0;
        for (int k = 0; k < K; ++k) row_mass += r(k);
        const Vector dt = z - task_mean;
        task_scatter.noalias() += row_mass * (dt * dt.transpose());
        for (int k = 0; k < K; ++k) {
            const Vector dk = z - means[k];
            class_scatter[k].noalias() += r(k) * (dk * dk.transpose());
        }
    }
    task_scatter /= total;

    std::vector<SymMatrix> covs;
    covs.reserve(K);
    for (int k = 0; k < K; ++k) {
        class_scatter[k] /= counts[k];
        covs.push_back(regularized_covariance(class_scatter[k], task_scatter, counts[k], beta));
    }
    return ClassStatistics(std::move(means), std::move(covs), std::move(counts));
}

RefineOutcome refine_with_assignment(std::span<const LabeledExample> support,
                                     std::span<const Vector> query, int min_steps,
                                     int max_steps, double beta, const AssignmentRule& assign,
                                     int class_count) {
    RefineConfig{min_steps, max_steps, beta}.validate();
    if (support.empty()) throw InvalidConfig("refine: empty support set");
    const int K = infer_class_count(support, class_count);

    std::vector<int> labels;
    std::vector<Vector> all;
    labels.reserve(support.size());
    all.reserve(support.size() + query.size());
    for (const auto& ex : support) {
        labels.push_back(ex.label);
        all.push_back(ex.features);
    }
    for (const auto& q : query) all.push_back(q);

    ResponsibilityMatrix w =
        init_responsibilities(labels, static_cast<Index>(query.size()), K);
    std::optional<std::vector<int>> previous;
    std::vector<Matrix> history;
    std::optional<ClassStatistics> stats;
    int iterations = 0;
    bool converged = false;
    for (int it = 1; it <= max_steps; ++it) {
        stats.emplace(weighted_class_statistics(all, w, beta));
        std::vector<int> current(query.size());
        for (std::size_t j = 0; j < query.size(); ++j) {
            Prediction p = assign(query[j], *stats);
            w.query.row(static_cast<Index>(j)) = p.probs.transpose();
            current[j] = p.label;
        }
        history.push_back(w.query);
        iterations = it;
        // With no query there is nothing to refine, so the test holds trivially.
        const bool unchanged = query.empty() || (previous && *previous == current);
        previous = std::move(current);
        if (unchanged && it >= min_steps) {
            converged = true;
            break;
        }
    }
    return RefineOutcome{std::move(*stats), std::move(w), iterations, converged,
                         std::move(history)};
}

RefineOutcome refine(std::span<const LabeledExample> support, std::span<const Vector> query,
                     const RefineConfig& cfg, int class_count) {
    cfg.validate();
    const MetricKind metric = cfg.metric;
    return refine_with_assignment(
        support, query, cfg.min_steps, cfg.max_steps, cfg.beta,
        [metric](const Vector& z, const ClassStatistics& s) { return classify(z, s, metric); },
        class_count);
}

}  // namespace fewshot
