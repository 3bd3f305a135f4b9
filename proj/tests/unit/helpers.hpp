#pragma once

#include "../oracle/brute_force.hpp"
#include "fewshot/episodic.hpp"
#include "fewshot/metric_head.hpp"
#include "fewshot/rng.hpp"

#include <vector>

namespace testing {

inline oracle::Vec to_vec(const fewshot::Vector& v) { return oracle::Vec(v.data(), v.data() + v.size()); }

inline oracle::Mat to_mat(const fewshot::Matrix& m) {
    oracle::Mat out(m.rows(), oracle::Vec(m.cols()));
    for (fewshot::Index i = 0; i < m.rows(); ++i)
        for (fewshot::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

inline fewshot::Vector vec(std::initializer_list<double> xs) {
    fewshot::Vector v(static_cast<fewshot::Index>(xs.size()));
    fewshot::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

inline fewshot::Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    fewshot::Matrix m(static_cast<fewshot::Index>(rows.size()),
                      static_cast<fewshot::Index>(rows.begin()->size()));
    fewshot::Index i = 0;
    for (const auto& r : rows) {
        fewshot::Index j = 0;
        for (double x : r) m(i, j++) = x;
        ++i;
    }
    return m;
}

inline fewshot::Vector random_vector(fewshot::Index d, fewshot::Rng& rng, double scale = 1.0) {
    fewshot::Vector v(d);
    for (fewshot::Index i = 0; i < d; ++i) v(i) = scale * rng.normal();
    return v;
}

inline fewshot::SymMatrix random_spd(fewshot::Index d, fewshot::Rng& rng) {
    fewshot::Matrix a(d, d);
    for (fewshot::Index i = 0; i < d; ++i)
        for (fewshot::Index j = 0; j < d; ++j) a(i, j) = rng.normal();
    return fewshot::SymMatrix(a * a.transpose() + fewshot::Matrix::Identity(d, d));
}

/// Support set with every class 0..K-1 present at least once.
inline std::vector<fewshot::LabeledExample> random_support(int K, fewshot::Index d, int n,
                                                           fewshot::Rng& rng) {
    std::vector<fewshot::LabeledExample> s;
    for (int i = 0; i < n; ++i) {
        const int label = i < K ? i : static_cast<int>(rng.uniform_int(0, K - 1));
        fewshot::Vector z = random_vector(d, rng);
        z(0) += 2.0 * label;
        s.push_back({z, label});
    }
    return s;
}

inline std::vector<oracle::Vec> features_of(const std::vector<fewshot::LabeledExample>& s) {
    std::vector<oracle::Vec> out;
    for (const auto& ex : s) out.push_back(to_vec(ex.features));
    return out;
}

inline std::vector<int> labels_of(const std::vector<fewshot::LabeledExample>& s) {
    std::vector<int> out;
    for (const auto& ex : s) out.push_back(ex.label);
    return out;
}

inline oracle::Metric to_oracle(fewshot::MetricKind m) {
    using fewshot::MetricKind;
    switch (m) {
        case MetricKind::SquaredMahalanobis: return oracle::Metric::Mahalanobis;
        case MetricKind::RootRiemannian: return oracle::Metric::Root;
        case MetricKind::SquaredEuclidean: return oracle::Metric::Euclidean;
        case MetricKind::AbsoluteL1: return oracle::Metric::L1;
        case MetricKind::CosineSimilarity: return oracle::Metric::Cosine;
        case MetricKind::NegativeDotProduct: return oracle::Metric::Dot;
    }
    return oracle::Metric::Mahalanobis;
}

}  // namespace testing
