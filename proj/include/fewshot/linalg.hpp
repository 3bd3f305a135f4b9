#pragma once

#include <Eigen/Dense>

#include <array>
#include <span>

namespace fewshot {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense symmetric matrix. The constructor stores (A + A^T) / 2, so the
/// stored entries are exactly symmetric regardless of how the caller
/// accumulated them.
class SymMatrix {
public:
    explicit SymMatrix(const Matrix& m);

    static SymMatrix identity(Index dim);
    static SymMatrix zero(Index dim);

    Index dim() const noexcept { return m_.rows(); }
    const Matrix& matrix() const noexcept { return m_; }
    double operator()(Index i, Index j) const { return m_(i, j); }

    SymMatrix plus_identity(double jitter) const;

private:
    Matrix m_;
};

/// Lower-triangular Cholesky factor L with L * L^T equal to the source matrix.
class CholeskyFactor {
public:
    Index dim() const noexcept { return lower_.rows(); }
    const Matrix& lower() const noexcept { return lower_; }

    /// L^{-1} v by forward substitution.
    Vector forward(const Vector& v) const;

private:
    explicit CholeskyFactor(Matrix lower) : lower_(std::move(lower)) {}
    friend CholeskyFactor cholesky(const SymMatrix& m);

    Matrix lower_;
};

/// Throws NotPositiveDefinite with the index of the first non-positive pivot.
CholeskyFactor cholesky(const SymMatrix& m);

/// Solves (L L^T) x = v.
Vector solve_spd(const CholeskyFactor& f, const Vector& v);

/// log det(L L^T) = 2 * sum(log diag(L)).
double logdet(const CholeskyFactor& f);

/// v^T (L L^T)^{-1} v computed as ||L^{-1} v||^2; the inverse is never formed.
double quad_form(const CholeskyFactor& f, const Vector& v);

/// Explicit inverse, for callers that need Q^{-1} as a matrix (metric fields).
SymMatrix inverse_spd(const CholeskyFactor& f);

inline constexpr std::array<double, 5> kDefaultJitterSchedule{0.0, 1e-10, 1e-8, 1e-6, 1e-4};

struct RepairedMatrix {
    SymMatrix matrix;
    CholeskyFactor factor;
    double jitter;
};

/// Returns m + j*I for the first j in the schedule whose factorization
/// succeeds. The schedule must start at 0 and be non-decreasing.
RepairedMatrix ensure_pd(const SymMatrix& m,
                         std::span<const double> jitter_schedule = kDefaultJitterSchedule);

}  // namespace fewshot
