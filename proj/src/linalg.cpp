#include "fewshot/linalg.hpp"

#include "fewshot/errors.hpp"

#include <cmath>
#include <string>

namespace fewshot {

SymMatrix::SymMatrix(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("SymMatrix: matrix is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
    }
    if (m.rows() < 1) {
        throw DimensionMismatch("SymMatrix: dimension must be at least 1");
    }
    m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Index dim) { return SymMatrix(Matrix::Identity(dim, dim)); }

SymMatrix SymMatrix::zero(Index dim) { return SymMatrix(Matrix::Zero(dim, dim)); }

SymMatrix SymMatrix::plus_identity(double jitter) const {
    Matrix out = m_;
    out.diagonal().array() += jitter;
    return SymMatrix(out);
}

Vector CholeskyFactor::forward(const Vector& v) const {
    const Index n = dim();
    if (v.size() != n) {
        throw DimensionMismatch("forward substitution: vector has length " +
                                std::to_string(v.size()) + ", factor has dim " +
                                std::to_string(n));
    }
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
        double s = v(i);
        for (Index k = 0; k < i; ++k) s -= lower_(i, k) * y(k);
        y(i) = s / lower_(i, i);
    }
    return y;
}

CholeskyFactor cholesky(const SymMatrix& m) {
    const Index n = m.dim();
    const Matrix& a = m.matrix();
    Matrix l = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        double d = a(j, j);
        for (Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw NotPositiveDefinite(static_cast<std::size_t>(j), d);
        }
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (Index i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return CholeskyFactor(std::move(l));
}

Vector solve_spd(const CholeskyFactor& f, const Vector& v) {
    Vector y = f.forward(v);
    const Matrix& l = f.lower();
    const Index n = f.dim();
    Vector x(n);
    for (Index i = n - 1; i >= 0; --i) {
        double s = y(i);
        for (Index k = i + 1; k < n; ++k) s -= l(k, i) * x(k);
        x(i) = s / l(i, i);
    }
    return x;
}

double logdet(const CholeskyFactor& f) {
    double s = 0.0;
    for (Index i = 0; i < f.dim(); ++i) s += std::log(f.lower()(i, i));
    return 2.0 * s;
}

double quad_form(const CholeskyFactor& f, const Vector& v) { return f.forward(v).squaredNorm(); }

SymMatrix inverse_spd(const CholeskyFactor& f) {
    const Index n = f.dim();
    Matrix inv(n, n);
    for (Index j = 0; j < n; ++j) inv.col(j) = solve_spd(f, Vector::Unit(n, j));
    return SymMatrix(inv);
}

RepairedMatrix ensure_pd(const SymMatrix& m, std::span<const double> jitter_schedule) {
    if (jitter_schedule.empty() || jitter_schedule.front() != 0.0) {
        throw InvalidConfig("ensure_pd: jitter schedule must start at 0");
    }
    double previous = 0.0;
    for (double j : jitter_schedule) {
        if (j < previous) throw InvalidConfig("ensure_pd: jitter schedule must be non-decreasing");
        previous = j;
    }
    for (double j : jitter_schedule) {
        SymMatrix candidate = j == 0.0 ? m : m.plus_identity(j);
        try {
            CholeskyFactor f = cholesky(candidate);
            return RepairedMatrix{std::move(candidate), std::move(f), j};
        } catch (const NotPositiveDefinite&) {
        }
    }
    throw NotRepairable("ensure_pd: matrix stays indefinite after jitter " +
                        std::to_string(jitter_schedule.back()));
}

}  // namespace fewshot
