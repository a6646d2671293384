#include "cstk/kaczmarz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cstk/error.hpp"
#include "cstk/rng.hpp"

namespace cstk {

namespace {

double sq_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

void project_in_place(Vector& x, std::span<const double> a_i, double b_i, double a_norm2) {
    const double c = (b_i - dot(a_i, x)) / a_norm2;
    for (std::size_t j = 0; j < x.size(); ++j) x[j] += c * a_i[j];
}

double distance(std::span<const double> x, std::span<const double> y) { return norm2(subtract(x, y)); }

}  // namespace

Vector project_row(std::span<const double> x, std::span<const double> a_i, double b_i) {
    if (x.size() != a_i.size()) throw DimensionError("project_row: row and point differ in length");
    const double n2 = sq_norm(a_i);
    if (n2 == 0.0) throw DomainError("project_row: zero row");
    Vector out(x.begin(), x.end());
    project_in_place(out, a_i, b_i, n2);
    return out;
}

RowSampler::RowSampler(const DenseMatrix& a) : norms2_(a.rows()), cumulative_(a.rows()) {
    if (a.rows() == 0) throw DomainError("RowSampler: matrix has no rows");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        norms2_[i] = sq_norm(a.row(i));
        if (norms2_[i] == 0.0) throw DomainError("RowSampler: zero row");
        acc += norms2_[i];
        cumulative_[i] = acc;
    }
}

std::size_t RowSampler::pick(double uniform01) const {
    const double target = uniform01 * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    return std::min(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
}

double KaczmarzTheory::threshold() const { return std::sqrt(r) * gamma; }

KaczmarzTheory rk_theory(const DenseMatrix& a, std::span<const double> residual) {
    if (a.rows() < a.cols()) throw NumericalError("rk_theory: A has fewer rows than columns");
    const auto sv = extreme_singular_values(a);
    if (!(sv.min > 1e-12 * sv.max)) throw NumericalError("rk_theory: A is rank deficient");
    KaczmarzTheory t;
    t.r = sq_norm(a.data()) / (sv.min * sv.min);
    if (!residual.empty()) {
        if (residual.size() != a.rows()) throw DimensionError("rk_theory: residual length does not match rows");
        for (std::size_t i = 0; i < a.rows(); ++i)
            t.gamma = std::max(t.gamma, std::abs(residual[i]) / std::sqrt(sq_norm(a.row(i))));
    }
    return t;
}

KaczmarzRun rk_solve(const DenseMatrix& a, std::span<const double> b, std::span<const double> x0,
                     std::size_t iters, std::uint64_t seed, std::size_t log_stride,
                     std::span<const double> reference, std::span<const double> residual) {
    if (b.size() != a.rows()) throw DimensionError("rk_solve: rhs length does not match rows");
    if (x0.size() != a.cols()) throw DimensionError("rk_solve: x0 length does not match columns");
    if (!reference.empty() && reference.size() != a.cols())
        throw DimensionError("rk_solve: reference length does not match columns");
    const RowSampler sampler(a);

    KaczmarzRun run;
    run.seed = seed;
    try {
        const KaczmarzTheory t = rk_theory(a, residual);
        run.r = t.r;
        run.gamma = t.gamma;
    } catch (const NumericalError&) {
        run.r = std::numeric_limits<double>::infinity();
    }

    Vector x(x0.begin(), x0.end());
    const bool logging = !reference.empty();
    if (logging) run.iterates_logged.emplace_back(0, distance(x, reference));
    CounterRng rng(seed);
    const auto norms2 = sampler.row_norms_squared();
    for (std::size_t k = 1; k <= iters; ++k) {
        const std::size_t i = sampler.pick(rng.uniform());
        project_in_place(x, a.row(i), b[i], norms2[i]);
        if (logging && ((log_stride > 0 && k % log_stride == 0) || k == iters))
            run.iterates_logged.emplace_back(k, distance(x, reference));
    }
    run.final_estimate = std::move(x);
    return run;
}

}  // namespace cstk
