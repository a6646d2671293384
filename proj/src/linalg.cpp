#include "cstk/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cstk/error.hpp"

namespace cstk {

namespace {

void require_same(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(b) +
                             ", got " + std::to_string(a));
}

// A^T (A z) without forming A^T A.
Vector normal_apply(const DenseMatrix& a, std::span<const double> z) {
    return adjoint_matvec(a, matvec(a, z));
}

}  // namespace

// -- DenseMatrix ----------------------------------------------------------------

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows * cols)
        throw DimensionError("DenseMatrix: " + std::to_string(rows) + "x" + std::to_string(cols) +
                             " needs " + std::to_string(rows * cols) + " entries, got " +
                             std::to_string(data_.size()));
    for (double v : data_)
        if (!std::isfinite(v)) throw DomainError("DenseMatrix: non-finite entry");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionError("DenseMatrix::from_rows: ragged rows");
        data.insert(data.end(), row.begin(), row.end());
    }
    return DenseMatrix(r, c, std::move(data));
}

Vector DenseMatrix::column(std::size_t j) const {
    if (j >= cols_) throw DimensionError("DenseMatrix::column: index out of range");
    Vector out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
}

DenseMatrix DenseMatrix::scaled(double c) const {
    DenseMatrix out = *this;
    for (double& v : out.data_) v *= c;
    return out;
}

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
}

// -- IndexSet -------------------------------------------------------------------

IndexSet::IndexSet(std::vector<std::size_t> sorted_indices) : idx_(std::move(sorted_indices)) {
    for (std::size_t k = 1; k < idx_.size(); ++k)
        if (idx_[k] <= idx_[k - 1])
            throw DomainError("IndexSet: indices must be strictly increasing");
}

IndexSet::IndexSet(std::initializer_list<std::size_t> sorted_indices)
    : IndexSet(std::vector<std::size_t>(sorted_indices)) {}

IndexSet IndexSet::from_unsorted(std::vector<std::size_t> indices) {
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    IndexSet s;
    s.idx_ = std::move(indices);
    return s;
}

IndexSet IndexSet::range(std::size_t n) {
    IndexSet s;
    s.idx_.resize(n);
    std::iota(s.idx_.begin(), s.idx_.end(), std::size_t{0});
    return s;
}

bool IndexSet::contains(std::size_t i) const {
    return std::binary_search(idx_.begin(), idx_.end(), i);
}

IndexSet IndexSet::unite(const IndexSet& other) const {
    IndexSet s;
    std::set_union(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                   std::back_inserter(s.idx_));
    return s;
}

IndexSet IndexSet::intersect(const IndexSet& other) const {
    IndexSet s;
    std::set_intersection(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                          std::back_inserter(s.idx_));
    return s;
}

IndexSet IndexSet::minus(const IndexSet& other) const {
    IndexSet s;
    std::set_difference(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                        std::back_inserter(s.idx_));
    return s;
}

void IndexSet::check_bound(std::size_t dim) const {
    if (!idx_.empty() && idx_.back() >= dim)
        throw DimensionError("IndexSet: index " + std::to_string(idx_.back()) +
                             " out of range for dimension " + std::to_string(dim));
}

// -- LsConfig -------------------------------------------------------------------

void LsConfig::validate() const {
    if (!(tol >= 0.0)) throw DomainError("LsConfig: tol must be nonnegative");
    if (max_iters && *max_iters == 0) throw DomainError("LsConfig: max_iters must be at least 1");
}

std::size_t LsConfig::iteration_limit(std::size_t unknowns) const {
    return max_iters.value_or(std::max<std::size_t>(1, 3 * unknowns));
}

// -- vector helpers -------------------------------------------------------------

double dot(std::span<const double> a, std::span<const double> b) {
    require_same(b.size(), a.size(), "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> v) {
    // scaled accumulation keeps tiny and huge entries from under/overflowing
    double scale = 0.0, ssq = 1.0;
    for (double x : v) {
        if (x == 0.0) continue;
        const double ax = std::abs(x);
        if (scale < ax) {
            ssq = 1.0 + ssq * (scale / ax) * (scale / ax);
            scale = ax;
        } else {
            ssq += (ax / scale) * (ax / scale);
        }
    }
    return scale * std::sqrt(ssq);
}

double norm1(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

double norm_inf(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
    require_same(b.size(), a.size(), "subtract");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

Vector add(std::span<const double> a, std::span<const double> b) {
    require_same(b.size(), a.size(), "add");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

Vector scale(std::span<const double> v, double c) {
    Vector out(v.begin(), v.end());
    for (double& x : out) x *= c;
    return out;
}

// -- operations -----------------------------------------------------------------

Vector matvec(const DenseMatrix& a, std::span<const double> x) {
    require_same(x.size(), a.cols(), "matvec");
    Vector out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto r = a.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * x[j];
        out[i] = s;
    }
    return out;
}

Vector adjoint_matvec(const DenseMatrix& a, std::span<const double> v) {
    require_same(v.size(), a.rows(), "adjoint_matvec");
    Vector out(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double vi = v[i];
        if (vi == 0.0) continue;
        const auto r = a.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) out[j] += r[j] * vi;
    }
    return out;
}

DenseMatrix restrict_columns(const DenseMatrix& a, const IndexSet& t) {
    t.check_bound(a.cols());
    DenseMatrix out(a.rows(), t.size());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto src = a.row(i);
        auto dst = out.row(i);
        for (std::size_t k = 0; k < t.size(); ++k) dst[k] = src[t[k]];
    }
    return out;
}

DenseMatrix gram(const DenseMatrix& a) {
    const std::size_t n = a.cols();
    DenseMatrix g(n, n);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto r = a.row(i);
        for (std::size_t p = 0; p < n; ++p) {
            const double rp = r[p];
            if (rp == 0.0) continue;
            for (std::size_t q = p; q < n; ++q) g(p, q) += rp * r[q];
        }
    }
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < p; ++q) g(p, q) = g(q, p);
    return g;
}

LsResult least_squares(const DenseMatrix& a_t, std::span<const double> u,
                       std::span<const double> z0, const LsConfig& cfg) {
    cfg.validate();
    require_same(u.size(), a_t.rows(), "least_squares (u)");
    require_same(z0.size(), a_t.cols(), "least_squares (z0)");

    const std::size_t n = a_t.cols();
    LsResult res;
    res.z.assign(z0.begin(), z0.end());
    if (n == 0) return res;

    const Vector rhs = adjoint_matvec(a_t, u);
    const double rhs_norm = norm2(rhs);
    if (rhs_norm == 0.0) {
        // A^T u = 0: the least-squares solution is 0
        res.z.assign(n, 0.0);
        return res;
    }
    const std::size_t limit = cfg.iteration_limit(n);

    Vector r = subtract(rhs, normal_apply(a_t, res.z));
    double r_norm = norm2(r);

    if (cfg.method == LsMethod::richardson) {
        const double r0 = r_norm;
        while (r_norm > cfg.tol * rhs_norm && res.iterations < limit) {
            // z <- A^T u - M z with M = A^T A - I
            Vector mz = normal_apply(a_t, res.z);
            for (std::size_t i = 0; i < n; ++i) mz[i] -= res.z[i];
            for (std::size_t i = 0; i < n; ++i) res.z[i] = rhs[i] - mz[i];
            ++res.iterations;
            r = subtract(rhs, normal_apply(a_t, res.z));
            r_norm = norm2(r);
            if (!std::isfinite(r_norm) || r_norm > 10.0 * r0)
                throw NumericalError("least_squares: richardson iteration diverged (||M|| >= 1?)");
        }
    } else {
        Vector p = r;
        double rr = r_norm * r_norm;
        while (r_norm > cfg.tol * rhs_norm && res.iterations < limit) {
            const Vector q = normal_apply(a_t, p);
            const double pq = dot(p, q);
            if (!(pq > 0.0)) break;  // search direction in the null space
            const double alpha = rr / pq;
            for (std::size_t i = 0; i < n; ++i) {
                res.z[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            const double rr_new = dot(r, r);
            const double beta = rr_new / rr;
            for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
            rr = rr_new;
            r_norm = std::sqrt(rr);
            ++res.iterations;
        }
        if (!std::isfinite(r_norm)) throw NumericalError("least_squares: conjugate gradient broke down");
    }
    res.relative_residual = r_norm / rhs_norm;
    return res;
}

Vector symmetric_eigenvalues(const DenseMatrix& s) {
    const std::size_t n = s.rows();
    if (s.cols() != n) throw DimensionError("symmetric_eigenvalues: matrix not square");
    DenseMatrix a = s;
    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0, total = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = 0; q < n; ++q) {
                const double v = a(p, q) * a(p, q);
                total += v;
                if (p != q) off += v;
            }
        if (off <= 1e-32 * total || off == 0.0) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
            }
        }
    }
    Vector ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

SingularValueRange extreme_singular_values(const DenseMatrix& a_t) {
    if (a_t.cols() == 0 || a_t.rows() == 0)
        throw DimensionError("extreme_singular_values: empty matrix");
    const Vector ev = symmetric_eigenvalues(gram(a_t));
    return {std::sqrt(std::max(0.0, ev.front())), std::sqrt(std::max(0.0, ev.back()))};
}

double spectral_norm(const DenseMatrix& a) {
    if (a.cols() == 0 || a.rows() == 0) return 0.0;
    // use the smaller Gram matrix
    const Vector ev = a.cols() <= a.rows() ? symmetric_eigenvalues(gram(a))
                                           : symmetric_eigenvalues(gram(a.transposed()));
    return std::sqrt(std::max(0.0, ev.back()));
}

IndexSet top_k(std::span<const double> v, std::size_t k) {
    if (k > v.size())
        throw DomainError("top_k: k = " + std::to_string(k) + " exceeds length " +
                          std::to_string(v.size()));
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto before = [&](std::size_t i, std::size_t j) {
        const double ai = std::abs(v[i]), aj = std::abs(v[j]);
        return ai > aj || (ai == aj && i < j);
    };
    if (k < order.size()) std::nth_element(order.begin(), order.begin() + k, order.end(), before);
    order.resize(k);
    return IndexSet::from_unsorted(std::move(order));
}

// -- Cholesky -------------------------------------------------------------------

Cholesky::Cholesky(const DenseMatrix& spd) : n_(spd.rows()), l_(spd.rows() * spd.rows(), 0.0) {
    if (spd.cols() != n_) throw DimensionError("Cholesky: matrix not square");
    for (std::size_t j = 0; j < n_; ++j) {
        double d = spd(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l_[j * n_ + k] * l_[j * n_ + k];
        if (!(d > 0.0)) throw NumericalError("Cholesky: matrix is not positive definite");
        const double ljj = std::sqrt(d);
        l_[j * n_ + j] = ljj;
        for (std::size_t i = j + 1; i < n_; ++i) {
            double s = spd(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l_[i * n_ + k] * l_[j * n_ + k];
            l_[i * n_ + j] = s / ljj;
        }
    }
}

Vector Cholesky::solve(std::span<const double> b) const {
    require_same(b.size(), n_, "Cholesky::solve");
    Vector y(b.begin(), b.end());
    for (std::size_t i = 0; i < n_; ++i) {
        double s = y[i];
        for (std::size_t k = 0; k < i; ++k) s -= l_[i * n_ + k] * y[k];
        y[i] = s / l_[i * n_ + i];
    }
    for (std::size_t i = n_; i-- > 0;) {
        double s = y[i];
        for (std::size_t k = i + 1; k < n_; ++k) s -= l_[k * n_ + i] * y[k];
        y[i] = s / l_[i * n_ + i];
    }
    return y;
}

}  // namespace cstk
