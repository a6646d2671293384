#pragma once

// Dense linear algebra used by every recovery algorithm: row-major matrices,
// sorted index sets, column-restricted least squares (Richardson splitting and
// conjugate gradient on the normal equations), Gram-matrix eigenvalues via
// cyclic Jacobi rotations, and magnitude-ordered selection.
//
// Everything here is deterministic and free of shared state.

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace cstk {

using Vector = std::vector<double>;

class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols);
    /// Takes row-major entries; throws DimensionError on a size mismatch and
    /// DomainError on non-finite entries.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }

    std::span<const double> data() const noexcept { return data_; }

    Vector column(std::size_t j) const;
    DenseMatrix scaled(double c) const;
    DenseMatrix transposed() const;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Strictly increasing list of column indices.
class IndexSet {
public:
    IndexSet() = default;
    /// Requires strictly increasing input; throws DomainError otherwise.
    explicit IndexSet(std::vector<std::size_t> sorted_indices);
    IndexSet(std::initializer_list<std::size_t> sorted_indices);

    /// Sorts and removes duplicates.
    static IndexSet from_unsorted(std::vector<std::size_t> indices);
    static IndexSet range(std::size_t n);

    std::size_t size() const noexcept { return idx_.size(); }
    bool empty() const noexcept { return idx_.empty(); }
    std::size_t operator[](std::size_t k) const noexcept { return idx_[k]; }
    auto begin() const noexcept { return idx_.begin(); }
    auto end() const noexcept { return idx_.end(); }
    std::span<const std::size_t> indices() const noexcept { return idx_; }

    bool contains(std::size_t i) const;
    IndexSet unite(const IndexSet& other) const;
    IndexSet intersect(const IndexSet& other) const;
    IndexSet minus(const IndexSet& other) const;

    /// Throws DimensionError unless every index is below `dim`.
    void check_bound(std::size_t dim) const;

    friend bool operator==(const IndexSet&, const IndexSet&) = default;

private:
    std::vector<std::size_t> idx_;
};

enum class LsMethod { richardson, conjugate_gradient };

struct LsConfig {
    LsMethod method = LsMethod::conjugate_gradient;
    /// Unset means 3 * (number of unknowns).
    std::optional<std::size_t> max_iters;
    /// Relative residual of the normal equations at which iteration stops.
    double tol = 1e-10;

    void validate() const;
    std::size_t iteration_limit(std::size_t unknowns) const;
};

struct LsResult {
    Vector z;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
};

struct SingularValueRange {
    double min = 0.0;
    double max = 0.0;
};

// -- vector helpers -----------------------------------------------------------

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
double norm1(std::span<const double> v);
double norm_inf(std::span<const double> v);
Vector subtract(std::span<const double> a, std::span<const double> b);
Vector add(std::span<const double> a, std::span<const double> b);
Vector scale(std::span<const double> v, double c);

// -- operations ---------------------------------------------------------------

/// Ax.
Vector matvec(const DenseMatrix& a, std::span<const double> x);
/// A^T v.
Vector adjoint_matvec(const DenseMatrix& a, std::span<const double> v);

/// m x |T| matrix of the columns listed in T, in T's order.
DenseMatrix restrict_columns(const DenseMatrix& a, const IndexSet& t);

/// A^T A.
DenseMatrix gram(const DenseMatrix& a);

/// Iteratively approximates A^+ u starting from z0.
///
/// Richardson uses the splitting A^T A = Id + M and iterates
/// z <- A^T u - M z; it converges linearly at rate ||M|| and is only safe when
/// ||M|| < 1. A NumericalError is raised once the normal-equation residual grows
/// beyond 10x its value at z0. Conjugate gradient runs on the normal equations.
/// Both stop when ||A^T u - A^T A z|| <= tol * ||A^T u|| or the iteration limit
/// is reached.
LsResult least_squares(const DenseMatrix& a_t, std::span<const double> u,
                       std::span<const double> z0, const LsConfig& cfg);

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
Vector symmetric_eigenvalues(const DenseMatrix& s);

/// Smallest and largest singular values, from the extreme eigenvalues of A^T A.
SingularValueRange extreme_singular_values(const DenseMatrix& a_t);

/// Largest singular value (0 for an empty matrix).
double spectral_norm(const DenseMatrix& a);

/// Indices of the k largest |v_i|, ties resolved toward the smaller index,
/// returned in increasing index order.
IndexSet top_k(std::span<const double> v, std::size_t k);

/// Cholesky factorisation of a symmetric positive definite matrix.
class Cholesky {
public:
    /// Throws NumericalError if the matrix is not numerically positive definite.
    explicit Cholesky(const DenseMatrix& spd);

    Vector solve(std::span<const double> b) const;
    std::size_t size() const noexcept { return n_; }

private:
    std::size_t n_ = 0;
    std::vector<double> l_;  // lower triangle, row-major n x n
};

}  // namespace cstk
