#pragma once

#include <cstddef>
#include <span>

#include "cstk/linalg.hpp"

namespace cstk {

/// Dense-length real vector whose support (nonzero positions) is derived on demand.
class SparseVector {
public:
    SparseVector() = default;
    explicit SparseVector(std::size_t dim) : values_(dim, 0.0) {}
    explicit SparseVector(Vector values) : values_(std::move(values)) {}

    /// Scatters `vals` into positions `t` of a zero vector of length `dim`.
    static SparseVector scatter(std::size_t dim, const IndexSet& t, std::span<const double> vals);

    std::size_t dim() const noexcept { return values_.size(); }
    const Vector& dense() const noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    void set(std::size_t i, double v);

    IndexSet support() const;
    std::size_t nnz() const;

    /// Copy keeping only the positions in `t`.
    SparseVector restricted(const IndexSet& t) const;

    friend bool operator==(const SparseVector&, const SparseVector&) = default;

private:
    Vector values_;
};

/// A_T^+ u scattered back to length A.cols(); zero outside T.
SparseVector pseudoinverse_apply(const DenseMatrix& a, const IndexSet& t, std::span<const double> u,
                                 const LsConfig& cfg = {});

}  // namespace cstk
