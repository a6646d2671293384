#include "cstk/sparse_vector.hpp"

#include "cstk/error.hpp"

namespace cstk {

SparseVector SparseVector::scatter(std::size_t dim, const IndexSet& t, std::span<const double> vals) {
    t.check_bound(dim);
    if (vals.size() != t.size()) throw DimensionError("SparseVector::scatter: value count mismatch");
    SparseVector out(dim);
    for (std::size_t k = 0; k < t.size(); ++k) out.values_[t[k]] = vals[k];
    return out;
}

void SparseVector::set(std::size_t i, double v) {
    if (i >= values_.size()) throw DimensionError("SparseVector::set: index out of range");
    values_[i] = v;
}

IndexSet SparseVector::support() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (values_[i] != 0.0) idx.push_back(i);
    return IndexSet(std::move(idx));
}

std::size_t SparseVector::nnz() const {
    std::size_t n = 0;
    for (double v : values_) n += v != 0.0;
    return n;
}

SparseVector SparseVector::restricted(const IndexSet& t) const {
    t.check_bound(dim());
    SparseVector out(dim());
    for (std::size_t i : t) out.values_[i] = values_[i];
    return out;
}

SparseVector pseudoinverse_apply(const DenseMatrix& a, const IndexSet& t, std::span<const double> u,
                                 const LsConfig& cfg) {
    t.check_bound(a.cols());
    if (t.size() > a.rows())
        throw DomainError("pseudoinverse_apply: |T| exceeds the number of rows");
    if (t.empty()) return SparseVector(a.cols());
    const DenseMatrix a_t = restrict_columns(a, t);
    const Vector z0(t.size(), 0.0);
    const LsResult ls = least_squares(a_t, u, z0, cfg);
    return SparseVector::scatter(a.cols(), t, ls.z);
}

}  // namespace cstk
