#pragma once

// Randomized Kaczmarz for overdetermined systems, rows sampled with
// probability proportional to their squared norms.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cstk/linalg.hpp"

namespace cstk {

/// x + ((b_i - <a_i, x>) / ||a_i||^2) a_i. Throws DomainError for a zero row.
Vector project_row(std::span<const double> x, std::span<const double> a_i, double b_i);

/// Draws row indices with probability ||a_i||^2 / ||A||_F^2 by inverse CDF.
class RowSampler {
  public:
    /// Throws DomainError if any row is zero.
    explicit RowSampler(const DenseMatrix& a);

    /// Maps a uniform draw in [0, 1) to a row.
    std::size_t pick(double uniform01) const;

    std::span<const double> row_norms_squared() const { return norms2_; }
    double frobenius_squared() const { return cumulative_.back(); }

  private:
    std::vector<double> norms2_;
    std::vector<double> cumulative_;
};

struct KaczmarzTheory {
    double r = 0.0;
    double gamma = 0.0;
    /// sqrt(R) gamma, the error horizon for noisy systems
    double threshold() const;
};

/// R = ||A^-1||^2 ||A||_F^2 with ||A^-1|| = 1/sigma_min; gamma = max_i |r_i| / ||a_i||,
/// 0 when r is empty. Throws NumericalError for rank-deficient A.
KaczmarzTheory rk_theory(const DenseMatrix& a, std::span<const double> residual = {});

struct KaczmarzRun {
    /// (iteration, ||x_k - reference||); empty without a reference
    std::vector<std::pair<std::size_t, double>> iterates_logged;
    Vector final_estimate;
    /// infinite when A is rank deficient
    double r = 0.0;
    double gamma = 0.0;
    std::uint64_t seed = 0;
};

/// Runs `iters` projections from x0. With a reference, logs the error at
/// iteration 0, every `log_stride` iterations and at the end (log_stride = 0
/// logs only the endpoints). `residual` only feeds gamma.
KaczmarzRun rk_solve(const DenseMatrix& a, std::span<const double> b, std::span<const double> x0,
                     std::size_t iters, std::uint64_t seed, std::size_t log_stride,
                     std::span<const double> reference = {}, std::span<const double> residual = {});

}  // namespace cstk
