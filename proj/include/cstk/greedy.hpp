#pragma once

// Greedy sparse recovery: OMP, StOMP, ROMP and CoSaMP, plus the selection,
// regularization, pruning and halting pieces they are built from.
//
// Every algorithm returns the zero vector for u = 0.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cstk/linalg.hpp"
#include "cstk/sparse_vector.hpp"

namespace cstk {

enum class HaltReason {
    residual_zero,
    support_full,
    max_iterations,
    sample_norm_criterion,
    proxy_infnorm_criterion,
    /// no coordinate passed the selection rule (StOMP threshold, zero ROMP proxy)
    empty_selection,
};

std::string_view halt_reason_name(HaltReason r);

struct TraceStep {
    /// indices added this iteration (J0 for ROMP, Omega for CoSaMP)
    IndexSet selected;
    SparseVector estimate;
    double residual_norm = 0.0;
};

struct RecoveryReport {
    SparseVector estimate;
    IndexSet support;
    std::size_t iterations = 0;
    /// ||r|| after each iteration
    std::vector<double> residual_history;
    HaltReason halt_reason = HaltReason::residual_zero;
    /// filled only when tracing was requested
    std::vector<TraceStep> trace;
    std::vector<std::string> warnings;
};

struct GreedyOptions {
    LsConfig ls{LsMethod::conjugate_gradient, std::nullopt, 1e-12};
    bool record_trace = false;
};

RecoveryReport omp(const DenseMatrix& phi, std::span<const double> u, std::size_t s,
                   const GreedyOptions& opts = {});

struct StompConfig {
    double t = 2.0;
    std::size_t max_stages = 10;
    /// absolute residual norm treated as zero
    double tol = 1e-12;
};

/// sigma_k = ||r|| / sqrt(m); J = {j not in I : |y_j| > t sigma_k}.
RecoveryReport stomp(const DenseMatrix& phi, std::span<const double> u, const StompConfig& cfg = {},
                     const GreedyOptions& opts = {});

/// Maximum-energy subset of J whose magnitudes are pairwise within a factor 2.
/// Searches every run of consecutive entries in magnitude order (ties by
/// index), which contains the dyadic candidates; the first run of maximal
/// energy wins. `y` is indexed by coordinate, J selects the coordinates.
IndexSet regularize(std::span<const double> y, const IndexSet& j);

struct RompConfig {
    std::size_t s = 1;
    /// 0 means 2s
    std::size_t max_support = 0;
    /// 0 means s
    std::size_t max_iters = 0;
    double residual_tol = 1e-6;
};

RecoveryReport romp(const DenseMatrix& phi, std::span<const double> u, const RompConfig& cfg,
                    const GreedyOptions& opts = {});

enum class CosampHalting { fixed_iterations, sample_norm, proxy_infnorm };

struct CosampConfig {
    std::size_t s = 1;
    CosampHalting halting = CosampHalting::sample_norm;
    /// fixed_iterations: number of iterations to run
    std::size_t iterations = 0;
    /// sample_norm: halt once ||v|| <= epsilon; unset means 1e-10 ||u||
    std::optional<double> epsilon;
    /// proxy_infnorm: halt once ||Phi^T v||_inf <= eta / sqrt(2s)
    double eta = 0.0;
    /// safety cap for the data-driven criteria; 0 means max(8s, 60)
    std::size_t max_iters = 0;
    /// inner least squares; three conjugate-gradient steps by default
    LsConfig ls{LsMethod::conjugate_gradient, 3, 1e-14};
    bool warm_start = true;
    /// b = Phi_Omega^+ v, a <- (a + b)_s instead of the merged-support solve
    bool residual_approximation = false;
};

RecoveryReport cosamp(const DenseMatrix& phi, std::span<const double> u, const CosampConfig& cfg,
                      const GreedyOptions& opts = {});

/// Keeps the s largest-magnitude entries (ties toward the smaller index).
SparseVector prune(const SparseVector& b, std::size_t s);

/// ||x - x_s|| + ||x - x_s||_1 / sqrt(s) + e_norm.
double unrecoverable_energy(const SparseVector& x, std::size_t s, double e_norm);

struct BandProfile {
    /// B_j = {i : 2^-(j+1) ||x||^2 < x_i^2 <= 2^-j ||x||^2}, nonempty bands only
    std::map<int, IndexSet> bands;
    std::size_t profile = 0;
};

BandProfile band_profile(const SparseVector& x);

struct HaltingParams {
    std::size_t s = 1;
    double epsilon = 0.0;
    double eta = 0.0;
    std::size_t iterations = 0;
};

/// `value` is ||v|| (sample_norm), ||y||_inf (proxy_infnorm) or the iteration
/// count (fixed_iterations). Comparisons are inclusive.
bool halting_check(CosampHalting kind, double value, const HaltingParams& p);

}  // namespace cstk
