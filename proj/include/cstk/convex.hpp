#pragma once

// l1 minimization: basis pursuit with exact and noise-tolerant constraints,
// iteratively reweighted l1, and the theoretical error recursion for the
// reweighted scheme.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "cstk/greedy.hpp"
#include "cstk/linalg.hpp"
#include "cstk/sparse_vector.hpp"

namespace cstk {

/// min sum(t) over (z, t) subject to -t <= z <= t, A z = b.
struct LpProblem {
    DenseMatrix a;
    Vector b;

    std::size_t variables() const { return 2 * a.cols(); }
};

struct LpSolution {
    Vector z;
    Vector t;
    std::size_t iterations = 0;
    /// surrogate duality gap at exit
    double gap = 0.0;
};

struct BpOptions {
    /// surrogate duality gap (equality) or barrier gap (denoise) at which to stop
    double gap_tol = 1e-10;
    std::size_t max_iters = 100;
    /// newton steps per barrier stage (denoise only)
    std::size_t newton_max_iters = 50;
    /// re-solve on the detected support and keep it when feasible and no worse
    bool polish = true;
};

/// Primal-dual interior point on the LP; `a` must have full row rank.
LpSolution solve_l1_lp(const LpProblem& lp, const BpOptions& opts = {});

/// min ||z||_1 subject to Phi z = u, by a primal-dual interior-point method on
/// the LP recast. Throws NumericalError when u is outside range(Phi) or the
/// solver fails to reach a feasible point.
SparseVector bp_equality(const DenseMatrix& phi, std::span<const double> u,
                         const BpOptions& opts = {});

/// min ||z||_1 subject to ||Phi z - u|| <= eps, by a log-barrier Newton method
/// (barrier weight x10 per stage). eps >= ||u|| returns 0; eps = 0 delegates
/// to bp_equality.
SparseVector bp_denoise(const DenseMatrix& phi, std::span<const double> u, double eps,
                        const BpOptions& opts = {1e-8, 100, 50, false});

/// min sum w_i |z_i| subject to ||Phi z - u|| <= eps, by rescaling columns.
SparseVector weighted_bp_denoise(const DenseMatrix& phi, std::span<const double> u, double eps,
                                 std::span<const double> weights,
                                 const BpOptions& opts = {1e-8, 100, 50, false});

struct RwConfig {
    double epsilon = 0.0;
    /// stability parameter used when forming the weights for iteration k (k >= 2)
    std::function<double(std::size_t)> a_schedule = [](std::size_t k) {
        return 1.0 / (1000.0 * static_cast<double>(k));
    };
    std::size_t max_iters = 9;
    BpOptions bp{1e-8, 100, 50, false};
};

/// Iteration 1 is plain bp_denoise; iteration k >= 2 uses weights
/// 1 / (|x_{k-1}| + a_k). The trace holds every iterate; residual_history holds
/// ||Phi x_k - u||.
RecoveryReport reweighted_l1(const DenseMatrix& phi, std::span<const double> u, const RwConfig& cfg);

/// Two forms of alpha:
///   sparse_case  2 sqrt(1 + delta) / (1 - delta)
///   l1_theorem   2 sqrt(1 + delta) / sqrt(1 - delta)
enum class AlphaForm { sparse_case, l1_theorem };

struct RwBounds {
    double mu = 0.0;
    double eps = 0.0;
    double delta = 0.0;
    double rho = 0.0;
    double alpha = 0.0;
    std::vector<double> e;
    double limit = 0.0;
    std::size_t iters_to_converge = 0;
};

double rw_rho(double delta);
double rw_alpha(double delta, AlphaForm form);

/// E(1) = 2 alpha eps / (1 - rho),
/// E(k+1) = (1 + E/(mu - E)) alpha eps / (1 - rho E/(mu - E)),
/// iterated until |E(k) - L| <= tol with
/// L = 2 alpha eps / (1 + sqrt(1 - 4 alpha eps/mu - 4 alpha eps rho/mu)).
/// Requires delta < sqrt(2) - 1 and mu >= 4 alpha eps / (1 - rho).
RwBounds rw_error_recursion(double mu, double eps, double delta, double tol = 1e-3,
                            AlphaForm form = AlphaForm::sparse_case);

/// 1.2 (||x - x_s|| + ||x - x_s||_1 / sqrt(s)) + eps, the effective noise level
/// for signals that are not exactly s-sparse.
double rw_effective_noise(const SparseVector& x, std::size_t s, double eps);

}  // namespace cstk
