#pragma once

// Restricted isometry constants in the quadratic-form convention:
// delta_r is the smallest delta with
//   (1 - delta) ||x||^2 <= ||Phi x||^2 <= (1 + delta) ||x||^2   for all r-sparse x.

#include <cstdint>
#include <string>
#include <vector>

#include "cstk/linalg.hpp"

namespace cstk {

enum class RicMode { exact, monte_carlo };

struct RicReport {
    std::size_t r = 0;
    double delta = 0.0;
    /// max over supports of sigma_max^2 - 1 and of 1 - sigma_min^2 (either may be negative)
    double delta_upper = 0.0;
    double delta_lower = 0.0;
    RicMode mode = RicMode::exact;
    std::size_t trials = 0;
    /// true when not every support was examined
    bool lower_bound = false;
    IndexSet witness;
};

struct RicOptions {
    std::uint64_t cap = 2'000'000;
    unsigned threads = 1;
};

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::size_t n, std::size_t k);

/// Linear-form constant eps with (1 - eps)||x|| <= ||Phi x|| <= (1 + eps)||x||.
double linear_ric(const RicReport& q);

/// Exhaustive over all C(d, r) supports in lexicographic order; the witness is
/// the first support attaining the maximum. Throws EnumerationCapError above cap.
RicReport ric_exact(const DenseMatrix& phi, std::size_t r, const RicOptions& opts = {});

/// Max over `trials` sampled supports, a lower bound on delta_r. Trial t draws
/// its support from derive_seed(seed, {t}) and always contains column t mod d.
/// When trials >= C(d, r) every support is enumerated instead.
RicReport ric_monte_carlo(const DenseMatrix& phi, std::size_t r, std::size_t trials,
                          std::uint64_t seed);

struct ConsequenceCheck {
    std::string name;
    bool holds = true;
    /// min over cases of (bound - lhs); +inf when no case applied
    double worst_slack = 0.0;
    std::size_t cases = 0;
};

struct ConsequenceReport {
    std::size_t s = 0;
    std::vector<ConsequenceCheck> checks;

    bool all_hold() const;
    const ConsequenceCheck& find(const std::string& name) const;
};

struct ConsequenceOptions {
    std::size_t cases = 1000;
    std::uint64_t seed = 1;
    RicOptions ric;
    /// orders whose enumeration exceeds this are skipped in the corollary check
    std::uint64_t corollary_cap = 100'000;
};

/// Evaluates on a seeded battery, using exact constants:
///   local_approximation    ||(Phi^T Phi x)_I - x_I|| <= c1 eps ||x||, x s-sparse, |I| <= s
///   spectral_norm          ||(Phi^T z)_I|| <= (1 + eps) ||z||, |I| <= 2s
///   almost_orthogonality   ||P_I P_J|| <= c3 eps, disjoint I, J, |I u J| <= 2s
///   approx_orthogonality   ||Phi_S^T Phi_T|| <= delta_2s, disjoint, |S u T| <= 2s
///   rip_basic              sqrt(1 - delta_r)||x|| <= ||Phi_T x|| <= sqrt(1 + delta_r)||x||, |T| <= r = 2s
///   corollary              delta_{cr} <= c delta_{2r} for every feasible r, c
///   energy_bound           ||Phi x|| <= sqrt(1 + delta_s)(||x|| + ||x||_1 / sqrt(s)), dense x
/// eps is the linear-form constant at order 2s, c1 = max(2.03, 2 + eps) and
/// c3 = max(2.2, c1/(1 - eps)^2). For eps <= 0.03 these reduce to 2.03 and 2.2;
/// beyond that the plain (1 + eps)^2 - 1 estimates take over.
ConsequenceReport check_ric_consequences(const DenseMatrix& phi, std::size_t s,
                                         const ConsequenceOptions& opts = {});

}  // namespace cstk
