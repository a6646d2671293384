#pragma once

// Experiment harness: seeded Monte-Carlo grids over (m, s), recovery studies,
// Kaczmarz and reweighted-bound tables, and CSV / JSON-lines output.
//
// Trials run on a small work pool; every trial writes to its own slot and the
// reduction walks the slots in cell order, so results do not depend on the
// number of threads.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cstk/convex.hpp"
#include "cstk/ensembles.hpp"

namespace cstk {

enum class Algorithm { bp, omp, stomp, romp, cosamp, rwl1 };

std::string_view algorithm_name(Algorithm a);
/// Throws DomainError for an unknown id.
Algorithm parse_algorithm(std::string_view name);

/// "a,b,c" or "start:stop[:step]" (inclusive), or a mix separated by commas.
/// Throws DomainError on malformed input.
std::vector<std::size_t> parse_count_list(std::string_view text);

struct ExperimentGrid {
    Algorithm algo = Algorithm::omp;
    std::size_t d = 256;
    std::vector<std::size_t> m_values;
    std::vector<std::size_t> s_values;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    Family ensemble = Family::gaussian;
    SignalKind signal = SignalKind::flat;
    /// compressible decay exponent
    double p = 0.5;
    /// absolute noise norm, or noise relative to ||Phi x||; at most one is set
    std::optional<double> noise_norm;
    std::optional<double> noise_fraction;
    /// success means ||x_hat - x|| <= threshold
    double threshold = 1e-5;
    unsigned threads = 1;

    /// Throws DomainError for unusable grids; returns warnings (m > d).
    std::vector<std::string> validate() const;
};

/// hash(master, algorithm, s, m, trial)
std::uint64_t trial_seed(std::uint64_t master, Algorithm algo, std::size_t s, std::size_t m,
                         std::size_t trial);

struct TrialOutcome {
    double error = 0.0;
    double x_norm = 0.0;
    double noise_norm = 0.0;
    /// ||x - x_s||_1 / sqrt(s)
    double tail = 0.0;
    std::size_t iterations = 0;
    double runtime = 0.0;
    bool success = false;
    /// iteration count above the theoretical cap (ROMP 2s, CoSaMP 6(s+1) on success)
    bool cap_violation = false;
    /// the solver threw instead of returning an estimate
    bool failed = false;
};

enum class NoiseStudyMode {
    /// noise on the measurements, ratio ||x_hat - x|| / ||e||
    measurement,
    /// compressible signal with full support, ratio ||x_hat - x|| / (||x - x_s||_1 / sqrt(s))
    signal,
};

/// One recovery: draws matrix, signal and noise from the trial seed.
TrialOutcome run_trial(const ExperimentGrid& g, std::size_t m, std::size_t s, std::size_t trial,
                       NoiseStudyMode mode = NoiseStudyMode::measurement);

struct CellResult {
    Algorithm algo = Algorithm::omp;
    std::size_t d = 0, m = 0, s = 0, trials = 0;
    std::uint64_t seed = 0;
    std::size_t success_count = 0;
    /// mean ||x_hat - x|| / ||x|| (||x_hat|| when x = 0)
    double mean_error = 0.0;
    double mean_iterations = 0.0;
    double mean_runtime = 0.0;
    /// noise study only
    double mean_ratio = 0.0;
    std::size_t cap_violations = 0;
    std::size_t failures = 0;
    /// per-trial outcomes in trial order
    std::vector<TrialOutcome> outcomes;
};

/// Cells in (s, m) order, s outer.
std::vector<CellResult> run_phase_transition(const ExperimentGrid& g);

struct TrendPoint {
    std::size_t m = 0;
    /// largest tested s with success rate >= level, 0 if none
    std::size_t s = 0;
};

std::vector<TrendPoint> trend_from_cells(const std::vector<CellResult>& cells, double level);
std::vector<TrendPoint> run_trend(const ExperimentGrid& g, double level = 0.99);

/// Throws DomainError in measurement mode when the grid carries no noise.
std::vector<CellResult> run_noise_study(const ExperimentGrid& g, NoiseStudyMode mode = NoiseStudyMode::measurement);

/// Noiseless; mean iterations per cell plus cap violations.
std::vector<CellResult> run_iteration_study(const ExperimentGrid& g);

struct KaczmarzStudy {
    std::size_t m = 200;
    std::size_t n = 100;
    std::size_t trials = 10;
    std::size_t iters = 1000;
    double noise_fraction = 0.0;
    std::uint64_t seed = 0;
    /// > 0 logs the error curve every log_stride iterations
    std::size_t log_stride = 0;
    /// A = I_n, x = 0, r = ones instead of a Gaussian system
    bool identity = false;
    unsigned threads = 1;
};

struct KaczmarzRow {
    std::size_t trial = 0;
    std::size_t iteration = 0;
    double error = 0.0;
    /// sqrt(R) gamma
    double threshold = 0.0;
    /// (1 - 1/R)^(k/2) ||x0 - x|| + sqrt(R) gamma
    double bound = 0.0;
    double r = 0.0;
    double gamma = 0.0;
};

/// Rows in (trial, iteration) order; one final row per trial unless a curve is logged.
std::vector<KaczmarzRow> run_kaczmarz_study(const KaczmarzStudy& k);

struct RwRow {
    double mu = 0.0, eps = 0.0, delta = 0.0;
    /// false when the cell violates mu >= 4 alpha eps / (1 - rho) or delta >= sqrt(2) - 1
    bool valid = false;
    RwBounds bounds;
};

std::vector<RwRow> run_rw_bounds(double mu, const std::vector<double>& eps, const std::vector<double>& delta,
                                 double tol = 1e-3, AlphaForm form = AlphaForm::sparse_case);

// Output tables.

using Field = std::variant<std::string, std::int64_t, std::uint64_t, double, bool>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Field>> rows;
};

enum class OutputFormat { csv, jsonl };
OutputFormat parse_format(std::string_view name);

void write_table(std::ostream& os, const Table& t, OutputFormat f);

/// mean_runtime is included only when `timing` is set, which keeps default output reproducible.
Table cells_table(const std::vector<CellResult>& cells, bool timing = false);
Table trend_table(const ExperimentGrid& g, const std::vector<TrendPoint>& trend, double level);
Table kaczmarz_table(const KaczmarzStudy& k, const std::vector<KaczmarzRow>& rows);
Table rw_table(const std::vector<RwRow>& rows);

/// Runs fn(0..count-1) on `threads` workers; the first exception is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace cstk
