#include "cstk/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "cstk/error.hpp"
#include "cstk/greedy.hpp"
#include "cstk/kaczmarz.hpp"
#include "cstk/rng.hpp"
#include "json.hpp"

namespace cstk {

namespace {

constexpr std::string_view kAlgoNames[] = {"bp", "omp", "stomp", "romp", "cosamp", "rwl1"};

std::size_t parse_count(std::string_view text) {
    std::size_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc{} || ptr != end)
        throw DomainError("expected a nonnegative integer, got '" + std::string(text) + "'");
    return v;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double mean_of(const std::vector<TrialOutcome>& o, double TrialOutcome::*field) {
    double s = 0.0;
    for (const auto& t : o) s += t.*field;
    return o.empty() ? 0.0 : s / static_cast<double>(o.size());
}

struct Recovered {
    SparseVector estimate;
    std::size_t iterations = 0;
};

Recovered recover(Algorithm algo, const DenseMatrix& phi, std::span<const double> u, std::size_t s,
                  double noise) {
    switch (algo) {
        case Algorithm::bp:
            return {noise > 0.0 ? bp_denoise(phi, u, noise) : bp_equality(phi, u), 1};
        case Algorithm::omp: {
            auto r = omp(phi, u, s);
            return {std::move(r.estimate), r.iterations};
        }
        case Algorithm::stomp: {
            auto r = stomp(phi, u);
            return {std::move(r.estimate), r.iterations};
        }
        case Algorithm::romp: {
            RompConfig cfg;
            cfg.s = s;
            auto r = romp(phi, u, cfg);
            return {std::move(r.estimate), r.iterations};
        }
        case Algorithm::cosamp: {
            CosampConfig cfg;
            cfg.s = s;
            if (noise > 0.0) cfg.epsilon = noise;
            auto r = cosamp(phi, u, cfg);
            return {std::move(r.estimate), r.iterations};
        }
        case Algorithm::rwl1: {
            RwConfig cfg;
            cfg.epsilon = noise;
            auto r = reweighted_l1(phi, u, cfg);
            return {std::move(r.estimate), r.iterations};
        }
    }
    throw DomainError("unknown algorithm");
}

std::vector<CellResult> run_cells(const ExperimentGrid& g, NoiseStudyMode mode) {
    g.validate();
    std::vector<CellResult> cells;
    for (std::size_t s : g.s_values)
        for (std::size_t m : g.m_values) {
            CellResult c;
            c.algo = g.algo;
            c.d = g.d;
            c.m = m;
            c.s = s;
            c.trials = g.trials;
            c.seed = g.seed;
            c.outcomes.resize(g.trials);
            cells.push_back(std::move(c));
        }
    parallel_for(cells.size() * g.trials, g.threads, [&](std::size_t job) {
        CellResult& c = cells[job / g.trials];
        const std::size_t t = job % g.trials;
        c.outcomes[t] = run_trial(g, c.m, c.s, t, mode);
    });
    for (auto& c : cells) {
        for (const auto& o : c.outcomes) {
            c.success_count += o.success;
            c.cap_violations += o.cap_violation;
            c.failures += o.failed;
        }
        double err = 0.0, ratio = 0.0;
        for (const auto& o : c.outcomes) {
            err += o.x_norm > 0.0 ? o.error / o.x_norm : o.error;
            const double denom = mode == NoiseStudyMode::signal ? o.tail : o.noise_norm;
            ratio += denom > 0.0 ? o.error / denom : 0.0;
        }
        const double n = static_cast<double>(c.outcomes.size());
        c.mean_error = err / n;
        c.mean_ratio = ratio / n;
        std::size_t iters = 0;
        for (const auto& o : c.outcomes) iters += o.iterations;
        c.mean_iterations = static_cast<double>(iters) / n;
        c.mean_runtime = mean_of(c.outcomes, &TrialOutcome::runtime);
    }
    return cells;
}

}  // namespace

std::string_view algorithm_name(Algorithm a) { return kAlgoNames[static_cast<int>(a)]; }

Algorithm parse_algorithm(std::string_view name) {
    for (std::size_t i = 0; i < std::size(kAlgoNames); ++i)
        if (kAlgoNames[i] == name) return static_cast<Algorithm>(i);
    throw DomainError("unknown algorithm '" + std::string(name) + "' (bp, omp, stomp, romp, cosamp, rwl1)");
}

std::vector<std::size_t> parse_count_list(std::string_view text) {
    std::vector<std::size_t> out;
    if (text.empty()) throw DomainError("empty count list");
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string_view item = text.substr(pos, comma - pos);
        const std::size_t c1 = item.find(':');
        if (c1 == std::string_view::npos) {
            out.push_back(parse_count(item));
        } else {
            const std::size_t c2 = item.find(':', c1 + 1);
            const std::size_t lo = parse_count(item.substr(0, c1));
            const std::size_t hi = parse_count(item.substr(c1 + 1, c2 == std::string_view::npos ? item.npos : c2 - c1 - 1));
            const std::size_t step = c2 == std::string_view::npos ? 1 : parse_count(item.substr(c2 + 1));
            if (step == 0) throw DomainError("range step must be positive in '" + std::string(item) + "'");
            if (hi < lo) throw DomainError("range end precedes start in '" + std::string(item) + "'");
            for (std::size_t v = lo; v <= hi; v += step) out.push_back(v);
        }
        pos = comma + 1;
    }
    return out;
}

std::vector<std::string> ExperimentGrid::validate() const {
    if (d == 0) throw DomainError("grid: d must be positive");
    if (m_values.empty() || s_values.empty()) throw DomainError("grid: m and s lists must be nonempty");
    if (trials == 0) throw DomainError("grid: trials must be at least 1");
    if (noise_norm && noise_fraction) throw DomainError("grid: give either a noise norm or a noise fraction, not both");
    if (noise_norm && !(*noise_norm >= 0.0)) throw DomainError("grid: noise norm must be nonnegative");
    if (noise_fraction && !(*noise_fraction >= 0.0)) throw DomainError("grid: noise fraction must be nonnegative");
    if (!(threshold > 0.0)) throw DomainError("grid: success threshold must be positive");
    if (!(p > 0.0)) throw DomainError("grid: compressibility exponent must be positive");
    std::vector<std::string> warnings;
    for (std::size_t m : m_values) {
        if (m == 0) throw DomainError("grid: m must be positive");
        if (m > d) warnings.push_back("grid: m = " + std::to_string(m) + " exceeds d = " + std::to_string(d));
    }
    for (std::size_t s : s_values)
        if (s > d) throw DomainError("grid: s = " + std::to_string(s) + " exceeds d");
    return warnings;
}

std::uint64_t trial_seed(std::uint64_t master, Algorithm algo, std::size_t s, std::size_t m, std::size_t trial) {
    return derive_seed(master, {fnv1a(algorithm_name(algo)), s, m, trial});
}

TrialOutcome run_trial(const ExperimentGrid& g, std::size_t m, std::size_t s, std::size_t trial,
                       NoiseStudyMode mode) {
    const std::uint64_t ts = trial_seed(g.seed, g.algo, s, m, trial);
    const DenseMatrix phi = gen_matrix({g.ensemble, m, g.d, derive_seed(ts, {kTagMatrix})});
    const bool full_signal = mode == NoiseStudyMode::signal;
    const SparseVector x = gen_signal({g.d, full_signal ? g.d : s, full_signal ? SignalKind::compressible : g.signal,
                                       g.p, derive_seed(ts, {kTagSignal}), full_signal});
    Vector u = matvec(phi, x.dense());
    Vector e(m, 0.0);
    if (g.noise_norm && *g.noise_norm > 0.0) e = gen_noise({m, *g.noise_norm, derive_seed(ts, {kTagNoise})});
    if (g.noise_fraction && *g.noise_fraction > 0.0 && norm2(u) > 0.0)
        e = relative_noise(u, *g.noise_fraction, derive_seed(ts, {kTagNoise}));
    u = add(u, e);

    TrialOutcome o;
    o.x_norm = norm2(x.values());
    o.noise_norm = norm2(e);
    if (s > 0) {
        const Vector tail = subtract(x.dense(), prune(x, s).dense());
        o.tail = norm1(tail) / std::sqrt(static_cast<double>(s));
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
        Recovered r = s == 0 ? Recovered{SparseVector(g.d), 0} : recover(g.algo, phi, u, s, o.noise_norm);
        o.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.error = norm2(subtract(r.estimate.dense(), x.dense()));
        o.iterations = r.iterations;
        o.success = o.error <= g.threshold;
        if (g.algo == Algorithm::romp) o.cap_violation = o.iterations > 2 * s;
        if (g.algo == Algorithm::cosamp) o.cap_violation = o.success && o.iterations > 6 * (s + 1);
    } catch (const Error&) {
        o.failed = true;
        o.error = o.x_norm;
    }
    return o;
}

std::vector<CellResult> run_phase_transition(const ExperimentGrid& g) {
    return run_cells(g, NoiseStudyMode::measurement);
}

std::vector<TrendPoint> trend_from_cells(const std::vector<CellResult>& cells, double level) {
    std::vector<TrendPoint> out;
    for (const auto& c : cells) {
        auto it = std::find_if(out.begin(), out.end(), [&](const TrendPoint& t) { return t.m == c.m; });
        if (it == out.end()) {
            out.push_back({c.m, 0});
            it = out.end() - 1;
        }
        const double rate = static_cast<double>(c.success_count) / static_cast<double>(c.trials);
        if (rate >= level) it->s = std::max(it->s, c.s);
    }
    std::sort(out.begin(), out.end(), [](const TrendPoint& a, const TrendPoint& b) { return a.m < b.m; });
    return out;
}

std::vector<TrendPoint> run_trend(const ExperimentGrid& g, double level) {
    if (!(level >= 0.0 && level <= 1.0)) throw DomainError("trend: level must lie in [0, 1]");
    return trend_from_cells(run_phase_transition(g), level);
}

std::vector<CellResult> run_noise_study(const ExperimentGrid& g, NoiseStudyMode mode) {
    if (mode == NoiseStudyMode::measurement) {
        const bool has_noise = (g.noise_norm && *g.noise_norm > 0.0) || (g.noise_fraction && *g.noise_fraction > 0.0);
        if (!has_noise) throw DomainError("noise study: a positive noise norm or fraction is required");
    }
    return run_cells(g, mode);
}

std::vector<CellResult> run_iteration_study(const ExperimentGrid& g) {
    ExperimentGrid clean = g;
    clean.noise_norm.reset();
    clean.noise_fraction.reset();
    return run_cells(clean, NoiseStudyMode::measurement);
}

std::vector<KaczmarzRow> run_kaczmarz_study(const KaczmarzStudy& k) {
    if (k.n == 0 || k.trials == 0) throw DomainError("kaczmarz study: n and trials must be positive");
    if (k.m < k.n) throw DomainError("kaczmarz study: m must be at least n");
    if (k.identity && k.m != k.n) throw DomainError("kaczmarz study: the identity system needs m = n");
    if (!(k.noise_fraction >= 0.0)) throw DomainError("kaczmarz study: noise fraction must be nonnegative");

    std::vector<std::vector<KaczmarzRow>> per_trial(k.trials);
    parallel_for(k.trials, k.threads, [&](std::size_t t) {
        const std::uint64_t ts = derive_seed(k.seed, {fnv1a("kaczmarz"), k.n, k.m, t});
        DenseMatrix a;
        Vector x(k.n, 0.0), r(k.m, 0.0);
        if (k.identity) {
            a = DenseMatrix::identity(k.n);
            r.assign(k.n, 1.0);
        } else {
            a = gen_matrix({Family::gaussian, k.m, k.n, derive_seed(ts, {kTagMatrix}), false});
            CounterRng rng(derive_seed(ts, {kTagSignal}));
            for (auto& v : x) v = rng.gaussian();
            if (k.noise_fraction > 0.0) r = relative_noise(matvec(a, x), k.noise_fraction, derive_seed(ts, {kTagNoise}));
        }
        const Vector b = add(matvec(a, x), r);
        const Vector x0(k.n, 0.0);
        const auto run = rk_solve(a, b, x0, k.iters, derive_seed(ts, {fnv1a("rows")}), k.log_stride, x, r);
        const double e0 = norm2(subtract(x0, x));
        const double thr = std::sqrt(run.r) * run.gamma;
        for (const auto& [it, err] : run.iterates_logged) {
            if (k.log_stride == 0 && it != k.iters) continue;
            KaczmarzRow row;
            row.trial = t;
            row.iteration = it;
            row.error = err;
            row.threshold = thr;
            row.bound = std::pow(1.0 - 1.0 / run.r, static_cast<double>(it) / 2.0) * e0 + thr;
            row.r = run.r;
            row.gamma = run.gamma;
            per_trial[t].push_back(row);
        }
    });
    std::vector<KaczmarzRow> rows;
    for (auto& v : per_trial) rows.insert(rows.end(), v.begin(), v.end());
    return rows;
}

std::vector<RwRow> run_rw_bounds(double mu, const std::vector<double>& eps, const std::vector<double>& delta,
                                 double tol, AlphaForm form) {
    std::vector<RwRow> rows;
    for (double e : eps)
        for (double dl : delta) {
            RwRow row;
            row.mu = mu;
            row.eps = e;
            row.delta = dl;
            try {
                row.bounds = rw_error_recursion(mu, e, dl, tol, form);
                row.valid = true;
            } catch (const DomainError&) {
                row.valid = false;
            }
            rows.push_back(std::move(row));
        }
    return rows;
}

OutputFormat parse_format(std::string_view name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "jsonl") return OutputFormat::jsonl;
    throw DomainError("unknown output format '" + std::string(name) + "' (csv, jsonl)");
}

void write_table(std::ostream& os, const Table& t, OutputFormat f) {
    if (f == OutputFormat::csv) {
        for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
        os << '\n';
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) os << ',';
                std::visit(
                    [&](const auto& v) {
                        using T = std::decay_t<decltype(v)>;
                        if constexpr (std::is_same_v<T, double>) os << format_double(v);
                        else if constexpr (std::is_same_v<T, bool>) os << (v ? "true" : "false");
                        else os << v;
                    },
                    row[i]);
            }
            os << '\n';
        }
        return;
    }
    for (const auto& row : t.rows) {
        nlohmann::ordered_json j;
        for (std::size_t i = 0; i < row.size(); ++i)
            std::visit([&](const auto& v) { j[t.columns[i]] = v; }, row[i]);
        os << j.dump() << '\n';
    }
}

Table cells_table(const std::vector<CellResult>& cells, bool timing) {
    Table t;
    t.columns = {"algo", "d", "m", "s", "trials", "seed", "success_count", "success_rate",
                 "mean_error", "mean_iterations", "mean_ratio", "cap_violations", "failures"};
    if (timing) t.columns.push_back("mean_runtime");
    for (const auto& c : cells) {
        std::vector<Field> row{std::string(algorithm_name(c.algo)),
                               std::uint64_t{c.d},
                               std::uint64_t{c.m},
                               std::uint64_t{c.s},
                               std::uint64_t{c.trials},
                               std::uint64_t{c.seed},
                               std::uint64_t{c.success_count},
                               static_cast<double>(c.success_count) / static_cast<double>(c.trials),
                               c.mean_error,
                               c.mean_iterations,
                               c.mean_ratio,
                               std::uint64_t{c.cap_violations},
                               std::uint64_t{c.failures}};
        if (timing) row.emplace_back(c.mean_runtime);
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table trend_table(const ExperimentGrid& g, const std::vector<TrendPoint>& trend, double level) {
    Table t;
    t.columns = {"algo", "d", "m", "s", "trials", "seed", "level"};
    for (const auto& p : trend)
        t.rows.push_back({std::string(algorithm_name(g.algo)), std::uint64_t{g.d}, std::uint64_t{p.m},
                          std::uint64_t{p.s}, std::uint64_t{g.trials}, std::uint64_t{g.seed}, level});
    return t;
}

Table kaczmarz_table(const KaczmarzStudy& k, const std::vector<KaczmarzRow>& rows) {
    Table t;
    t.columns = {"algo", "d", "m", "s", "trials", "seed", "trial", "iteration",
                 "error", "threshold", "bound", "R", "gamma"};
    for (const auto& r : rows)
        t.rows.push_back({std::string("kaczmarz"), std::uint64_t{k.n}, std::uint64_t{k.m}, std::uint64_t{k.n},
                          std::uint64_t{k.trials}, std::uint64_t{k.seed}, std::uint64_t{r.trial},
                          std::uint64_t{r.iteration}, r.error, r.threshold, r.bound, r.r, r.gamma});
    return t;
}

Table rw_table(const std::vector<RwRow>& rows) {
    Table t;
    t.columns = {"mu", "eps", "delta", "valid", "rho", "alpha", "e1", "limit", "iterations"};
    for (const auto& r : rows) {
        if (r.valid)
            t.rows.push_back({r.mu, r.eps, r.delta, true, r.bounds.rho, r.bounds.alpha, r.bounds.e.front(),
                              r.bounds.limit, std::uint64_t{r.bounds.iters_to_converge}});
        else
            t.rows.push_back({r.mu, r.eps, r.delta, false, std::string(), std::string(), std::string(),
                              std::string(), std::string()});
    }
    return t;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!first) first = std::current_exception();
                    next = count;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

}  // namespace cstk
