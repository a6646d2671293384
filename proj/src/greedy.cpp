#include "cstk/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cstk/error.hpp"

namespace cstk {

namespace {

void check_inputs(const DenseMatrix& phi, std::span<const double> u, const char* who) {
    if (u.size() != phi.rows())
        throw DimensionError(std::string(who) + ": measurement length " + std::to_string(u.size()) +
                             " does not match " + std::to_string(phi.rows()) + " rows");
}

RecoveryReport zero_report(std::size_t d) {
    RecoveryReport rep;
    rep.estimate = SparseVector(d);
    rep.halt_reason = HaltReason::residual_zero;
    return rep;
}

// Estimate on I and the residual it leaves.
struct Fit {
    SparseVector x;
    Vector r;
    double r_norm;
};

Fit fit_on(const DenseMatrix& phi, const IndexSet& support, std::span<const double> u,
           const LsConfig& ls) {
    Fit f;
    f.x = pseudoinverse_apply(phi, support, u, ls);
    f.r = subtract(u, matvec(phi, f.x.dense()));
    f.r_norm = norm2(f.r);
    return f;
}

void finish(RecoveryReport& rep, const Fit& f) {
    rep.estimate = f.x;
    rep.residual_history.push_back(f.r_norm);
    ++rep.iterations;
}

void trace(RecoveryReport& rep, const GreedyOptions& opts, const IndexSet& selected) {
    if (opts.record_trace)
        rep.trace.push_back({selected, rep.estimate, rep.residual_history.back()});
}

}  // namespace

std::string_view halt_reason_name(HaltReason r) {
    switch (r) {
        case HaltReason::residual_zero: return "residual_zero";
        case HaltReason::support_full: return "support_full";
        case HaltReason::max_iterations: return "max_iterations";
        case HaltReason::sample_norm_criterion: return "sample_norm_criterion";
        case HaltReason::proxy_infnorm_criterion: return "proxy_infnorm_criterion";
        case HaltReason::empty_selection: return "empty_selection";
    }
    return "?";
}

// -- OMP ------------------------------------------------------------------------

RecoveryReport omp(const DenseMatrix& phi, std::span<const double> u, std::size_t s,
                   const GreedyOptions& opts) {
    check_inputs(phi, u, "omp");
    const std::size_t m = phi.rows(), d = phi.cols();
    if (s > m || s > d) throw DomainError("omp: sparsity must not exceed m or d");
    if (norm2(u) == 0.0 || s == 0) return zero_report(d);

    RecoveryReport rep;
    rep.halt_reason = HaltReason::support_full;
    Vector r(u.begin(), u.end());
    std::vector<std::size_t> chosen;
    for (std::size_t k = 0; k < s; ++k) {
        const Vector y = adjoint_matvec(phi, r);
        // argmax over unchosen coordinates; strict > keeps the smallest index on ties
        std::size_t best = d;
        double best_val = -1.0;
        for (std::size_t i = 0; i < d; ++i) {
            if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
            if (std::abs(y[i]) > best_val) {
                best_val = std::abs(y[i]);
                best = i;
            }
        }
        chosen.push_back(best);
        rep.support = IndexSet::from_unsorted(chosen);
        Fit f = fit_on(phi, rep.support, u, opts.ls);
        finish(rep, f);
        trace(rep, opts, IndexSet{best});
        r = std::move(f.r);
        if (f.r_norm <= 1e-12) {
            rep.halt_reason = HaltReason::residual_zero;
            break;
        }
    }
    return rep;
}

// -- StOMP ----------------------------------------------------------------------

RecoveryReport stomp(const DenseMatrix& phi, std::span<const double> u, const StompConfig& cfg,
                     const GreedyOptions& opts) {
    check_inputs(phi, u, "stomp");
    if (!(cfg.t > 0.0)) throw DomainError("stomp: threshold parameter t must be positive");
    if (cfg.max_stages == 0) throw DomainError("stomp: max_stages must be at least 1");
    const std::size_t m = phi.rows(), d = phi.cols();

    RecoveryReport rep;
    rep.estimate = SparseVector(d);
    rep.halt_reason = HaltReason::max_iterations;
    Vector r(u.begin(), u.end());
    double r_norm = norm2(r);
    for (std::size_t stage = 0; stage < cfg.max_stages; ++stage) {
        const Vector y = adjoint_matvec(phi, r);
        const double sigma = r_norm / std::sqrt(static_cast<double>(m));
        std::vector<std::size_t> j;
        for (std::size_t i = 0; i < d; ++i)
            if (!rep.support.contains(i) && std::abs(y[i]) > cfg.t * sigma) j.push_back(i);
        if (j.empty()) {
            if (rep.iterations == 0) {
                rep.iterations = 1;
                rep.residual_history.push_back(r_norm);
            }
            rep.halt_reason = HaltReason::empty_selection;
            break;
        }
        bool full = false;
        if (rep.support.size() + j.size() >= m) {
            // keep the strongest candidates so the least-squares problem stays determined
            const std::size_t room = m - rep.support.size();
            std::stable_sort(j.begin(), j.end(),
                             [&](std::size_t a, std::size_t b) { return std::abs(y[a]) > std::abs(y[b]); });
            j.resize(room);
            full = true;
        }
        const IndexSet added = IndexSet::from_unsorted(j);
        rep.support = rep.support.unite(added);
        Fit f = fit_on(phi, rep.support, u, opts.ls);
        finish(rep, f);
        trace(rep, opts, added);
        r = std::move(f.r);
        r_norm = f.r_norm;
        if (r_norm <= cfg.tol) {
            rep.halt_reason = HaltReason::residual_zero;
            break;
        }
        if (full) {
            rep.halt_reason = HaltReason::support_full;
            break;
        }
    }
    return rep;
}

// -- ROMP -----------------------------------------------------------------------

IndexSet regularize(std::span<const double> y, const IndexSet& j) {
    if (j.empty()) throw DomainError("regularize: J must be nonempty");
    j.check_bound(y.size());
    std::vector<std::size_t> order(j.begin(), j.end());
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(y[a]) > std::abs(y[b]); });
    const std::size_t n = order.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + y[order[k]] * y[order[k]];

    // for each start a, the longest comparable run [a, b); b only moves forward
    std::size_t best_a = 0, best_b = 1, b = 0;
    double best_e = -1.0;
    for (std::size_t a = 0; a < n; ++a) {
        b = std::max(b, a + 1);
        const double top = std::abs(y[order[a]]);
        while (b < n && top <= 2.0 * std::abs(y[order[b]])) ++b;
        const double e = prefix[b] - prefix[a];
        if (e > best_e) {
            best_e = e;
            best_a = a;
            best_b = b;
        }
    }
    return IndexSet::from_unsorted({order.begin() + best_a, order.begin() + best_b});
}

RecoveryReport romp(const DenseMatrix& phi, std::span<const double> u, const RompConfig& cfg,
                    const GreedyOptions& opts) {
    check_inputs(phi, u, "romp");
    const std::size_t m = phi.rows(), d = phi.cols();
    const std::size_t s = cfg.s;
    if (s == 0 || s > d) throw DomainError("romp: sparsity must lie in [1, d]");
    const std::size_t max_support = cfg.max_support ? cfg.max_support : 2 * s;
    const std::size_t max_iters = cfg.max_iters ? cfg.max_iters : s;
    if (norm2(u) <= cfg.residual_tol) return zero_report(d);

    RecoveryReport rep;
    if (2 * s > m) rep.warnings.push_back("romp: 2s exceeds m; the recovery guarantee does not apply");
    rep.estimate = SparseVector(d);
    rep.halt_reason = HaltReason::max_iterations;
    Vector r(u.begin(), u.end());
    while (true) {
        const Vector y = adjoint_matvec(phi, r);
        // the s biggest coordinates outside I, or all nonzero ones if fewer
        Vector masked = y;
        for (std::size_t i : rep.support) masked[i] = 0.0;
        std::size_t nonzero = 0;
        for (double v : masked) nonzero += v != 0.0;
        const IndexSet j = top_k(masked, std::min(s, nonzero));
        if (j.empty()) {
            rep.halt_reason = HaltReason::empty_selection;
            break;
        }
        IndexSet j0 = regularize(masked, j);
        bool full = false;
        if (rep.support.size() + j0.size() > m) {
            Vector vals(d, 0.0);
            for (std::size_t i : j0) vals[i] = masked[i];
            j0 = top_k(vals, m - rep.support.size());
            full = true;
        }
        rep.support = rep.support.unite(j0);
        Fit f = fit_on(phi, rep.support, u, opts.ls);
        finish(rep, f);
        trace(rep, opts, j0);
        r = std::move(f.r);
        if (f.r_norm <= cfg.residual_tol) {
            rep.halt_reason = HaltReason::residual_zero;
            break;
        }
        if (full || rep.support.size() >= max_support) {
            rep.halt_reason = HaltReason::support_full;
            break;
        }
        if (rep.iterations >= max_iters) break;
    }
    return rep;
}

// -- CoSaMP ---------------------------------------------------------------------

SparseVector prune(const SparseVector& b, std::size_t s) {
    if (s >= b.dim()) return b;
    return b.restricted(top_k(b.values(), s));
}

bool halting_check(CosampHalting kind, double value, const HaltingParams& p) {
    switch (kind) {
        case CosampHalting::fixed_iterations:
            return value >= static_cast<double>(p.iterations);
        case CosampHalting::sample_norm:
            return value <= p.epsilon;
        case CosampHalting::proxy_infnorm:
            return value <= p.eta / std::sqrt(2.0 * static_cast<double>(p.s));
    }
    return false;
}

RecoveryReport cosamp(const DenseMatrix& phi, std::span<const double> u, const CosampConfig& cfg,
                      const GreedyOptions& opts) {
    check_inputs(phi, u, "cosamp");
    const std::size_t m = phi.rows(), d = phi.cols();
    const std::size_t s = cfg.s;
    if (s == 0 || s > d) throw DomainError("cosamp: sparsity must lie in [1, d]");
    cfg.ls.validate();
    const double u_norm = norm2(u);
    if (u_norm == 0.0) return zero_report(d);

    HaltingParams hp;
    hp.s = s;
    hp.epsilon = cfg.epsilon.value_or(1e-10 * u_norm);
    hp.eta = cfg.eta;
    hp.iterations = cfg.iterations;
    if (hp.epsilon < 0.0 || hp.eta < 0.0) throw DomainError("cosamp: halting tolerances must be nonnegative");
    std::size_t cap = cfg.max_iters ? cfg.max_iters : std::max<std::size_t>(8 * s, 60);
    if (cfg.halting == CosampHalting::fixed_iterations) cap = cfg.iterations;

    RecoveryReport rep;
    if (4 * s > m) rep.warnings.push_back("cosamp: 4s exceeds m; the recovery guarantee does not apply");
    rep.estimate = SparseVector(d);
    rep.halt_reason = HaltReason::max_iterations;

    Vector v(u.begin(), u.end());
    Vector y = adjoint_matvec(phi, v);
    const auto halted = [&](double v_norm) {
        switch (cfg.halting) {
            case CosampHalting::sample_norm:
                if (halting_check(cfg.halting, v_norm, hp)) {
                    rep.halt_reason = HaltReason::sample_norm_criterion;
                    return true;
                }
                return false;
            case CosampHalting::proxy_infnorm:
                if (halting_check(cfg.halting, norm_inf(y), hp)) {
                    rep.halt_reason = HaltReason::proxy_infnorm_criterion;
                    return true;
                }
                return false;
            case CosampHalting::fixed_iterations:
                return false;
        }
        return false;
    };
    if (halted(u_norm)) return rep;

    while (rep.iterations < cap) {
        const IndexSet omega = top_k(y, std::min(2 * s, d));
        SparseVector b(d);
        if (cfg.residual_approximation) {
            // approximate the residual signal on Omega and add it to the current estimate
            const DenseMatrix a_o = restrict_columns(phi, omega);
            const LsResult ls = least_squares(a_o, v, Vector(omega.size(), 0.0), cfg.ls);
            b = rep.estimate;
            for (std::size_t k = 0; k < omega.size(); ++k) b.set(omega[k], b[omega[k]] + ls.z[k]);
        } else {
            const IndexSet t = omega.unite(rep.estimate.support());
            if (t.size() > 3 * s) throw std::logic_error("cosamp: merged support exceeds 3s");
            const DenseMatrix a_t = restrict_columns(phi, t);
            Vector z0(t.size(), 0.0);
            if (cfg.warm_start)
                for (std::size_t k = 0; k < t.size(); ++k) z0[k] = rep.estimate[t[k]];
            const LsResult ls = least_squares(a_t, u, z0, cfg.ls);
            b = SparseVector::scatter(d, t, ls.z);
        }
        rep.estimate = prune(b, s);
        v = subtract(u, matvec(phi, rep.estimate.dense()));
        y = adjoint_matvec(phi, v);
        const double v_norm = norm2(v);
        rep.residual_history.push_back(v_norm);
        ++rep.iterations;
        trace(rep, opts, omega);
        if (v_norm == 0.0) {
            rep.halt_reason = HaltReason::residual_zero;
            break;
        }
        if (halted(v_norm)) break;
    }
    rep.support = rep.estimate.support();
    return rep;
}

double unrecoverable_energy(const SparseVector& x, std::size_t s, double e_norm) {
    if (s == 0) throw DomainError("unrecoverable_energy: s must be at least 1");
    if (e_norm < 0.0) throw DomainError("unrecoverable_energy: noise norm must be nonnegative");
    const Vector tail = subtract(x.dense(), prune(x, s).dense());
    return norm2(tail) + norm1(tail) / std::sqrt(static_cast<double>(s)) + e_norm;
}

BandProfile band_profile(const SparseVector& x) {
    const double n2 = dot(x.values(), x.values());
    if (n2 == 0.0) throw DomainError("band_profile: zero vector has no bands");
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < x.dim(); ++i) {
        if (x[i] == 0.0) continue;
        const double ratio = x[i] * x[i] / n2;
        int e = 0;
        const double f = std::frexp(ratio, &e);  // ratio = f 2^e, f in [1/2, 1)
        const int j = f == 0.5 ? 1 - e : -e;
        groups[j].push_back(i);
    }
    BandProfile bp;
    for (auto& [j, idx] : groups) bp.bands.emplace(j, IndexSet(std::move(idx)));
    bp.profile = bp.bands.size();
    return bp;
}

}  // namespace cstk
