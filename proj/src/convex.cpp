#include "cstk/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "cstk/error.hpp"

namespace cstk {

namespace {

constexpr double kAlpha = 0.01;  // sufficient-decrease constant of the line searches
constexpr double kBeta = 0.5;    // backtracking factor
constexpr int kMaxBacktrack = 32;

// A diag(w) A^T.
DenseMatrix weighted_row_gram(const DenseMatrix& a, std::span<const double> w) {
    const std::size_t m = a.rows(), d = a.cols();
    DenseMatrix g(m, m);
    Vector scaled(d);
    for (std::size_t p = 0; p < m; ++p) {
        const auto rp = a.row(p);
        for (std::size_t j = 0; j < d; ++j) scaled[j] = rp[j] * w[j];
        for (std::size_t q = p; q < m; ++q) {
            const auto rq = a.row(q);
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += scaled[j] * rq[j];
            g(p, q) = g(q, p) = s;
        }
    }
    return g;
}

// Solves an SPD system after symmetric diagonal scaling; near the optimum the
// interior-point normal matrices span many orders of magnitude. A small ridge
// is added when the scaled matrix is still numerically indefinite.
std::optional<Vector> scaled_spd_solve(DenseMatrix h, std::span<const double> rhs) {
    const std::size_t n = h.rows();
    Vector dscale(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(h(i, i) > 0.0)) return std::nullopt;
        dscale[i] = 1.0 / std::sqrt(h(i, i));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) h(i, j) *= dscale[i] * dscale[j];
    Vector b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = rhs[i] * dscale[i];
    for (double ridge : {0.0, 1e-14, 1e-12, 1e-10}) {
        for (std::size_t i = 0; i < n; ++i) h(i, i) = 1.0 + ridge;
        try {
            Vector z = Cholesky(h).solve(b);
            for (std::size_t i = 0; i < n; ++i) z[i] *= dscale[i];
            return z;
        } catch (const NumericalError&) {
        }
    }
    return std::nullopt;
}

struct ReducedRows {
    DenseMatrix q;
    Vector b;
};

// Rewrites A z = b as Q z = b' with orthonormal rows, dropping dependent rows.
// Throws NumericalError if a dropped row shows the system is inconsistent.
ReducedRows orthonormalize_rows(const DenseMatrix& a, std::span<const double> b) {
    const std::size_t m = a.rows(), d = a.cols();
    std::vector<Vector> rows;
    Vector rhs;
    const double b_scale = std::max(1.0, norm2(b));
    for (std::size_t i = 0; i < m; ++i) {
        Vector v(a.row(i).begin(), a.row(i).end());
        double beta = b[i];
        const double n0 = norm2(v);
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t k = 0; k < rows.size(); ++k) {
                const double c = dot(rows[k], v);
                for (std::size_t j = 0; j < d; ++j) v[j] -= c * rows[k][j];
                beta -= c * rhs[k];
            }
        const double n = norm2(v);
        if (n <= 1e-10 * std::max(n0, 1e-300)) {
            if (std::abs(beta) > 1e-9 * b_scale)
                throw NumericalError("bp_equality: infeasible, u is not in the range of Phi");
            continue;
        }
        for (double& x : v) x /= n;
        rows.push_back(std::move(v));
        rhs.push_back(beta / n);
    }
    ReducedRows out;
    out.q = DenseMatrix(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(), out.q.row(i).begin());
    out.b = std::move(rhs);
    return out;
}

double l1_gap_scale(std::span<const double> x) { return std::max(1.0, norm1(x)); }

// Least squares on Phi_S; nullopt when Phi_S is rank deficient.
std::optional<SparseVector> support_solve(const DenseMatrix& phi, std::span<const double> u,
                                          std::vector<std::size_t> idx) {
    std::sort(idx.begin(), idx.end());
    const IndexSet s(idx);
    const DenseMatrix a_s = restrict_columns(phi, s);
    try {
        return SparseVector::scatter(phi.cols(), s, Cholesky(gram(a_s)).solve(adjoint_matvec(a_s, u)));
    } catch (const NumericalError&) {
        return std::nullopt;
    }
}

// Re-solves on the detected support of an interior-point solution and keeps
// the result if it is feasible and no worse in l1. The thresholded support is
// tried first, then the k largest entries for k = 1..m.
SparseVector polish_support(const DenseMatrix& phi, std::span<const double> u, const Vector& z,
                            double feas_tol) {
    SparseVector out(z);
    const double top = norm_inf(z);
    if (top == 0.0) return out;
    const double limit = norm1(z) * (1.0 + 1e-7) + 1e-12;
    const auto accept = [&](const std::optional<SparseVector>& cand) {
        return cand && norm2(subtract(matvec(phi, cand->dense()), u)) <= feas_tol &&
               norm1(cand->values()) <= limit;
    };

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < z.size(); ++i)
        if (std::abs(z[i]) > 1e-6 * top) idx.push_back(i);
    if (idx.size() <= phi.rows()) {
        auto cand = support_solve(phi, u, idx);
        if (accept(cand)) return *cand;
    }

    std::vector<std::size_t> order(z.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(z[a]) > std::abs(z[b]); });
    const std::size_t kmax = std::min(phi.rows(), z.size());
    for (std::size_t k = 1; k <= kmax; ++k) {
        if (k == idx.size()) continue;
        auto cand = support_solve(phi, u, {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k)});
        if (accept(cand)) return *cand;
    }
    return out;
}

}  // namespace

LpSolution solve_l1_lp(const LpProblem& lp, const BpOptions& opts) {
    const DenseMatrix& a = lp.a;
    const std::size_t m = a.rows(), n = a.cols();
    if (lp.b.size() != m) throw DimensionError("solve_l1_lp: rhs length does not match rows");

    LpSolution sol;
    sol.z.assign(n, 0.0);
    sol.t.assign(n, 0.0);
    if (norm2(lp.b) == 0.0) return sol;

    // least-norm starting point A^T (A A^T)^{-1} b
    const Cholesky aat(weighted_row_gram(a, Vector(n, 1.0)));
    Vector x = adjoint_matvec(a, aat.solve(lp.b));
    const double xmax = norm_inf(x);
    Vector t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = 0.95 * std::abs(x[i]) + 0.10 * xmax;

    Vector fu1(n), fu2(n), lam1(n), lam2(n);
    for (std::size_t i = 0; i < n; ++i) {
        fu1[i] = x[i] - t[i];
        fu2[i] = -x[i] - t[i];
        lam1[i] = -1.0 / fu1[i];
        lam2[i] = -1.0 / fu2[i];
    }
    Vector lam_diff(n);
    for (std::size_t i = 0; i < n; ++i) lam_diff[i] = lam1[i] - lam2[i];
    Vector v = scale(matvec(a, lam_diff), -1.0);
    Vector atv = adjoint_matvec(a, v);
    Vector rpri = subtract(matvec(a, x), lp.b);

    const double mu = 10.0;
    const double two_n = 2.0 * static_cast<double>(n);
    const auto gap_of = [&] {
        double g = 0.0;
        for (std::size_t i = 0; i < n; ++i) g -= fu1[i] * lam1[i] + fu2[i] * lam2[i];
        return g;
    };
    // ||(dual, centrality, primal) residual|| for a trial point
    const auto residual_norm = [&](const Vector& l1, const Vector& l2, const Vector& f1,
                                   const Vector& f2, const Vector& atv_, const Vector& rp, double tau) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double rd1 = l1[i] - l2[i] + atv_[i];
            const double rd2 = 1.0 - l1[i] - l2[i];
            const double rc1 = -l1[i] * f1[i] - 1.0 / tau;
            const double rc2 = -l2[i] * f2[i] - 1.0 / tau;
            s += rd1 * rd1 + rd2 * rd2 + rc1 * rc1 + rc2 * rc2;
        }
        for (double r : rp) s += r * r;
        return std::sqrt(s);
    };

    double sdg = gap_of();
    double tau = mu * two_n / sdg;
    double resnorm = residual_norm(lam1, lam2, fu1, fu2, atv, rpri, tau);
    const double tol = opts.gap_tol * l1_gap_scale(x);

    Vector w1(n), w2(n), sig1(n), sig2(n), sigx(n), inv_sigx(n), dx(n), du(n), dl1(n), dl2(n);
    while (sdg >= tol && sol.iterations < opts.max_iters) {
        for (std::size_t i = 0; i < n; ++i) {
            w1[i] = -1.0 / tau * (-1.0 / fu1[i] + 1.0 / fu2[i]) - atv[i];
            w2[i] = -1.0 - 1.0 / tau * (1.0 / fu1[i] + 1.0 / fu2[i]);
            sig1[i] = -lam1[i] / fu1[i] - lam2[i] / fu2[i];
            sig2[i] = lam1[i] / fu1[i] - lam2[i] / fu2[i];
            // sig1 - sig2^2 / sig1 without the cancellation
            const double pa = -lam1[i] / fu1[i], pb = -lam2[i] / fu2[i];
            sigx[i] = 4.0 * pa * pb / (pa + pb);
            inv_sigx[i] = 1.0 / sigx[i];
        }
        Vector tmp(n);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = w1[i] / sigx[i] - w2[i] * sig2[i] / (sigx[i] * sig1[i]);
        Vector w1p = matvec(a, tmp);
        for (std::size_t k = 0; k < m; ++k) w1p[k] = rpri[k] + w1p[k];
        const auto solved = scaled_spd_solve(weighted_row_gram(a, inv_sigx), w1p);
        if (!solved) break;
        const Vector& dv = *solved;
        const Vector atdv = adjoint_matvec(a, dv);
        for (std::size_t i = 0; i < n; ++i)
            dx[i] = (w1[i] - w2[i] * sig2[i] / sig1[i] - atdv[i]) / sigx[i];
        const Vector adx = matvec(a, dx);
        for (std::size_t i = 0; i < n; ++i) {
            du[i] = (w2[i] - sig2[i] * dx[i]) / sig1[i];
            dl1[i] = (lam1[i] / fu1[i]) * (-dx[i] + du[i]) - lam1[i] - (1.0 / tau) / fu1[i];
            dl2[i] = (lam2[i] / fu2[i]) * (dx[i] + du[i]) - lam2[i] - (1.0 / tau) / fu2[i];
        }

        // largest step keeping multipliers positive and constraints strict
        double step = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (dl1[i] < 0) step = std::min(step, -lam1[i] / dl1[i]);
            if (dl2[i] < 0) step = std::min(step, -lam2[i] / dl2[i]);
            if (dx[i] - du[i] > 0) step = std::min(step, -fu1[i] / (dx[i] - du[i]));
            if (-dx[i] - du[i] > 0) step = std::min(step, -fu2[i] / (-dx[i] - du[i]));
        }
        step *= 0.99;

        Vector xp(n), tp(n), vp(m), atvp(n), l1p(n), l2p(n), f1p(n), f2p(n), rpp(m);
        bool accepted = false;
        for (int back = 0; back <= kMaxBacktrack; ++back) {
            for (std::size_t i = 0; i < n; ++i) {
                xp[i] = x[i] + step * dx[i];
                tp[i] = t[i] + step * du[i];
                atvp[i] = atv[i] + step * atdv[i];
                l1p[i] = lam1[i] + step * dl1[i];
                l2p[i] = lam2[i] + step * dl2[i];
                f1p[i] = xp[i] - tp[i];
                f2p[i] = -xp[i] - tp[i];
            }
            for (std::size_t k = 0; k < m; ++k) {
                vp[k] = v[k] + step * dv[k];
                rpp[k] = rpri[k] + step * adx[k];
            }
            if (residual_norm(l1p, l2p, f1p, f2p, atvp, rpp, tau) <= (1.0 - kAlpha * step) * resnorm) {
                accepted = true;
                break;
            }
            step *= kBeta;
        }
        if (!accepted) break;

        x = xp;
        t = tp;
        v = vp;
        atv = atvp;
        lam1 = l1p;
        lam2 = l2p;
        fu1 = f1p;
        fu2 = f2p;
        rpri = rpp;
        sdg = gap_of();
        tau = mu * two_n / sdg;
        resnorm = residual_norm(lam1, lam2, fu1, fu2, atv, rpri, tau);
        ++sol.iterations;
    }
    sol.z = std::move(x);
    sol.t = std::move(t);
    sol.gap = sdg;
    return sol;
}

SparseVector bp_equality(const DenseMatrix& phi, std::span<const double> u, const BpOptions& opts) {
    if (u.size() != phi.rows()) throw DimensionError("bp_equality: measurement length does not match rows");
    const std::size_t d = phi.cols();
    if (norm2(u) == 0.0) return SparseVector(d);

    ReducedRows red = orthonormalize_rows(phi, u);
    const LpSolution lp = solve_l1_lp({std::move(red.q), std::move(red.b)}, opts);

    const double feas_tol = 1e-9 * std::max(1.0, norm2(u));
    SparseVector x(lp.z);
    if (opts.polish) x = polish_support(phi, u, lp.z, feas_tol);
    const double res = norm2(subtract(matvec(phi, x.dense()), u));
    if (!(res <= 1e-6 * std::max(1.0, norm2(u))))
        throw NumericalError("bp_equality: interior-point method did not reach a feasible point");
    return x;
}

SparseVector bp_denoise(const DenseMatrix& phi, std::span<const double> u, double eps,
                        const BpOptions& opts) {
    if (u.size() != phi.rows()) throw DimensionError("bp_denoise: measurement length does not match rows");
    if (!(eps >= 0.0)) throw DomainError("bp_denoise: eps must be nonnegative");
    const std::size_t m = phi.rows(), n = phi.cols();
    const Vector b(u.begin(), u.end());
    if (norm2(b) <= eps) return SparseVector(n);
    if (eps == 0.0) return bp_equality(phi, u);

    // least-norm start, lightly regularized in case the rows are dependent
    DenseMatrix aat = weighted_row_gram(phi, Vector(n, 1.0));
    double tr = 0.0;
    for (std::size_t k = 0; k < m; ++k) tr += aat(k, k);
    for (std::size_t k = 0; k < m; ++k) aat(k, k) += 1e-14 * tr / static_cast<double>(m);
    Vector x = adjoint_matvec(phi, Cholesky(aat).solve(b));
    Vector r = subtract(matvec(phi, x), b);
    if (!(norm2(r) < eps))
        throw NumericalError("bp_denoise: infeasible, no point within eps of u was found");

    const double xmax = norm_inf(x);
    Vector t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = 0.95 * std::abs(x[i]) + 0.10 * xmax;

    const double eps2 = eps * eps;
    const double two_n1 = 2.0 * static_cast<double>(n) + 1.0;
    double tau = std::max(two_n1 / norm1(x), 1.0);
    const double mu = 10.0;
    const double lbtol = opts.gap_tol;
    const auto stages = static_cast<std::size_t>(
        std::max(1.0, std::ceil((std::log(two_n1) - std::log(lbtol) - std::log(tau)) / std::log(mu))));

    Vector fu1(n), fu2(n), ntgz(n), ntgu(n), sig11(n), sig12(n), sigx(n), dx(n), du(n);
    const auto barrier = [&](const Vector& xx, const Vector& tt, const Vector& rr, double tau_) {
        double f = 0.0, logs = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a1 = xx[i] - tt[i], a2 = -xx[i] - tt[i];
            if (!(a1 < 0) || !(a2 < 0)) return std::numeric_limits<double>::infinity();
            f += tt[i];
            logs += std::log(-a1) + std::log(-a2);
        }
        const double fe = 0.5 * (dot(rr, rr) - eps2);
        if (!(fe < 0)) return std::numeric_limits<double>::infinity();
        return f - (logs + std::log(-fe)) / tau_;
    };

    for (std::size_t stage = 0; stage < stages; ++stage) {
        double f = barrier(x, t, r, tau);
        for (std::size_t it = 0; it < opts.newton_max_iters; ++it) {
            const Vector atr = adjoint_matvec(phi, r);
            const double fe = 0.5 * (dot(r, r) - eps2);
            for (std::size_t i = 0; i < n; ++i) {
                fu1[i] = x[i] - t[i];
                fu2[i] = -x[i] - t[i];
                ntgz[i] = 1.0 / fu1[i] - 1.0 / fu2[i] + atr[i] / fe;
                ntgu[i] = -tau - 1.0 / fu1[i] - 1.0 / fu2[i];
                sig11[i] = 1.0 / (fu1[i] * fu1[i]) + 1.0 / (fu2[i] * fu2[i]);
                sig12[i] = -1.0 / (fu1[i] * fu1[i]) + 1.0 / (fu2[i] * fu2[i]);
                const double pa = 1.0 / (fu1[i] * fu1[i]), pb = 1.0 / (fu2[i] * fu2[i]);
                sigx[i] = 4.0 * pa * pb / (pa + pb);
            }
            Vector w1p(n);
            for (std::size_t i = 0; i < n; ++i) w1p[i] = ntgz[i] - sig12[i] / sig11[i] * ntgu[i];

            // H = diag(sigx) + c A^T A + g g^T with c = -1/fe > 0 and g = A^T r / fe.
            // Woodbury for the first two terms, Sherman-Morrison for the rank one.
            const double c = -1.0 / fe;
            Vector dinv(n);
            for (std::size_t i = 0; i < n; ++i) dinv[i] = 1.0 / sigx[i];
            DenseMatrix core = weighted_row_gram(phi, dinv);
            for (std::size_t k = 0; k < m; ++k) core(k, k) += 1.0 / c;
            std::optional<Cholesky> chol;
            try {
                chol.emplace(core);
            } catch (const NumericalError&) {
                break;
            }
            const auto k_solve = [&](const Vector& rhs) {
                Vector dr(n);
                for (std::size_t i = 0; i < n; ++i) dr[i] = dinv[i] * rhs[i];
                const Vector inner = chol->solve(matvec(phi, dr));
                const Vector back = adjoint_matvec(phi, inner);
                for (std::size_t i = 0; i < n; ++i) dr[i] -= dinv[i] * back[i];
                return dr;
            };
            Vector g(n);
            for (std::size_t i = 0; i < n; ++i) g[i] = atr[i] / fe;
            const Vector kw = k_solve(w1p);
            const Vector kg = k_solve(g);
            const double coef = dot(g, kw) / (1.0 + dot(g, kg));
            for (std::size_t i = 0; i < n; ++i) dx[i] = kw[i] - coef * kg[i];

            const Vector adx = matvec(phi, dx);
            for (std::size_t i = 0; i < n; ++i) du[i] = ntgu[i] / sig11[i] - sig12[i] / sig11[i] * dx[i];

            // largest step keeping all constraints strict
            double smax = 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (dx[i] - du[i] > 0) smax = std::min(smax, -fu1[i] / (dx[i] - du[i]));
                if (-dx[i] - du[i] > 0) smax = std::min(smax, -fu2[i] / (-dx[i] - du[i]));
            }
            const double aqe = dot(adx, adx), bqe = 2.0 * dot(r, adx), cqe = dot(r, r) - eps2;
            if (aqe > 0) smax = std::min(smax, (-bqe + std::sqrt(bqe * bqe - 4 * aqe * cqe)) / (2 * aqe));

            double gdir = 0.0;  // gradf' [dx; du]
            for (std::size_t i = 0; i < n; ++i) gdir += -(ntgz[i] * dx[i] + ntgu[i] * du[i]) / tau;

            double step = 0.99 * smax;
            Vector xp(n), tp(n), rp(m);
            bool accepted = false;
            double fp = f;
            for (int back = 0; back <= kMaxBacktrack; ++back) {
                for (std::size_t i = 0; i < n; ++i) {
                    xp[i] = x[i] + step * dx[i];
                    tp[i] = t[i] + step * du[i];
                }
                for (std::size_t k = 0; k < m; ++k) rp[k] = r[k] + step * adx[k];
                fp = barrier(xp, tp, rp, tau);
                if (fp <= f + kAlpha * step * gdir) {
                    accepted = true;
                    break;
                }
                step *= kBeta;
            }
            if (!accepted) break;
            x = xp;
            t = tp;
            r = rp;
            f = fp;
            if (-gdir / 2.0 < lbtol) break;
        }
        tau *= mu;
    }
    if (opts.polish) {
        // keep a support re-solve only if it stays inside the constraint and lowers ||z||_1
        SparseVector cand = polish_support(phi, u, x, eps);
        if (norm1(cand.values()) <= norm1(x)) return cand;
    }
    return SparseVector(std::move(x));
}

SparseVector weighted_bp_denoise(const DenseMatrix& phi, std::span<const double> u, double eps,
                                 std::span<const double> weights, const BpOptions& opts) {
    const std::size_t n = phi.cols();
    if (weights.size() != n) throw DimensionError("weighted_bp_denoise: one weight per column required");
    for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("weighted_bp_denoise: weights must be positive");
    DenseMatrix scaled = phi;
    for (std::size_t i = 0; i < phi.rows(); ++i) {
        auto row = scaled.row(i);
        for (std::size_t j = 0; j < n; ++j) row[j] /= weights[j];
    }
    SparseVector z = bp_denoise(scaled, u, eps, opts);
    for (std::size_t j = 0; j < n; ++j) z.set(j, z[j] / weights[j]);
    return z;
}

RecoveryReport reweighted_l1(const DenseMatrix& phi, std::span<const double> u, const RwConfig& cfg) {
    if (!(cfg.epsilon >= 0.0)) throw DomainError("reweighted_l1: epsilon must be nonnegative");
    if (cfg.max_iters == 0) throw DomainError("reweighted_l1: max_iters must be at least 1");
    const std::size_t n = phi.cols();
    RecoveryReport rep;
    rep.halt_reason = HaltReason::max_iterations;
    Vector w(n, 1.0);
    for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
        if (k >= 2) {
            const double a = cfg.a_schedule(k);
            if (!(a > 0.0)) throw DomainError("reweighted_l1: stability parameter must be positive");
            for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / (std::abs(rep.estimate[i]) + a);
        }
        rep.estimate = k == 1 ? bp_denoise(phi, u, cfg.epsilon, cfg.bp)
                              : weighted_bp_denoise(phi, u, cfg.epsilon, w, cfg.bp);
        rep.residual_history.push_back(norm2(subtract(matvec(phi, rep.estimate.dense()), u)));
        rep.trace.push_back({rep.estimate.support(), rep.estimate, rep.residual_history.back()});
        ++rep.iterations;
    }
    rep.support = rep.estimate.support();
    return rep;
}

double rw_rho(double delta) { return std::sqrt(2.0) * delta / (1.0 - delta); }

double rw_alpha(double delta, AlphaForm form) {
    const double num = 2.0 * std::sqrt(1.0 + delta);
    return form == AlphaForm::sparse_case ? num / (1.0 - delta) : num / std::sqrt(1.0 - delta);
}

RwBounds rw_error_recursion(double mu, double eps, double delta, double tol, AlphaForm form) {
    if (!(delta >= 0.0 && delta < std::sqrt(2.0) - 1.0))
        throw DomainError("rw_error_recursion: delta must lie in [0, sqrt(2) - 1)");
    if (!(eps >= 0.0)) throw DomainError("rw_error_recursion: eps must be nonnegative");
    if (!(tol > 0.0)) throw DomainError("rw_error_recursion: tol must be positive");
    RwBounds b;
    b.mu = mu;
    b.eps = eps;
    b.delta = delta;
    b.rho = rw_rho(delta);
    b.alpha = rw_alpha(delta, form);
    if (!(mu >= 4.0 * b.alpha * eps / (1.0 - b.rho)))
        throw DomainError("rw_error_recursion: mu is below 4 alpha eps / (1 - rho)");
    const double ae = b.alpha * eps;
    b.limit = 2.0 * ae / (1.0 + std::sqrt(1.0 - 4.0 * ae / mu - 4.0 * ae * b.rho / mu));

    double e = 2.0 * ae / (1.0 - b.rho);
    b.e.push_back(e);
    constexpr std::size_t kMaxSteps = 100000;
    while (std::abs(e - b.limit) > tol && b.e.size() < kMaxSteps) {
        const double q = e / (mu - e);
        e = (1.0 + q) * ae / (1.0 - b.rho * q);
        b.e.push_back(e);
    }
    b.iters_to_converge = b.e.size();
    return b;
}

double rw_effective_noise(const SparseVector& x, std::size_t s, double eps) {
    if (s == 0) throw DomainError("rw_effective_noise: s must be at least 1");
    const Vector tail = subtract(x.dense(), prune(x, s).dense());
    return 1.2 * (norm2(tail) + norm1(tail) / std::sqrt(static_cast<double>(s))) + eps;
}

}  // namespace cstk
