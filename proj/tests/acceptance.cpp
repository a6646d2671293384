// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cstk/bench.hpp"
#include "cstk/convex.hpp"
#include "cstk/ensembles.hpp"
#include "cstk/greedy.hpp"
#include "cstk/kaczmarz.hpp"
#include "cstk/rip.hpp"
#include "cstk/rng.hpp"
#include "oracle.hpp"

using namespace cstk;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double dist(const SparseVector& a, const SparseVector& b) { return norm2(subtract(a.dense(), b.dense())); }

// Signal with random support (from gen_signal) and Gaussian or sign entries.
SparseVector random_signal(std::size_t d, std::size_t s, std::uint64_t seed, bool gaussian) {
    const SparseVector support = gen_signal({d, s, SignalKind::flat, 0.5, seed, false});
    CounterRng rng(derive_seed(seed, {7}));
    SparseVector x(d);
    for (std::size_t i : support.support()) x.set(i, gaussian ? rng.gaussian() : rng.sign());
    return x;
}

// m x d matrix whose columns are orthonormal, then perturbed by eta * G / sqrt(m).
DenseMatrix near_orthonormal(std::size_t m, std::size_t d, double eta, std::uint64_t seed) {
    const DenseMatrix g = gen_matrix({Family::gaussian, m, d, seed, false});
    std::vector<Vector> q;
    for (std::size_t j = 0; j < d; ++j) {
        Vector c = g.column(j);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : q) {
                const double t = dot(b, c);
                for (std::size_t i = 0; i < m; ++i) c[i] -= t * b[i];
            }
        const double n = norm2(c);
        for (double& v : c) v /= n;
        q.push_back(std::move(c));
    }
    const DenseMatrix noise = gen_matrix({Family::gaussian, m, d, derive_seed(seed, {1}), true});
    DenseMatrix out(m, d);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < d; ++j) out(i, j) = q[j][i] + eta * noise(i, j);
    return out;
}

// 1. Exact recovery with the full orthonormal DCT.
Outcome c1() {
    std::size_t cases = 0, bad = 0;
    double worst = 0.0;
    for (std::size_t d : {16, 32, 64}) {
        const DenseMatrix phi = dct_matrix(d);
        for (std::size_t s = 1; s <= 8; ++s)
            for (std::uint64_t seed = 0; seed < 3; ++seed) {
                const auto x = random_signal(d, s, derive_seed(1000 + seed, {d, s}), seed != 1);
                const Vector u = matvec(phi, x.dense());
                RompConfig rc;
                rc.s = s;
                CosampConfig cc;
                cc.s = s;
                const double errs[] = {dist(omp(phi, u, s).estimate, x), dist(romp(phi, u, rc).estimate, x),
                                       dist(cosamp(phi, u, cc).estimate, x), dist(bp_equality(phi, u), x)};
                for (double e : errs) {
                    ++cases;
                    worst = std::max(worst, e);
                    bad += !(e <= 1e-8);
                }
            }
    }
    return {bad == 0, fmt("%.0f recoveries, %.0f above 1e-8, worst error %.2e", double(cases), double(bad), worst)};
}

// 2. ROMP J0 hits at least half the support on near-isometries.
Outcome c2() {
    std::size_t instances = 0, iterations = 0, bad = 0, attempts = 0;
    double worst_hit = 1.0, worst_delta = 0.0;
    for (std::uint64_t seed = 0; instances < 50 && attempts < 500; ++seed, ++attempts) {
        const std::size_t s = 2 + seed % 3;
        const std::size_t d = s == 4 ? 14 + seed % 3 : 16 + seed % 9;
        const DenseMatrix phi = near_orthonormal(d, d, 0.002 + 0.001 * double(seed % 4), derive_seed(seed, {20}));
        const double bound = 0.03 / std::sqrt(std::log2(double(s)));
        const double delta = ric_exact(phi, 2 * s).delta;
        if (delta > bound) continue;
        ++instances;
        worst_delta = std::max(worst_delta, delta / bound);
        const auto x = random_signal(d, s, derive_seed(seed, {21}), seed % 2 == 0);
        RompConfig rc;
        rc.s = s;
        GreedyOptions go;
        go.record_trace = true;
        const auto rep = romp(phi, matvec(phi, x.dense()), rc, go);
        const IndexSet supp = x.support();
        for (const auto& step : rep.trace) {
            if (step.selected.empty()) continue;
            ++iterations;
            const double hit = double(step.selected.intersect(supp).size()) / double(step.selected.size());
            worst_hit = std::min(worst_hit, hit);
            bad += hit < 0.5;
        }
    }
    return {instances == 50 && bad == 0,
            fmt("%.0f instances, %.0f iterations, min hit fraction %.2f, max delta/bound %.2f", double(instances),
                double(iterations), worst_hit, worst_delta)};
}

// 3. CoSaMP iteration cap and success rate at d = 256, m = 128.
Outcome c3() {
    ExperimentGrid g;
    g.algo = Algorithm::cosamp;
    g.d = 256;
    g.m_values = {128};
    g.s_values = {2, 4, 8};
    g.trials = 100;
    g.seed = 3;
    const auto cells = run_phase_transition(g);
    bool ok = true;
    std::string detail;
    for (const auto& c : cells) {
        std::size_t worst = 0;
        for (const auto& o : c.outcomes)
            if (o.success) worst = std::max(worst, o.iterations);
        ok = ok && c.cap_violations == 0 && (c.s > 4 || c.success_count >= 90);
        detail += fmt("s=%.0f: %.0f/100 ok, max iters %.0f (cap %.0f); ", double(c.s), double(c.success_count),
                      double(worst), double(6 * (c.s + 1)));
    }
    return {ok, detail};
}

// 4. Lemma suite.
Outcome c4() {
    std::size_t violations = 0;
    std::string detail;
    CounterRng rng(404);

    // comparing norms: ||v - v_T|| <= ||v||_1 / (2 sqrt T)
    std::size_t v1 = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 2 + rng.below(60), k = 1 + rng.below(n);
        Vector v(n);
        for (auto& e : v) e = t % 2 ? rng.gaussian() : std::exp(3 * rng.gaussian()) * rng.sign();
        const SparseVector sv(v);
        const double lhs = dist(sv, prune(sv, k));
        v1 += lhs > norm1(v) / (2 * std::sqrt(double(k))) * (1 + 1e-12);
    }

    // regularization: comparable subset with energy >= ||v|| / (2.5 sqrt(log2 m))
    std::size_t v2 = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 2 + rng.below(63);
        Vector v(n);
        for (auto& e : v) e = (t % 3 ? std::exp(2 * rng.gaussian()) : 1 + rng.uniform()) * rng.sign();
        const IndexSet j0 = regularize(v, IndexSet::range(n));
        double lo = INFINITY, hi = 0.0, e2 = 0.0;
        for (std::size_t i : j0) {
            lo = std::min(lo, std::abs(v[i]));
            hi = std::max(hi, std::abs(v[i]));
            e2 += v[i] * v[i];
        }
        const bool comparable = hi <= 2 * lo;
        const bool energetic = std::sqrt(e2) >= norm2(v) / (2.5 * std::sqrt(std::log2(double(n)))) * (1 - 1e-12);
        v2 += !(comparable && energetic);
    }

    // pruning: ||x - b_s|| <= 2 ||x - b|| for s-sparse x
    std::size_t v3 = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t d = 8 + rng.below(56), s = 1 + rng.below(std::min<std::size_t>(d, 10));
        const auto x = random_signal(d, s, derive_seed(t, {4, 3}), true);
        Vector b = x.dense();
        const double scale_noise = std::exp(2 * rng.gaussian() - 2);
        for (auto& e : b) e += scale_noise * rng.gaussian();
        const SparseVector bv(b);
        v3 += dist(x, prune(bv, s)) > 2 * dist(x, bv) * (1 + 1e-12);
    }

    // support merger: |Omega u supp(a)| <= 3s along real CoSaMP runs
    std::size_t v4 = 0, merges = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t s = 1 + t % 5, d = 64, m = 40;
        const DenseMatrix phi = gen_matrix({Family::gaussian, m, d, derive_seed(t, {4, 4})});
        const auto x = random_signal(d, s, derive_seed(t, {4, 5}), true);
        CosampConfig cc;
        cc.s = s;
        cc.halting = CosampHalting::fixed_iterations;
        cc.iterations = 4;
        GreedyOptions go;
        go.record_trace = true;
        const auto rep = cosamp(phi, matvec(phi, x.dense()), cc, go);
        IndexSet prev;
        for (const auto& step : rep.trace) {
            ++merges;
            v4 += step.selected.size() > 2 * s || step.selected.unite(prev).size() > 3 * s ||
                  step.estimate.nnz() > s;
            prev = step.estimate.support();
        }
    }

    // energy bound and corollary with exact constants on tiny matrices
    std::size_t v5 = 0, v6 = 0, energy_cases = 0, corollary_cases = 0;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const DenseMatrix phi = gen_matrix({Family::gaussian, 6 + seed, 10 + seed, derive_seed(seed, {4, 6})});
        ConsequenceOptions co;
        co.cases = 1000;
        co.seed = seed + 1;
        const auto rep = check_ric_consequences(phi, 2, co);
        const auto& eb = rep.find("energy_bound");
        const auto& cor = rep.find("corollary");
        v5 += !eb.holds;
        v6 += !cor.holds;
        energy_cases += eb.cases;
        corollary_cases += cor.cases;
    }
    violations = v1 + v2 + v3 + v4 + v5 + v6;
    detail = fmt("norms %.0f, regularize %.0f, prune %.0f, ", double(v1), double(v2), double(v3)) +
             fmt("merge %.0f of %.0f, energy %.0f (%.0f cases), ", double(v4), double(merges), double(v5),
                 double(energy_cases)) +
             fmt("corollary %.0f (%.0f cases) violations", double(v6), double(corollary_cases));
    return {violations == 0, detail};
}

// 5. Richardson iteration contracts by 10x when ||Phi_T^T Phi_T - I|| <= 0.1.
Outcome c5() {
    const DenseMatrix phi = gen_matrix({Family::gaussian, 2000, 40, 55});
    CounterRng rng(56);
    std::size_t sets = 0, steps = 0, bad = 0;
    double worst_ratio = 0.0;
    while (sets < 200) {
        const std::size_t k = 2 + rng.below(5);
        std::vector<std::size_t> idx;
        while (idx.size() < k) {
            const std::size_t c = rng.below(40);
            if (std::find(idx.begin(), idx.end(), c) == idx.end()) idx.push_back(c);
        }
        const IndexSet t = IndexSet::from_unsorted(idx);
        const DenseMatrix a = restrict_columns(phi, t);
        const Vector ev = symmetric_eigenvalues(gram(a));
        const double mnorm = std::max(std::abs(ev.front() - 1), std::abs(ev.back() - 1));
        if (mnorm > 0.1) continue;
        ++sets;
        Vector u(a.rows());
        for (auto& v : u) v = rng.gaussian();
        const Vector zstar = Cholesky(gram(a)).solve(adjoint_matvec(a, u));
        double prev = norm2(zstar);  // z0 = 0
        for (std::size_t l = 1; l <= 8; ++l) {
            LsConfig cfg{LsMethod::richardson, l, 0.0};
            const double err = norm2(subtract(least_squares(a, u, Vector(a.cols(), 0.0), cfg).z, zstar));
            if (prev <= 1e-9 * norm2(zstar)) break;
            ++steps;
            worst_ratio = std::max(worst_ratio, err / prev);
            bad += err > 0.1 * prev * (1 + 1e-6);
            prev = err;
        }
    }
    return {bad == 0, fmt("%.0f column sets, %.0f steps, worst per-step ratio %.4f", double(sets), double(steps),
                          worst_ratio)};
}

// 6. Halting theorems on near-isometries with delta_2s <= 0.1.
Outcome c6() {
    std::size_t instances = 0, checks = 0, bad = 0;
    double tight[4] = {0, 0, 0, 0};  // largest lhs / bound seen
    CounterRng rng(66);
    for (std::uint64_t seed = 0; instances < 100 && seed < 1000; ++seed) {
        const std::size_t s = 2 + seed % 2, d = 10 + seed % 7, m = d;
        const DenseMatrix phi = near_orthonormal(m, d, 0.01 + 0.01 * double(seed % 4), derive_seed(seed, {60}));
        if (ric_exact(phi, 2 * s).delta > 0.1) continue;
        ++instances;
        const auto x = random_signal(d, s, derive_seed(seed, {61}), true);
        const Vector clean = matvec(phi, x.dense());
        const double enorm = (seed % 5 == 0 ? 0.0 : 0.2 * rng.uniform()) * norm2(clean);
        const Vector e = enorm > 0 ? gen_noise({m, enorm, derive_seed(seed, {62})}) : Vector(m, 0.0);
        const Vector u = add(clean, e);

        // approximations: perturbed x, an unrelated s-sparse vector, and CoSaMP iterates
        std::vector<SparseVector> approx;
        {
            Vector a = x.dense();
            for (std::size_t i : x.support()) a[i] += 0.1 * rng.gaussian();
            approx.emplace_back(a);
            approx.push_back(random_signal(d, s, derive_seed(seed, {63}), true));
            CosampConfig cc;
            cc.s = s;
            cc.halting = CosampHalting::fixed_iterations;
            cc.iterations = 3;
            GreedyOptions go;
            go.record_trace = true;
            for (const auto& st : cosamp(phi, u, cc, go).trace) approx.push_back(st.estimate);
        }
        for (const auto& a : approx) {
            const Vector r = subtract(x.dense(), a.dense());
            const Vector v = add(matvec(phi, r), e);
            const Vector y = adjoint_matvec(phi, v);
            const double rn = norm2(r), rinf = norm_inf(r), vn = norm2(v), yinf = norm_inf(y);
            const double root2s = std::sqrt(2.0 * double(s));

            // Halting I with the tightest eps and eta that trigger the criteria
            const double eps = vn, eta = root2s * yinf;
            const double b1 = 1.06 * (eps + enorm), b2 = 1.12 * eta + 1.17 * enorm;
            if (b1 > 0) tight[0] = std::max(tight[0], rn / b1);
            if (b2 > 0) tight[1] = std::max(tight[1], rinf / b2);
            bad += rn > b1;
            bad += rinf > b2;

            // Halting II with the smallest eps and eta whose trigger condition holds
            const double eps2 = rn / 0.95 + enorm;
            const double eta2 = double(s) * (rinf + 0.68 * enorm / std::sqrt(double(s))) / 0.45;
            const bool t1 = halting_check(CosampHalting::sample_norm, vn, {s, eps2, 0.0, 0});
            const bool t2 = halting_check(CosampHalting::proxy_infnorm, yinf, {s, 0.0, eta2, 0});
            if (eps2 > 0) tight[2] = std::max(tight[2], vn / eps2);
            if (eta2 > 0) tight[3] = std::max(tight[3], yinf * root2s / eta2);
            bad += !t1;
            bad += !t2;
            checks += 4;
        }
    }
    return {instances == 100 && bad == 0,
            fmt("%.0f instances, %.0f checks, %.0f violations, ", double(instances), double(checks), double(bad)) +
                fmt("max lhs/bound %.3f %.3f %.3f %.3f", tight[0], tight[1], tight[2], tight[3])};
}

// 7. Kaczmarz: identity sharpness and the noiseless contraction bound.
Outcome c7() {
    const std::size_t n = 100;
    const DenseMatrix eye = DenseMatrix::identity(n);
    const Vector ones(n, 1.0), zero(n, 0.0);
    double mean = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed)
        mean += rk_solve(eye, ones, zero, 2000, derive_seed(70, {seed}), 0, zero, ones).iterates_logged.back().second / 50;
    const bool sharp = mean >= 9.0 && mean <= 11.0;

    const DenseMatrix a = gen_matrix({Family::gaussian, 100, 50, 71});
    CounterRng rng(72);
    Vector x(50);
    for (auto& v : x) v = rng.gaussian();
    const Vector b = matvec(a, x);
    const Vector x0(50, 0.0);
    const double e0 = norm2(x) * norm2(x);
    const std::size_t ks[] = {100, 500, 1000};
    double mse[3] = {0, 0, 0};
    double r = 0.0;
    const std::size_t runs = 200;
    for (std::uint64_t seed = 0; seed < runs; ++seed) {
        const auto run = rk_solve(a, b, x0, 1000, derive_seed(73, {seed}), 100, x);
        r = run.r;
        for (const auto& [k, err] : run.iterates_logged)
            for (int j = 0; j < 3; ++j)
                if (k == ks[j]) mse[j] += err * err / runs;
    }
    bool bounded = true;
    std::string detail = fmt("identity mean error %.3f; R = %.1f; ", mean, r);
    for (int j = 0; j < 3; ++j) {
        const double bound = 1.2 * std::pow(1 - 1 / r, double(ks[j])) * e0;
        bounded = bounded && mse[j] <= bound;
        detail += fmt("k=%.0f mse/bound %.3f; ", double(ks[j]), mse[j] / bound);
    }
    return {sharp && bounded, detail};
}

// 8. Reweighted error recursion against independent closed forms.
Outcome c8() {
    std::size_t bad = 0, cells = 0;
    double worst = 0.0;
    const double mu = 10.0;
    const std::vector<double> deltas{0.01, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4};
    for (auto form : {AlphaForm::sparse_case, AlphaForm::l1_theorem})
        for (double eps : {0.001, 0.01, 0.05, 0.1, 0.3, 0.5, 1.0}) {
            std::size_t prev_count = 0;
            for (double delta : deltas) {
                const double rho = std::sqrt(2.0) * delta / (1 - delta);
                const double alpha = form == AlphaForm::sparse_case ? 2 * std::sqrt(1 + delta) / (1 - delta)
                                                                    : 2 * std::sqrt((1 + delta) / (1 - delta));
                if (mu < 4 * alpha * eps / (1 - rho)) continue;
                ++cells;
                const auto b = rw_error_recursion(mu, eps, delta, 1e-3, form);
                const double e1 = 2 * alpha * eps / (1 - rho);
                const double ae = alpha * eps;
                const double limit = 2 * ae / (1 + std::sqrt(1 - 4 * ae / mu - 4 * ae * rho / mu));
                worst = std::max({worst, std::abs(b.e.front() - e1), std::abs(b.limit - limit)});
                bad += std::abs(b.e.front() - e1) > 1e-9 || std::abs(b.limit - limit) > 1e-9;
                const double q = limit / (mu - limit);
                bad += std::abs((1 + q) * ae / (1 - rho * q) - limit) > 1e-9;
                bad += b.limit > 2 * ae / (1 + rho) * (1 + 1e-12);
                bad += b.iters_to_converge < prev_count;
                prev_count = b.iters_to_converge;
            }
        }
    return {bad == 0, fmt("%.0f cells, %.0f violations, max closed-form gap %.2e", double(cells), double(bad), worst)};
}

// 9. bp_equality against vertex enumeration.
Outcome c9() {
    std::size_t compared = 0, skipped = 0, bad = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const std::size_t d = 4 + seed % 9;
        const std::size_t m = 2 + (seed / 9) % std::min<std::size_t>(7, d - 2);
        const std::size_t s = 1 + seed % std::max<std::size_t>(1, m / 2 + 1);
        const DenseMatrix phi = gen_matrix({seed % 3 == 2 ? Family::bernoulli : Family::gaussian, m, d,
                                            derive_seed(seed, {90})});
        const auto x = random_signal(d, std::min(s, d), derive_seed(seed, {91}), true);
        const Vector u = matvec(phi, x.dense());
        oracle::Mat rows(m);
        for (std::size_t i = 0; i < m; ++i) rows[i].assign(phi.row(i).begin(), phi.row(i).end());
        const auto ref = oracle::bp_vertices(rows, u);
        if (!(ref.second > ref.value + 1e-6 * std::max(1.0, ref.value))) {
            ++skipped;
            continue;
        }
        ++compared;
        const auto z = bp_equality(phi, u);
        double e = 0.0;
        for (std::size_t i = 0; i < d; ++i) e = std::max(e, std::abs(z[i] - ref.z[i]));
        worst = std::max(worst, e);
        bad += e > 1e-6;
    }
    return {bad == 0 && compared >= 200, fmt("%.0f unique instances, %.0f non-unique skipped, worst |z - z*|_inf %.2e",
                                             double(compared), double(skipped), worst)};
}

// 10. Reweighted l1 improves on plain l1 in the median.
Outcome c10() {
    const std::size_t d = 256, m = 128, s = 30, trials = 100;
    std::vector<double> ratios;
    for (std::uint64_t seed = 0; seed < trials; ++seed) {
        const DenseMatrix phi = gen_matrix({Family::gaussian, m, d, derive_seed(seed, {100, kTagMatrix})});
        const auto x = random_signal(d, s, derive_seed(seed, {100, kTagSignal}), true);
        const Vector clean = matvec(phi, x.dense());
        const Vector e = relative_noise(clean, 0.2, derive_seed(seed, {100, kTagNoise}));
        const double sigma2 = dot(e, e) / double(m);
        RwConfig cfg;
        cfg.epsilon = std::sqrt(sigma2 * (double(m) + 2 * std::sqrt(2.0 * double(m))));
        const auto rep = reweighted_l1(phi, add(clean, e), cfg);
        ratios.push_back(dist(x, rep.trace.back().estimate) / dist(x, rep.trace.front().estimate));
    }
    std::sort(ratios.begin(), ratios.end());
    const double median = 0.5 * (ratios[trials / 2 - 1] + ratios[trials / 2]);
    return {median < 1.0, fmt("median ratio %.4f, quartiles %.4f / %.4f", median, ratios[trials / 4],
                              ratios[3 * trials / 4])};
}

std::string capture(const std::string& cmd) {
    std::string out;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return "<popen failed>";
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    const int status = pclose(p);
    if (status != 0) out += "<exit " + std::to_string(status) + ">";
    return out;
}

// 11. Byte-identical CLI output across runs and thread counts.
Outcome c11() {
    const std::string cli = CSTK_CLI_PATH;
    const std::string mfile = "acceptance_matrix.csv", xfile = "acceptance_signal.csv";
    capture(cli + " gen --kind matrix --m 24 --d 48 --seed 3 --out " + mfile);
    capture(cli + " gen --kind signal --d 48 --s 3 --seed 4 --out " + xfile);
    const std::vector<std::string> cmds{
        "phase --algo omp --d 64 --m 16:48:16 --s 2,4 --trials 12 --seed 9",
        "phase --algo bp --d 32 --m 12,20 --s 2,4 --trials 6 --seed 9 --format jsonl",
        "trend --algo cosamp --d 64 --m 16,32 --s 1:6 --trials 10 --seed 2",
        "noise --algo romp --d 64 --m 32 --s 2,4 --trials 10 --noise-norm 0.1 --seed 4",
        "noise --algo rwl1 --d 32 --m 16 --s 2 --trials 3 --noise-fraction 0.1 --seed 4",
        "iters --algo stomp --d 64 --m 32 --s 3 --trials 10 --seed 5",
        "kaczmarz --m 60 --n 20 --iters 300 --trials 6 --noise-fraction 0.05 --log-stride 100 --seed 6",
        "rwbounds --eps 0.01,0.1,1 --delta 0.05,0.2,0.35",
        "ric --m 8 --d 14 --r 3 --seed 7",
        "ric --m 8 --d 30 --r 4 --mode mc --trials 500 --seed 7",
        "kaczmarz --n 30 --iters 500 --trials 4 --identity --log-stride 250 --seed 6",
        "recover --algo cosamp --s 3 --matrix " + mfile + " --signal " + xfile,
        "recover --algo bp --s 3 --noise-fraction 0.05 --seed 8 --matrix " + mfile + " --signal " + xfile,
        "gen --kind matrix --ensemble bernoulli --m 6 --d 10 --seed 1",
        "gen --kind signal --signal compressible --d 20 --s 5 --seed 1",
    };
    std::size_t bad = 0;
    std::string failed;
    for (const auto& c : cmds) {
        const std::string a = capture(cli + " " + c + " --threads 1");
        const std::string b = capture(cli + " " + c + " --threads 1");
        const std::string t = capture(cli + " " + c + " --threads 4");
        const bool ok = !a.empty() && a.find("<exit") == std::string::npos && a == b && a == t;
        if (!ok) {
            ++bad;
            failed += " [" + c.substr(0, c.find(' ')) + "]";
        }
    }
    std::remove(mfile.c_str());
    std::remove(xfile.c_str());
    return {bad == 0, fmt("%.0f commands x 3 runs, %.0f mismatches", double(cmds.size()), double(bad)) + failed};
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "exact recovery with orthonormal DCT", 5, c1},
        {2, "ROMP J0 support hits", 60, c2},
        {3, "CoSaMP iteration cap", 120, c3},
        {4, "lemma suite", 60, c4},
        {5, "Richardson contraction", 10, c5},
        {6, "halting theorems", 60, c6},
        {7, "Kaczmarz sharpness and contraction", 30, c7},
        {8, "reweighted error recursion", 1, c8},
        {9, "BP vertex oracle", 60, c9},
        {10, "reweighted improvement", 600, c10},
        {11, "determinism", 600, c11},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : all) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::printf("[%s] %2d %s (%.2fs / %.0fs%s): %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, c.budget_s,
                    in_time ? "" : ", over budget", o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
