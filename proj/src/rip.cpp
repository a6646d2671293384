#include "cstk/rip.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include "cstk/error.hpp"
#include "cstk/rng.hpp"

namespace cstk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Extremes {
    double lo;
    double hi;
};

// Extreme eigenvalues of the principal submatrix G[idx, idx].
Extremes gram_extremes(const DenseMatrix& g, std::span<const std::size_t> idx) {
    const std::size_t r = idx.size();
    if (r == 1) {
        const double v = g(idx[0], idx[0]);
        return {v, v};
    }
    if (r == 2) {
        const double a = g(idx[0], idx[0]), c = g(idx[1], idx[1]), b = g(idx[0], idx[1]);
        const double mid = 0.5 * (a + c);
        const double rad = std::hypot(0.5 * (a - c), b);
        return {mid - rad, mid + rad};
    }
    DenseMatrix sub(r, r);
    for (std::size_t p = 0; p < r; ++p)
        for (std::size_t q = 0; q < r; ++q) sub(p, q) = g(idx[p], idx[q]);
    const Vector ev = symmetric_eigenvalues(sub);
    return {ev.front(), ev.back()};
}

struct Best {
    double delta = -kInf;
    double upper = -kInf;
    double lower = -kInf;
    std::vector<std::size_t> witness;

    void offer(const Extremes& e, std::span<const std::size_t> idx) {
        const double up = e.hi - 1.0, lo = 1.0 - e.lo;
        upper = std::max(upper, up);
        lower = std::max(lower, lo);
        const double v = std::max(up, lo);
        if (v > delta) {
            delta = v;
            witness.assign(idx.begin(), idx.end());
        }
    }

    // `later` covers supports after ours in enumeration order, so ties keep ours.
    void merge(const Best& later) {
        upper = std::max(upper, later.upper);
        lower = std::max(lower, later.lower);
        if (later.delta > delta) {
            delta = later.delta;
            witness = later.witness;
        }
    }
};

// All r-subsets of [0, d) whose first element lies in [first_lo, first_hi), lexicographic.
Best scan(const DenseMatrix& g, std::size_t d, std::size_t r, std::size_t first_lo,
          std::size_t first_hi) {
    Best best;
    std::vector<std::size_t> c(r);
    for (std::size_t f = first_lo; f < first_hi; ++f) {
        std::iota(c.begin(), c.end(), f);
        while (true) {
            best.offer(gram_extremes(g, c), c);
            // advance positions 1..r-1 only; position 0 is fixed to f
            std::size_t i = r;
            while (i > 1 && c[i - 1] == d - r + (i - 1)) --i;
            if (i <= 1) break;
            ++c[i - 1];
            for (std::size_t k = i; k < r; ++k) c[k] = c[k - 1] + 1;
        }
    }
    return best;
}

RicReport to_report(const Best& b, std::size_t r, RicMode mode) {
    RicReport q;
    q.r = r;
    q.delta = std::max(0.0, b.delta);
    q.delta_upper = b.upper;
    q.delta_lower = b.lower;
    q.mode = mode;
    q.witness = IndexSet(b.witness);
    return q;
}

std::vector<std::size_t> random_subset(std::size_t d, std::size_t k, CounterRng& rng) {
    std::vector<std::size_t> perm(d);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) std::swap(perm[i], perm[i + rng.below(d - i)]);
    perm.resize(k);
    std::sort(perm.begin(), perm.end());
    return perm;
}

// Orthonormal basis (as columns) for the range of `a`, by modified Gram-Schmidt.
DenseMatrix orthonormal_basis(const DenseMatrix& a) {
    std::vector<Vector> q;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        Vector v = a.column(j);
        const double n0 = norm2(v);
        for (const auto& b : q) {
            const double c = dot(b, v);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * b[i];
        }
        const double n = norm2(v);
        if (n <= 1e-12 * std::max(n0, 1.0)) continue;
        for (double& x : v) x /= n;
        q.push_back(std::move(v));
    }
    DenseMatrix out(a.rows(), q.size());
    for (std::size_t j = 0; j < q.size(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) out(i, j) = q[j][i];
    return out;
}

DenseMatrix cross(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix out(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t p = 0; p < a.cols(); ++p)
            for (std::size_t q = 0; q < b.cols(); ++q) out(p, q) += a(i, p) * b(i, q);
    return out;
}

class Check {
public:
    explicit Check(std::string name) { c_.name = std::move(name); c_.worst_slack = kInf; }
    void add(double lhs, double bound) {
        ++c_.cases;
        const double slack = bound - lhs;
        c_.worst_slack = std::min(c_.worst_slack, slack);
        if (lhs > bound + 1e-12 * std::max(1.0, std::abs(bound))) c_.holds = false;
    }
    ConsequenceCheck done() const { return c_; }

private:
    ConsequenceCheck c_;
};

}  // namespace

std::uint64_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t c = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        const std::uint64_t num = n - k + i;
        // c * num / i stays exact because c * num is divisible by i
        if (c > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
        c = c * num / i;
    }
    return c;
}

double linear_ric(const RicReport& q) {
    const double up = std::sqrt(std::max(0.0, 1.0 + q.delta_upper)) - 1.0;
    const double lo = 1.0 - std::sqrt(std::max(0.0, 1.0 - q.delta_lower));
    return std::max({0.0, up, lo});
}

RicReport ric_exact(const DenseMatrix& phi, std::size_t r, const RicOptions& opts) {
    const std::size_t d = phi.cols();
    if (r == 0 || r > d) throw DomainError("ric_exact: order must lie in [1, d]");
    const std::uint64_t total = binomial(d, r);
    if (total > opts.cap)
        throw EnumerationCapError("ric_exact: C(" + std::to_string(d) + "," + std::to_string(r) +
                                  ") = " + std::to_string(total) + " supports exceeds the cap of " +
                                  std::to_string(opts.cap) + "; use ric_monte_carlo");
    const DenseMatrix g = gram(phi);
    const std::size_t firsts = d - r + 1;
    const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(firsts)));

    Best best;
    if (threads == 1) {
        best = scan(g, d, r, 0, firsts);
    } else {
        // contiguous ranges of first index with roughly equal support counts
        std::vector<std::size_t> cuts{0};
        const double share = static_cast<double>(total) / threads;
        double acc = 0.0;
        for (std::size_t f = 0; f < firsts && cuts.size() < threads; ++f) {
            acc += static_cast<double>(binomial(d - f - 1, r - 1));
            if (acc >= share * static_cast<double>(cuts.size())) cuts.push_back(f + 1);
        }
        if (cuts.back() != firsts) cuts.push_back(firsts);
        std::vector<Best> parts(cuts.size() - 1);
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
            pool.emplace_back([&, k] { parts[k] = scan(g, d, r, cuts[k], cuts[k + 1]); });
        for (auto& t : pool) t.join();
        for (const auto& p : parts) best.merge(p);
    }
    RicReport q = to_report(best, r, RicMode::exact);
    q.trials = static_cast<std::size_t>(total);
    return q;
}

RicReport ric_monte_carlo(const DenseMatrix& phi, std::size_t r, std::size_t trials,
                          std::uint64_t seed) {
    const std::size_t d = phi.cols();
    if (r == 0 || r > d) throw DomainError("ric_monte_carlo: order must lie in [1, d]");
    if (trials == 0) throw DomainError("ric_monte_carlo: trials must be at least 1");
    if (static_cast<std::uint64_t>(trials) >= binomial(d, r)) {
        RicReport q = ric_exact(phi, r, {std::numeric_limits<std::uint64_t>::max(), 1});
        q.mode = RicMode::monte_carlo;
        q.trials = trials;
        return q;
    }
    const DenseMatrix g = gram(phi);
    Best best;
    std::vector<std::size_t> rest(d - 1);
    for (std::size_t t = 0; t < trials; ++t) {
        CounterRng rng(derive_seed(seed, {t}));
        const std::size_t first = t % d;
        std::vector<std::size_t> pick = random_subset(d - 1, r - 1, rng);
        for (auto& i : pick)
            if (i >= first) ++i;  // skip over `first`
        pick.push_back(first);
        std::sort(pick.begin(), pick.end());
        best.offer(gram_extremes(g, pick), pick);
    }
    RicReport q = to_report(best, r, RicMode::monte_carlo);
    q.trials = trials;
    q.lower_bound = true;
    return q;
}

bool ConsequenceReport::all_hold() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.holds; });
}

const ConsequenceCheck& ConsequenceReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw DomainError("ConsequenceReport: no check named '" + name + "'");
}

ConsequenceReport check_ric_consequences(const DenseMatrix& phi, std::size_t s,
                                         const ConsequenceOptions& opts) {
    const std::size_t d = phi.cols(), m = phi.rows();
    if (s == 0 || s > d) throw DomainError("check_ric_consequences: s must lie in [1, d]");
    const std::size_t s2 = std::min(2 * s, d);

    std::map<std::size_t, RicReport> ric;
    const auto delta_at = [&](std::size_t r) -> const RicReport& {
        auto it = ric.find(r);
        if (it == ric.end()) it = ric.emplace(r, ric_exact(phi, r, opts.ric)).first;
        return it->second;
    };

    const RicReport& q2 = delta_at(s2);
    const double d2 = q2.delta;
    const double eps = linear_ric(q2);
    const double c1 = std::max(2.03 * eps, 2.0 * eps + eps * eps);
    const double c3 = eps < 1.0 ? std::max(2.2 * eps, c1 / ((1.0 - eps) * (1.0 - eps))) : kInf;
    const double ds = delta_at(s).delta;

    const DenseMatrix g = gram(phi);
    CounterRng rng(derive_seed(opts.seed, {fnv1a("consequences"), s}));
    const auto size_in = [&](std::size_t lo, std::size_t hi) {
        return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
    };

    ConsequenceReport rep;
    rep.s = s;

    {
        Check c("local_approximation");
        for (std::size_t k = 0; k < opts.cases; ++k) {
            const auto supp = random_subset(d, s, rng);
            Vector x(d, 0.0);
            for (auto i : supp) x[i] = rng.gaussian();
            const auto iset = random_subset(d, size_in(1, s), rng);
            const Vector y = adjoint_matvec(phi, matvec(phi, x));
            Vector diff;
            for (auto i : iset) diff.push_back(y[i] - x[i]);
            c.add(norm2(diff), c1 * norm2(x));
        }
        rep.checks.push_back(c.done());
    }
    {
        Check c("spectral_norm");
        for (std::size_t k = 0; k < opts.cases; ++k) {
            Vector z(m);
            for (auto& v : z) v = rng.gaussian();
            const auto iset = random_subset(d, size_in(1, s2), rng);
            const Vector y = adjoint_matvec(phi, z);
            Vector yi;
            for (auto i : iset) yi.push_back(y[i]);
            c.add(norm2(yi), (1.0 + eps) * norm2(z));
        }
        rep.checks.push_back(c.done());
    }
    if (s2 >= 2) {
        Check orth("almost_orthogonality");
        Check aorth("approx_orthogonality");
        for (std::size_t k = 0; k < opts.cases; ++k) {
            const auto both = random_subset(d, size_in(2, s2), rng);
            // split the sampled set at a random point into disjoint I and J
            std::vector<std::size_t> shuffled = both;
            for (std::size_t i = 0; i < shuffled.size(); ++i)
                std::swap(shuffled[i], shuffled[i + rng.below(shuffled.size() - i)]);
            const std::size_t cut = size_in(1, shuffled.size() - 1);
            const auto iset = IndexSet::from_unsorted({shuffled.begin(), shuffled.begin() + cut});
            const auto jset = IndexSet::from_unsorted({shuffled.begin() + cut, shuffled.end()});

            DenseMatrix block(iset.size(), jset.size());
            for (std::size_t p = 0; p < iset.size(); ++p)
                for (std::size_t q = 0; q < jset.size(); ++q) block(p, q) = g(iset[p], jset[q]);
            aorth.add(spectral_norm(block), d2);

            const DenseMatrix qi = orthonormal_basis(restrict_columns(phi, iset));
            const DenseMatrix qj = orthonormal_basis(restrict_columns(phi, jset));
            orth.add(spectral_norm(cross(qi, qj)), c3);
        }
        rep.checks.push_back(orth.done());
        rep.checks.push_back(aorth.done());
    }
    {
        Check c("rip_basic");
        for (std::size_t k = 0; k < opts.cases; ++k) {
            const auto t = IndexSet(random_subset(d, size_in(1, s2), rng));
            Vector xt(t.size());
            for (auto& v : xt) v = rng.gaussian();
            const double n2 = dot(xt, xt);
            const Vector y = matvec(restrict_columns(phi, t), xt);
            const double e2 = dot(y, y);
            c.add(e2, (1.0 + d2) * n2);
            c.add((1.0 - d2) * n2, e2);
        }
        rep.checks.push_back(c.done());
    }
    {
        Check c("corollary");
        for (std::size_t r = 1; 2 * r <= d; ++r) {
            if (binomial(d, 2 * r) > opts.corollary_cap) break;
            const double base = delta_at(2 * r).delta;
            for (std::size_t cc = 1; cc * r <= d; ++cc) {
                if (binomial(d, cc * r) > opts.corollary_cap) continue;
                c.add(delta_at(cc * r).delta, static_cast<double>(cc) * base);
            }
        }
        rep.checks.push_back(c.done());
    }
    {
        Check c("energy_bound");
        const double root = std::sqrt(1.0 + ds);
        for (std::size_t k = 0; k < opts.cases; ++k) {
            Vector x(d);
            for (auto& v : x) v = rng.gaussian();
            c.add(norm2(matvec(phi, x)),
                  root * (norm2(x) + norm1(x) / std::sqrt(static_cast<double>(s))));
        }
        rep.checks.push_back(c.done());
    }
    return rep;
}

}  // namespace cstk
