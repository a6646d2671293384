#include "cstk/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "cstk/error.hpp"
#include "cstk/rng.hpp"

namespace cstk {

namespace {

// First k entries of a Fisher-Yates shuffle of 0..n-1, in draw order.
std::vector<std::size_t> partial_shuffle(std::size_t n, std::size_t k, CounterRng& rng) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(perm[i], perm[j]);
    }
    perm.resize(k);
    return perm;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        out.push_back(cell);
    }
    return out;
}

}  // namespace

std::string_view family_name(Family f) {
    switch (f) {
        case Family::gaussian: return "gaussian";
        case Family::bernoulli: return "bernoulli";
        case Family::partial_dct: return "partial_dct";
    }
    return "?";
}

Family parse_family(std::string_view name) {
    if (name == "gaussian") return Family::gaussian;
    if (name == "bernoulli") return Family::bernoulli;
    if (name == "partial_dct" || name == "dct") return Family::partial_dct;
    throw DomainError("unknown ensemble '" + std::string(name) + "'");
}

void EnsembleSpec::validate() const {
    if (m < 1 || d < 1) throw DomainError("EnsembleSpec: m and d must be positive");
    if (family == Family::partial_dct && m > d)
        throw DomainError("EnsembleSpec: partial_dct needs m <= d");
}

void SignalSpec::validate() const {
    if (s > d) throw DomainError("SignalSpec: sparsity exceeds dimension");
    if (kind == SignalKind::compressible && !(p > 0.0 && p < 1.0))
        throw DomainError("SignalSpec: compressible decay p must lie in (0,1)");
}

DenseMatrix dct_matrix(std::size_t d) {
    DenseMatrix c(d, d);
    const double a0 = std::sqrt(1.0 / static_cast<double>(d));
    const double ak = std::sqrt(2.0 / static_cast<double>(d));
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t n = 0; n < d; ++n)
            c(k, n) = (k == 0 ? a0 : ak) *
                      std::cos(std::numbers::pi * static_cast<double>((2 * n + 1) * k) /
                               (2.0 * static_cast<double>(d)));
    return c;
}

DenseMatrix gen_matrix(const EnsembleSpec& spec) {
    spec.validate();
    CounterRng rng(spec.seed);
    const double md = static_cast<double>(spec.m);
    switch (spec.family) {
        case Family::gaussian: {
            const double c = spec.normalize ? 1.0 / std::sqrt(md) : 1.0;
            std::vector<double> e(spec.m * spec.d);
            for (double& v : e) v = c * rng.gaussian();
            return DenseMatrix(spec.m, spec.d, std::move(e));
        }
        case Family::bernoulli: {
            const double c = spec.normalize ? 1.0 / std::sqrt(md) : 1.0;
            std::vector<double> e(spec.m * spec.d);
            for (double& v : e) v = c * rng.sign();
            return DenseMatrix(spec.m, spec.d, std::move(e));
        }
        case Family::partial_dct: {
            auto rows = partial_shuffle(spec.d, spec.m, rng);
            std::sort(rows.begin(), rows.end());
            const double c = spec.normalize ? std::sqrt(static_cast<double>(spec.d) / md) : 1.0;
            const DenseMatrix full = dct_matrix(spec.d);
            DenseMatrix out(spec.m, spec.d);
            for (std::size_t i = 0; i < spec.m; ++i) {
                const auto src = full.row(rows[i]);
                auto dst = out.row(i);
                for (std::size_t j = 0; j < spec.d; ++j) dst[j] = c * src[j];
            }
            return out;
        }
    }
    throw DomainError("gen_matrix: unknown family");
}

SparseVector gen_signal(const SignalSpec& spec) {
    spec.validate();
    CounterRng rng(spec.seed);
    const auto support = partial_shuffle(spec.d, spec.s, rng);
    SparseVector x(spec.d);
    for (std::size_t i = 0; i < support.size(); ++i) {
        double v = 1.0;
        if (spec.kind == SignalKind::compressible) {
            v = std::pow(static_cast<double>(i + 1), -1.0 / spec.p) * rng.sign();
        } else if (spec.random_signs) {
            v = rng.sign();
        }
        x.set(support[i], v);
    }
    return x;
}

Vector gen_noise(const NoiseSpec& spec) {
    if (!(spec.target_norm >= 0.0)) throw DomainError("gen_noise: target norm must be nonnegative");
    Vector e(spec.dim, 0.0);
    if (spec.target_norm == 0.0 || spec.dim == 0) return e;
    CounterRng rng(spec.seed);
    for (double& v : e) v = rng.gaussian();
    const double n = norm2(e);
    for (double& v : e) v *= spec.target_norm / n;
    return e;
}

Vector relative_noise(std::span<const double> u_clean, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0)) throw DomainError("relative_noise: fraction must be nonnegative");
    const double un = norm2(u_clean);
    if (fraction > 0.0 && un == 0.0)
        throw DomainError("relative_noise: zero measurement vector gives no noise scale");
    return gen_noise({u_clean.size(), fraction * un, seed});
}

void write_matrix_csv(std::ostream& os, const DenseMatrix& a, std::string_view kind, std::uint64_t seed) {
    os << "kind,m,d,seed\n" << kind << ',' << a.rows() << ',' << a.cols() << ',' << seed << '\n';
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto r = a.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << fmt_double(r[j]);
        os << '\n';
    }
}

void write_signal_csv(std::ostream& os, const SparseVector& x, std::uint64_t seed) {
    write_matrix_csv(os, DenseMatrix(1, x.dim(), x.dense()), "signal", seed);
}

CsvMatrix read_matrix_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw DomainError("matrix csv: empty input");
    const auto header = split_csv(line);
    if (header != std::vector<std::string>{"kind", "m", "d", "seed"})
        throw DomainError("matrix csv: header must be 'kind,m,d,seed'");
    if (!std::getline(is, line)) throw DomainError("matrix csv: missing metadata row");
    const auto meta = split_csv(line);
    if (meta.size() != 4) throw DomainError("matrix csv: metadata row needs 4 fields");
    CsvMatrix out;
    std::size_t m = 0, d = 0;
    try {
        out.kind = meta[0];
        m = std::stoull(meta[1]);
        d = std::stoull(meta[2]);
        out.seed = std::stoull(meta[3]);
    } catch (const std::exception&) {
        throw DomainError("matrix csv: malformed metadata row");
    }
    std::vector<double> entries;
    entries.reserve(m * d);
    for (std::size_t i = 0; i < m; ++i) {
        if (!std::getline(is, line)) throw DomainError("matrix csv: expected " + std::to_string(m) + " rows");
        const auto cells = split_csv(line);
        if (cells.size() != d)
            throw DomainError("matrix csv: row " + std::to_string(i) + " has " +
                              std::to_string(cells.size()) + " values, expected " + std::to_string(d));
        for (const auto& c : cells) {
            try {
                entries.push_back(std::stod(c));
            } catch (const std::exception&) {
                throw DomainError("matrix csv: bad number '" + c + "'");
            }
        }
    }
    out.matrix = DenseMatrix(m, d, std::move(entries));
    return out;
}

}  // namespace cstk
