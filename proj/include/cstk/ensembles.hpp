#pragma once

// Seeded measurement matrices, test signals and noise.
//
// CSV layout shared by matrices and signals:
//   kind,m,d,seed
//   <kind>,<m>,<d>,<seed>
//   then m lines of d comma-separated values (%.17g, round-trips exactly).
// A signal is written as kind "signal" with m = 1.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "cstk/linalg.hpp"
#include "cstk/sparse_vector.hpp"

namespace cstk {

enum class Family { gaussian, bernoulli, partial_dct };

std::string_view family_name(Family f);
/// Throws DomainError for an unknown name.
Family parse_family(std::string_view name);

struct EnsembleSpec {
    Family family = Family::gaussian;
    std::size_t m = 1;
    std::size_t d = 1;
    std::uint64_t seed = 0;
    /// gaussian/bernoulli: scale by 1/sqrt(m). partial_dct: scale by sqrt(d/m).
    bool normalize = true;

    void validate() const;
};

enum class SignalKind { flat, compressible };

struct SignalSpec {
    std::size_t d = 1;
    std::size_t s = 0;
    SignalKind kind = SignalKind::flat;
    /// Decay exponent for compressible signals: |x| = i^(-1/p), p in (0,1).
    double p = 0.5;
    std::uint64_t seed = 0;
    /// Flat signals only; compressible signals always carry random signs.
    bool random_signs = false;

    void validate() const;
};

struct NoiseSpec {
    std::size_t dim = 0;
    double target_norm = 0.0;
    std::uint64_t seed = 0;
};

/// Orthonormal d x d DCT-II matrix.
DenseMatrix dct_matrix(std::size_t d);

DenseMatrix gen_matrix(const EnsembleSpec& spec);

/// Support is the first s draws of a Fisher-Yates shuffle; the i-th selected
/// coordinate (1-based, selection order) gets 1 (flat) or +-i^(-1/p).
SparseVector gen_signal(const SignalSpec& spec);

/// Gaussian direction rescaled to exactly target_norm.
Vector gen_noise(const NoiseSpec& spec);

/// Gaussian direction rescaled to fraction * ||u_clean||.
Vector relative_noise(std::span<const double> u_clean, double fraction, std::uint64_t seed);

struct CsvMatrix {
    std::string kind;
    std::uint64_t seed = 0;
    DenseMatrix matrix;
};

void write_matrix_csv(std::ostream& os, const DenseMatrix& a, std::string_view kind, std::uint64_t seed);
void write_signal_csv(std::ostream& os, const SparseVector& x, std::uint64_t seed);
/// Throws DomainError on malformed input.
CsvMatrix read_matrix_csv(std::istream& is);

}  // namespace cstk
