#pragma once

#include <dci/tn.hpp>

#include <cstdint>
#include <random>

namespace dci {

/// Random generators for exact configurations; all deterministic in the
/// engine state and exact over rationals.
namespace synth {

using Rng = std::mt19937_64;

Rational random_rational(Rng& rng, long lo = -3, long hi = 3, long den_max = 3);

/// Rational factors k_i > 1.
std::vector<Rational> random_k(Rng& rng, std::size_t count);

/// Directions in Z^m with no two cyclically-consecutive ones parallel.
std::vector<std::vector<Rational>> random_directions(Rng& rng, std::size_t count, std::size_t m);

/// Plain rational configuration with rank-one legs u_i (x) n_i summing to
/// zero. Distinctness of the assembled matrices is guaranteed by redraw.
TnConfig<Rational> random_tn(Rng& rng, std::size_t count, std::size_t n, std::size_t m);

/// Stacked configuration with wave-cone increments sharing the X-block
/// directions; no inclusion-set structure imposed.
TnPrimeConfig<Rational> random_tn_prime(Rng& rng, std::size_t count, std::size_t n, std::size_t m);

/// Stacked configuration with P = 0 whose Z-block satisfies
/// Z_i = X_i^T Y_i - beta_i c_i Id exactly: the inclusion-set structure
/// used by the trace machinery. Returns the witness plus (beta, c).
struct InclusionInstance {
    TnPrimeConfig<Rational> config;
    std::vector<Rational> beta;
    std::vector<Rational> c;
};
InclusionInstance random_inclusion_instance(Rng& rng, std::size_t count, std::size_t n,
                                            std::size_t m);

/// Basis of the orthogonal complement of a direction, as exact rows.
std::vector<std::vector<Rational>> orthogonal_complement(const std::vector<Rational>& v);

} // namespace synth
} // namespace dci
