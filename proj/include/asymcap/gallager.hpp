#pragma once

#include <cstdint>
#include <vector>

#include "asymcap/dmc.hpp"
#include "asymcap/polar.hpp"

namespace asymcap {

// Rational approximation p~(x) = counts[x] / d_lcd of a target distribution,
// with total variation below the requested delta.
struct RationalApprox {
    InputDist target;
    InputDist approx;
    std::vector<long long> counts;  // p~(x) * d_lcd, integers
    long long d_lcd = 1;
    double tv_distance = 0;
    bool binary = false;
    int t = 0;  // d_lcd = 2^t when binary
};

// Denominator sweep, smallest first; the rounding residue goes to the
// largest-mass symbol. delta must lie in (0, 1/8).
RationalApprox approximate(const InputDist& p_star, double delta, bool binary);

// Deterministic many-to-one map from the extended alphabet onto X, assigned
// in canonical blocks ordered by x. A uniform input induces approx exactly.
struct Mapper {
    enum class Kind { qary, binary };
    Kind kind = Kind::qary;
    int extended_size = 0;  // |V|, = 2^t for binary
    int t = 0;
    std::vector<int> table;           // v (or packed u_{1:t}, u_1 = MSB) -> x
    std::vector<int> preimage_sizes;  // per x

    int map(int v) const { return table[static_cast<std::size_t>(v)]; }
};

Mapper build_mapper(const RationalApprox& ra);

// Realizes a q-ary mapper as binary chain levels. Only extended alphabets of
// size 2^r can be coded natively; anything else is a configuration error.
Mapper as_binary_levels(const Mapper& m);

// W'(y|v) = W(y|f(v)).
Dmc induced_channel(const Dmc& ch, const Mapper& m);

// W''_j(y, u_{1:j-1} | u_j) with the output pair flattened as
// y * 2^{j-1} + prefix (u_1 the most significant prefix bit).
std::vector<Dmc> synthetic_channels(const Dmc& ch, const Mapper& m);

struct MiBounds {
    double tv = 0;
    double actual_gap = 0;
    double bound_y = 0;  // 3 d log2|Y| + h2(d)
    double bound_x = 0;  // 7 d log2|X| + h2(d) + h2(4d)
};
MiBounds mi_perturbation_bounds(const Dmc& ch, const InputDist& p_star,
                                const InputDist& p);

struct EntropyBound {
    double tv = 0;
    double actual = 0;
    double bound = 0;  // d log2(|X|-1) + h2(d)
};
EntropyBound entropy_diff_bound(const InputDist& p, const InputDist& q);

// End-to-end pipeline: a binary mapper chain with one polar component code
// per level, decoded successively with hard re-encoded estimates.
struct GallagerScheme {
    Mapper mapper;
    Dmc channel;
    int n = 0;
    double rate = 0;  // information bits per channel use
    std::vector<PolarContext> levels;
    double mapped_mi = 0;  // I(X;Y) at the approximated input

    explicit GallagerScheme(Dmc ch) : channel(std::move(ch)) {}
};

// Builds contexts for every synthetic channel at the uniform input; each
// level carries floor(backoff * Is(W''_j) * n) information bits. A q-ary
// approximation is accepted only when |V| is a power of two.
GallagerScheme build_gallager_scheme(const Dmc& ch, double delta, int n,
                                     double rate_backoff, int samples,
                                     std::uint64_t seed);

int gallager_message_length(const GallagerScheme& s);

std::vector<int> gallager_encode(const GallagerScheme& s, const BitVec& message,
                                 std::uint64_t shared_seed);

BitVec gallager_decode(const GallagerScheme& s, const std::vector<int>& y,
                       std::uint64_t shared_seed);

}  // namespace asymcap
