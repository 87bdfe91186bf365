#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "asymcap/dmc.hpp"
#include "asymcap/rng.hpp"

namespace asymcap {

using BitVec = std::vector<std::uint8_t>;

// x^T = u^T G_n over GF(2) with G_n the Kronecker power of [[1,0],[1,1]];
// self-inverse, n log n butterflies. Throws unless |u| is a power of two.
BitVec polar_transform(const BitVec& u);
void polar_transform_inplace(BitVec& u);

struct BitDistribution {
    double prob_zero = 0.5;
    double prob_one = 0.5;
    int argmax() const { return prob_zero >= prob_one ? 0 : 1; }  // ties -> 0
};

// Successive evaluation of P(U_i | U^{1:i-1}, evidence) where U = X^T G_n and
// the per-position evidence pairs are set at the leaves (prior only, or prior
// times channel likelihood). Indices must be visited in order: next(i) yields
// the conditional pair, feed(i, bit) commits the decision. One full pass
// costs n log n pair combines; the per-level sweeps run on the kernel backend.
class ScEngine {
public:
    explicit ScEngine(int n);

    int block_length() const { return n_; }
    void set_leaf(int pos, double q0, double q1);
    BitDistribution next(int i);
    void feed(int i, int bit);

private:
    int n_;
    int m_;
    int phase_ = 0;  // next index expected; wraps after the last feed
    std::vector<std::vector<double>> p0_, p1_;        // per level, 2^l entries
    std::vector<std::vector<unsigned char>> dec_;     // even-phase decisions
    std::vector<unsigned char> cur_, nxt_;            // feed scratch
};

struct SelectionPolicy {
    enum class Kind { threshold, rate_targeted };
    Kind kind = Kind::threshold;
    // Desk-scale polarization cut: indices with Z >= 1 - delta count as
    // high-entropy, Z <= delta as deterministic. 0.25 keeps the set
    // fractions on their asymptotic targets at n ~ 4096.
    double delta = 0.25;
    double info_rate = 0.0;   // rate_targeted: |info| = floor(rate * n)

    static SelectionPolicy threshold(double delta);
    static SelectionPolicy rate_targeted(double info_rate);

    nlohmann::ordered_json to_json() const;
    static SelectionPolicy from_json(const nlohmann::json& j);
};

// Polar index sets and reliability estimates for one (channel, alpha, n).
// Build once with build_context (Monte Carlo), classify under a policy, and
// reuse; the object is immutable in normal use and cheap to copy.
struct PolarContext {
    int n = 0;
    int m = 0;
    double alpha = 0.5;  // P(X = 1)
    Dmc channel;
    int samples = 0;
    std::uint64_t seed = 0;

    std::vector<double> z_source;   // Z(U_i | U^{1:i-1})
    std::vector<double> z_channel;  // Z(U_i | U^{1:i-1}, Y^{1:n})

    SelectionPolicy policy;
    std::vector<int> h_x, l_x, h_xy, l_xy, info_set, f_r, f_d;

    enum Role : unsigned char { role_info = 0, role_fr = 1, role_fd = 2 };
    std::vector<unsigned char> role;    // per index
    std::vector<unsigned char> in_l_x;  // membership mask for compression

    explicit PolarContext(Dmc ch) : channel(std::move(ch)) {}

    int info_size() const { return static_cast<int>(info_set.size()); }
    // Union-bound reliability proxy: sum of channel-side Z over the info set.
    double info_z_sum() const;

    nlohmann::ordered_json to_json() const;
    static PolarContext from_json(const nlohmann::json& j);
};

// Monte Carlo construction: samples i.i.d. (X,Y) blocks, walks the true
// trajectory through both conditional recursions, and averages the
// Bhattacharyya summand 2*sqrt(p0*p1) per index. Sets are left empty;
// call classify() afterwards.
PolarContext build_context(const Dmc& ch, double alpha, int n, int samples,
                           std::uint64_t seed);

void classify(PolarContext& ctx, const SelectionPolicy& policy);

// One-shot conditional distribution: evidence from (ch, y) when given,
// otherwise the prior-only source side. prev_decisions supplies u^{1:i-1}.
BitDistribution sc_bit_distribution(int n, double alpha, const Dmc* ch,
                                    const std::vector<int>* y,
                                    const BitVec& prev_decisions, int index);

// Honda-Yamamoto integrated encoder/decoder. The shared seed drives the
// frozen-random positions on both sides; deterministic-frozen positions are
// reconstructed from the source-side recursion alone.
BitVec hy_encode(const PolarContext& ctx, const BitVec& message,
                 std::uint64_t shared_seed);

struct HyDecodeResult {
    BitVec message;
    BitVec u;
    BitVec x;
};
HyDecodeResult hy_decode(const PolarContext& ctx, const std::vector<int>& y,
                         std::uint64_t shared_seed);

// Same decoder with caller-supplied leaf evidence pairs (already including
// any prior weighting), for composed channels whose outputs are not plain
// symbols of ctx.channel.
HyDecodeResult hy_decode_with_evidence(
    const PolarContext& ctx, const std::vector<std::pair<double, double>>& leaves,
    std::uint64_t shared_seed);

// Lossless source coding pair: compress keeps u outside l_x, decompress
// rebuilds the l_x positions with the source-side recursion. decompress is
// also the inverse map that turns uniform payload bits into a biased block.
BitVec source_compress(const PolarContext& ctx, const BitVec& x);
BitVec source_decompress(const PolarContext& ctx, const BitVec& payload);

// Leaf evidence helper shared by the decoders: pair proportional to
// (P(X=0) W(y|0), P(X=1) W(y|1)) for every output symbol y.
std::vector<std::pair<double, double>> channel_leaf_table(const Dmc& ch,
                                                          double alpha);

}  // namespace asymcap
