#include "asymcap/gallager.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace asymcap {

namespace {

// Round p* to counts over a fixed denominator; the residue lands on the
// largest-mass symbol. Returns false when a count would go negative.
bool round_counts(const InputDist& p, long long d, std::vector<long long>& counts) {
    const int k = p.size();
    counts.assign(k, 0);
    long long sum = 0;
    for (int x = 0; x < k; ++x) {
        counts[x] = std::llround(p[x] * static_cast<double>(d));
        sum += counts[x];
    }
    if (sum != d) {
        int big = 0;
        for (int x = 1; x < k; ++x)
            if (p[x] > p[big]) big = x;
        counts[big] -= sum - d;
        if (counts[big] < 0) return false;
    }
    return true;
}

double tv_to_counts(const InputDist& p, const std::vector<long long>& counts,
                    long long d) {
    double s = 0;
    for (int x = 0; x < p.size(); ++x)
        s += std::abs(p[x] - static_cast<double>(counts[x]) / static_cast<double>(d));
    return 0.5 * s;
}

}  // namespace

RationalApprox approximate(const InputDist& p_star, double delta, bool binary) {
    if (!(delta > 0) || delta >= 0.125)
        throw std::invalid_argument("approximate: delta must lie in (0, 1/8)");

    RationalApprox ra;
    ra.target = p_star;
    ra.binary = binary;
    std::vector<long long> counts;

    const long long cap = 1ll << 24;
    int t = 0;
    for (long long d = 1; d <= cap; binary ? (d <<= 1, ++t) : ++d) {
        if (!round_counts(p_star, d, counts)) continue;
        const double tv = tv_to_counts(p_star, counts, d);
        if (tv < delta) {
            ra.counts = counts;
            ra.d_lcd = d;
            ra.t = binary ? t : 0;
            ra.tv_distance = tv;
            std::vector<double> approx(p_star.size());
            for (int x = 0; x < p_star.size(); ++x)
                approx[x] = static_cast<double>(counts[x]) / static_cast<double>(d);
            ra.approx = InputDist(std::move(approx));
            return ra;
        }
    }
    throw std::runtime_error("approximate: no denominator met the target");
}

Mapper build_mapper(const RationalApprox& ra) {
    Mapper m;
    m.kind = ra.binary ? Mapper::Kind::binary : Mapper::Kind::qary;
    m.extended_size = static_cast<int>(ra.d_lcd);
    m.t = ra.t;
    m.table.reserve(m.extended_size);
    m.preimage_sizes.assign(ra.counts.size(), 0);
    for (std::size_t x = 0; x < ra.counts.size(); ++x) {
        m.preimage_sizes[x] = static_cast<int>(ra.counts[x]);
        for (long long c = 0; c < ra.counts[x]; ++c)
            m.table.push_back(static_cast<int>(x));
    }
    return m;
}

Mapper as_binary_levels(const Mapper& m) {
    if (m.kind == Mapper::Kind::binary) return m;
    if (m.extended_size <= 0 || (m.extended_size & (m.extended_size - 1)) != 0)
        throw std::invalid_argument(
            "as_binary_levels: q-ary codes are only supported for |V| = 2^r");
    Mapper b = m;
    b.kind = Mapper::Kind::binary;
    b.t = std::countr_zero(static_cast<unsigned>(m.extended_size));
    return b;
}

Dmc induced_channel(const Dmc& ch, const Mapper& m) {
    const int ny = ch.output_size();
    std::vector<double> w(static_cast<std::size_t>(m.extended_size) * ny);
    for (int v = 0; v < m.extended_size; ++v)
        for (int y = 0; y < ny; ++y)
            w[static_cast<std::size_t>(v) * ny + y] = ch.at(m.map(v), y);
    return Dmc(m.extended_size, ny, std::move(w));
}

std::vector<Dmc> synthetic_channels(const Dmc& ch, const Mapper& m) {
    if (m.kind != Mapper::Kind::binary)
        throw std::invalid_argument("synthetic_channels: binary mapper required");
    const int t = m.t;
    const int ny = ch.output_size();
    std::vector<Dmc> out;
    out.reserve(t);
    const double scale = std::pow(2.0, -(t - 1));
    for (int j = 1; j <= t; ++j) {
        const int prefixes = 1 << (j - 1);
        const int suffixes = 1 << (t - j);
        const int cols = ny * prefixes;
        std::vector<double> w(2 * static_cast<std::size_t>(cols), 0.0);
        for (int b = 0; b < 2; ++b)
            for (int y = 0; y < ny; ++y)
                for (int pre = 0; pre < prefixes; ++pre) {
                    double sum = 0;
                    for (int suf = 0; suf < suffixes; ++suf) {
                        const int v = (pre << (t - j + 1)) | (b << (t - j)) | suf;
                        sum += ch.at(m.map(v), y);
                    }
                    w[static_cast<std::size_t>(b) * cols + y * prefixes + pre] =
                        scale * sum;
                }
        out.emplace_back(2, cols, std::move(w));
    }
    return out;
}

MiBounds mi_perturbation_bounds(const Dmc& ch, const InputDist& p_star,
                                const InputDist& p) {
    MiBounds r;
    r.tv = total_variation(p_star, p);
    if (r.tv >= 0.125)
        throw std::invalid_argument("mi_perturbation_bounds: TV must be below 1/8");
    r.actual_gap = std::abs(mutual_information(ch, p_star) - mutual_information(ch, p));
    const double d = r.tv;
    r.bound_y = 3 * d * std::log2(static_cast<double>(ch.output_size())) +
                binary_entropy(d);
    r.bound_x = 7 * d * std::log2(static_cast<double>(ch.input_size())) +
                binary_entropy(d) + binary_entropy(4 * d);
    return r;
}

EntropyBound entropy_diff_bound(const InputDist& p, const InputDist& q) {
    EntropyBound r;
    r.tv = total_variation(p, q);
    if (r.tv > 0.5 + 1e-12)
        throw std::invalid_argument("entropy_diff_bound: TV must be at most 1/2");
    r.actual = std::abs(entropy_bits(p) - entropy_bits(q));
    const int k = p.size();
    r.bound = (k > 1 ? r.tv * std::log2(static_cast<double>(k - 1)) : 0.0) +
              binary_entropy(r.tv);
    return r;
}

GallagerScheme build_gallager_scheme(const Dmc& ch, double delta, int n,
                                     double rate_backoff, int samples,
                                     std::uint64_t seed) {
    if (rate_backoff <= 0 || rate_backoff > 1)
        throw std::invalid_argument(
            "build_gallager_scheme: component rate may not exceed the estimated "
            "symmetric capacity");
    auto rep = capacity(ch, 1e-9);
    auto ra = approximate(rep.optimal_input, delta, /*binary=*/true);

    GallagerScheme s(ch);
    s.mapper = build_mapper(ra);
    s.n = n;
    s.mapped_mi = mutual_information(ch, ra.approx);

    auto syn = synthetic_channels(ch, s.mapper);
    double total_bits = 0;
    for (std::size_t j = 0; j < syn.size(); ++j) {
        const double is = mutual_information(syn[j], InputDist::uniform(2));
        const double rate = rate_backoff * is;
        auto ctx = build_context(syn[j], 0.5, n, samples,
                                 derive_seed(seed, {0x9a11, j}));
        classify(ctx, SelectionPolicy::rate_targeted(rate));
        total_bits += ctx.info_size();
        s.levels.push_back(std::move(ctx));
    }
    s.rate = total_bits / n;
    return s;
}

int gallager_message_length(const GallagerScheme& s) {
    int k = 0;
    for (const auto& ctx : s.levels) k += ctx.info_size();
    return k;
}

std::vector<int> gallager_encode(const GallagerScheme& s, const BitVec& message,
                                 std::uint64_t shared_seed) {
    if (static_cast<int>(message.size()) != gallager_message_length(s))
        throw std::invalid_argument("gallager_encode: message length mismatch");
    const int t = s.mapper.t;
    std::vector<BitVec> level_words;
    level_words.reserve(t);
    std::size_t off = 0;
    for (int j = 0; j < t; ++j) {
        const auto& ctx = s.levels[j];
        BitVec msg(message.begin() + off, message.begin() + off + ctx.info_size());
        off += ctx.info_size();
        level_words.push_back(hy_encode(ctx, msg,
                                        derive_seed(shared_seed, {0xe, static_cast<std::uint64_t>(j)})));
    }
    std::vector<int> x(s.n);
    for (int i = 0; i < s.n; ++i) {
        int v = 0;
        for (int j = 0; j < t; ++j) v = (v << 1) | level_words[j][i];
        x[i] = s.mapper.map(v);
    }
    return x;
}

BitVec gallager_decode(const GallagerScheme& s, const std::vector<int>& y,
                       std::uint64_t shared_seed) {
    const int t = s.mapper.t;
    const int n = s.n;
    if (static_cast<int>(y.size()) != n)
        throw std::invalid_argument("gallager_decode: received length mismatch");
    BitVec message;
    std::vector<int> prefix(n, 0);
    std::vector<std::pair<double, double>> leaves(n);
    for (int j = 1; j <= t; ++j) {
        const int suffixes = 1 << (t - j);
        for (int i = 0; i < n; ++i) {
            double q[2] = {0, 0};
            for (int b = 0; b < 2; ++b)
                for (int suf = 0; suf < suffixes; ++suf) {
                    const int v = (prefix[i] << (t - j + 1)) | (b << (t - j)) | suf;
                    q[b] += s.channel.at(s.mapper.map(v), y[i]);
                }
            // A wrong prefix estimate can make both hypotheses impossible;
            // fall back to uninformative evidence instead of dividing by zero.
            if (q[0] + q[1] <= 0) q[0] = q[1] = 0.5;
            leaves[i] = {q[0], q[1]};
        }
        auto dec = hy_decode_with_evidence(
            s.levels[j - 1], leaves,
            derive_seed(shared_seed, {0xe, static_cast<std::uint64_t>(j - 1)}));
        message.insert(message.end(), dec.message.begin(), dec.message.end());
        for (int i = 0; i < n; ++i) prefix[i] = (prefix[i] << 1) | dec.x[i];
    }
    return message;
}

}  // namespace asymcap
