#include "asymcap/polar.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "asymcap/kernels.hpp"

namespace asymcap {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void require_pow2(int n) {
    if (!is_pow2(n))
        throw std::invalid_argument("polar: block length must be a power of two");
}

int worker_count() {
    if (const char* env = std::getenv("ASYMCAP_WORKERS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

void polar_transform_inplace(BitVec& u) {
    const int n = static_cast<int>(u.size());
    require_pow2(n);
    const auto& ops = kernels::active_ops();
    for (int len = 1; len < n; len <<= 1)
        for (int b = 0; b < n; b += 2 * len)
            ops.xor_bytes(u.data() + b, u.data() + b, u.data() + b + len,
                          static_cast<std::size_t>(len));
}

BitVec polar_transform(const BitVec& u) {
    BitVec x = u;
    polar_transform_inplace(x);
    return x;
}

ScEngine::ScEngine(int n) : n_(n) {
    require_pow2(n);
    m_ = std::countr_zero(static_cast<unsigned>(n));
    p0_.resize(m_ + 1);
    p1_.resize(m_ + 1);
    dec_.resize(m_ + 1);
    for (int l = 0; l <= m_; ++l) {
        p0_[l].assign(std::size_t{1} << l, 0.5);
        p1_[l].assign(std::size_t{1} << l, 0.5);
        dec_[l].assign(std::size_t{1} << l, 0);
    }
    cur_.assign(n_, 0);
    nxt_.assign(n_, 0);
}

void ScEngine::set_leaf(int pos, double q0, double q1) {
    double s = q0 + q1;
    if (!(s > 0)) throw std::invalid_argument("ScEngine: leaf pair has no mass");
    p0_[m_][pos] = q0 / s;
    p1_[m_][pos] = q1 / s;
}

BitDistribution ScEngine::next(int i) {
    if (i != phase_)
        throw std::logic_error("ScEngine: indices must be visited in order");
    const auto& ops = kernels::active_ops();
    const int top = i == 0 ? m_ - 1
                           : std::min(std::countr_zero(static_cast<unsigned>(i)),
                                      m_ - 1);
    for (int l = top; l >= 0; --l) {
        const std::size_t half = std::size_t{1} << l;
        const double* a0 = p0_[l + 1].data();
        const double* a1 = p1_[l + 1].data();
        const double* b0 = a0 + half;
        const double* b1 = a1 + half;
        if (((i >> l) & 1) == 0)
            ops.check_combine(a0, a1, b0, b1, p0_[l].data(), p1_[l].data(), half);
        else
            ops.bit_combine(a0, a1, b0, b1, dec_[l].data(), p0_[l].data(),
                            p1_[l].data(), half);
    }
    return {p0_[0][0], p1_[0][0]};
}

void ScEngine::feed(int i, int bit) {
    if (i != phase_)
        throw std::logic_error("ScEngine: feed must follow next for the same index");
    phase_ = i + 1 < n_ ? i + 1 : 0;  // wraps for engine reuse across blocks
    cur_[0] = static_cast<unsigned char>(bit & 1);
    int l = 0, j = i;
    const auto& ops = kernels::active_ops();
    while ((j & 1) && l < m_) {
        const std::size_t width = std::size_t{1} << l;
        // V child gets even-phase xor odd-phase decision, W child the odd one.
        ops.xor_bytes(nxt_.data(), dec_[l].data(), cur_.data(), width);
        std::copy(cur_.begin(), cur_.begin() + static_cast<long>(width),
                  nxt_.begin() + static_cast<long>(width));
        cur_.swap(nxt_);
        ++l;
        j >>= 1;
    }
    if (l < m_)
        std::copy(cur_.begin(), cur_.begin() + (long{1} << l), dec_[l].begin());
}

SelectionPolicy SelectionPolicy::threshold(double delta) {
    SelectionPolicy p;
    p.kind = Kind::threshold;
    p.delta = delta;
    return p;
}

SelectionPolicy SelectionPolicy::rate_targeted(double info_rate) {
    SelectionPolicy p;
    p.kind = Kind::rate_targeted;
    p.info_rate = info_rate;
    return p;
}

nlohmann::ordered_json SelectionPolicy::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = kind == Kind::threshold ? "threshold" : "rate_targeted";
    j["delta"] = delta;
    j["info_rate"] = info_rate;
    return j;
}

SelectionPolicy SelectionPolicy::from_json(const nlohmann::json& j) {
    SelectionPolicy p;
    p.kind = j.at("kind").get<std::string>() == "threshold" ? Kind::threshold
                                                            : Kind::rate_targeted;
    p.delta = j.at("delta").get<double>();
    p.info_rate = j.at("info_rate").get<double>();
    return p;
}

double PolarContext::info_z_sum() const {
    double s = 0;
    for (int i : info_set) s += z_channel[i];
    return s;
}

std::vector<std::pair<double, double>> channel_leaf_table(const Dmc& ch,
                                                          double alpha) {
    std::vector<std::pair<double, double>> table(ch.output_size());
    for (int y = 0; y < ch.output_size(); ++y)
        table[y] = {(1 - alpha) * ch.at(0, y), alpha * ch.at(1, y)};
    return table;
}

PolarContext build_context(const Dmc& ch, double alpha, int n, int samples,
                           std::uint64_t seed) {
    require_pow2(n);
    if (ch.input_size() != 2)
        throw std::invalid_argument("build_context: binary-input channel required");
    if (samples < 100)
        throw std::invalid_argument("build_context: need at least 100 samples");
    if (alpha <= 0 || alpha >= 1)
        throw std::invalid_argument("build_context: alpha must be in (0,1)");

    PolarContext ctx(ch);
    ctx.n = n;
    ctx.m = std::countr_zero(static_cast<unsigned>(n));
    ctx.alpha = alpha;
    ctx.samples = samples;
    ctx.seed = seed;

    const auto leaf_table = channel_leaf_table(ch, alpha);

    constexpr int block_size = 256;
    const int num_blocks = (samples + block_size - 1) / block_size;
    std::vector<std::vector<double>> zsrc_part(num_blocks), zch_part(num_blocks);

    auto run_block = [&](int b) {
        ScEngine src(n), chan(n);
        std::vector<double>& zs = zsrc_part[b];
        std::vector<double>& zc = zch_part[b];
        zs.assign(n, 0.0);
        zc.assign(n, 0.0);
        BitVec x(n), u(n);
        const int lo = b * block_size;
        const int hi = std::min(samples, lo + block_size);
        for (int s = lo; s < hi; ++s) {
            Rng rng(derive_seed(seed, {0x706f6c61u, static_cast<std::uint64_t>(s)}));
            for (int j = 0; j < n; ++j) {
                x[j] = rng.bernoulli(alpha) ? 1 : 0;
                int y = ch.sample(x[j], rng);
                const auto& q = leaf_table[y];
                chan.set_leaf(j, q.first, q.second);
                src.set_leaf(j, 1 - alpha, alpha);
            }
            u = x;
            polar_transform_inplace(u);
            for (int i = 0; i < n; ++i) {
                const auto ds = src.next(i);
                const auto dc = chan.next(i);
                zs[i] += 2.0 * std::sqrt(ds.prob_zero * ds.prob_one);
                zc[i] += 2.0 * std::sqrt(dc.prob_zero * dc.prob_one);
                src.feed(i, u[i]);
                chan.feed(i, u[i]);
            }
        }
    };

    const int workers = std::min(worker_count(), num_blocks);
    if (workers <= 1) {
        for (int b = 0; b < num_blocks; ++b) run_block(b);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next_block{0};
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    int b = next_block.fetch_add(1);
                    if (b >= num_blocks) return;
                    run_block(b);
                }
            });
        for (auto& t : pool) t.join();
    }

    // Fixed block order keeps the float reduction deterministic.
    ctx.z_source.assign(n, 0.0);
    ctx.z_channel.assign(n, 0.0);
    for (int b = 0; b < num_blocks; ++b)
        for (int i = 0; i < n; ++i) {
            ctx.z_source[i] += zsrc_part[b][i];
            ctx.z_channel[i] += zch_part[b][i];
        }
    for (int i = 0; i < n; ++i) {
        ctx.z_source[i] /= samples;
        ctx.z_channel[i] /= samples;
    }
    return ctx;
}

namespace {

std::vector<int> sorted_by_value(const std::vector<double>& z, bool descending) {
    std::vector<int> idx(z.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (z[a] != z[b]) return descending ? z[a] > z[b] : z[a] < z[b];
        return a < b;
    });
    return idx;
}

void finish_partition(PolarContext& ctx) {
    const int n = ctx.n;
    std::vector<unsigned char> in_hx(n, 0), in_lxy(n, 0);
    for (int i : ctx.h_x) in_hx[i] = 1;
    for (int i : ctx.l_xy) in_lxy[i] = 1;
    ctx.info_set.clear();
    ctx.f_r.clear();
    ctx.f_d.clear();
    ctx.role.assign(n, PolarContext::role_fd);
    for (int i = 0; i < n; ++i) {
        if (in_hx[i] && in_lxy[i]) {
            ctx.info_set.push_back(i);
            ctx.role[i] = PolarContext::role_info;
        } else if (in_hx[i]) {
            ctx.f_r.push_back(i);
            ctx.role[i] = PolarContext::role_fr;
        } else {
            ctx.f_d.push_back(i);
        }
    }
    ctx.in_l_x.assign(n, 0);
    for (int i : ctx.l_x) ctx.in_l_x[i] = 1;
}

}  // namespace

void classify(PolarContext& ctx, const SelectionPolicy& policy) {
    const int n = ctx.n;
    if (n == 0 || ctx.z_source.empty())
        throw std::invalid_argument("classify: context has no reliability estimates");
    ctx.policy = policy;
    ctx.h_x.clear();
    ctx.l_x.clear();
    ctx.h_xy.clear();
    ctx.l_xy.clear();

    if (policy.kind == SelectionPolicy::Kind::threshold) {
        const double d = policy.delta;
        for (int i = 0; i < n; ++i) {
            if (ctx.z_source[i] >= 1 - d) ctx.h_x.push_back(i);
            if (ctx.z_source[i] <= d) ctx.l_x.push_back(i);
            if (ctx.z_channel[i] >= 1 - d) ctx.h_xy.push_back(i);
            if (ctx.z_channel[i] <= d) ctx.l_xy.push_back(i);
        }
    } else {
        const int k_h = static_cast<int>(
            std::lround(binary_entropy(ctx.alpha) * n));
        const auto by_src = sorted_by_value(ctx.z_source, true);
        std::vector<unsigned char> in_hx(n, 0);
        for (int r = 0; r < k_h && r < n; ++r) in_hx[by_src[r]] = 1;
        for (int i = 0; i < n; ++i)
            (in_hx[i] ? ctx.h_x : ctx.l_x).push_back(i);

        const int k_i = static_cast<int>(policy.info_rate * n);
        if (k_i > static_cast<int>(ctx.h_x.size()))
            throw std::invalid_argument(
                "classify: requested info rate exceeds the high-entropy set");
        const auto by_ch = sorted_by_value(ctx.z_channel, false);
        std::vector<unsigned char> in_info(n, 0);
        int taken = 0;
        for (int i : by_ch) {
            if (taken == k_i) break;
            if (in_hx[i]) {
                in_info[i] = 1;
                ++taken;
            }
        }
        for (int i = 0; i < n; ++i)
            if (in_info[i]) ctx.l_xy.push_back(i);
        // h_xy is reported with the default threshold; it does not drive the code.
        for (int i = 0; i < n; ++i)
            if (ctx.z_channel[i] >= 0.9) ctx.h_xy.push_back(i);
    }
    finish_partition(ctx);
}

BitDistribution sc_bit_distribution(int n, double alpha, const Dmc* ch,
                                    const std::vector<int>* y,
                                    const BitVec& prev_decisions, int index) {
    require_pow2(n);
    if (index < 0 || index >= n)
        throw std::out_of_range("sc_bit_distribution: index out of range");
    if (static_cast<int>(prev_decisions.size()) < index)
        throw std::invalid_argument("sc_bit_distribution: too few prior decisions");
    ScEngine eng(n);
    if (ch && y) {
        const auto table = channel_leaf_table(*ch, alpha);
        for (int j = 0; j < n; ++j) {
            const auto& q = table[(*y)[j]];
            eng.set_leaf(j, q.first, q.second);
        }
    } else {
        for (int j = 0; j < n; ++j) eng.set_leaf(j, 1 - alpha, alpha);
    }
    BitDistribution d{};
    for (int i = 0; i <= index; ++i) {
        d = eng.next(i);
        if (i < index) eng.feed(i, prev_decisions[i]);
    }
    return d;
}

BitVec hy_encode(const PolarContext& ctx, const BitVec& message,
                 std::uint64_t shared_seed) {
    if (static_cast<int>(message.size()) != ctx.info_size())
        throw std::invalid_argument("hy_encode: message length != |info set|");
    ScEngine src(ctx.n);
    for (int j = 0; j < ctx.n; ++j) src.set_leaf(j, 1 - ctx.alpha, ctx.alpha);
    Rng fr_rng(derive_seed(shared_seed, {0xf2u}));
    BitVec u(ctx.n);
    std::size_t next_msg = 0;
    for (int i = 0; i < ctx.n; ++i) {
        const auto d = src.next(i);
        switch (ctx.role[i]) {
            case PolarContext::role_info: u[i] = message[next_msg++]; break;
            case PolarContext::role_fr: u[i] = fr_rng.next_u64() & 1; break;
            default: u[i] = static_cast<std::uint8_t>(d.argmax()); break;
        }
        src.feed(i, u[i]);
    }
    return polar_transform(u);
}

HyDecodeResult hy_decode(const PolarContext& ctx, const std::vector<int>& y,
                         std::uint64_t shared_seed) {
    if (static_cast<int>(y.size()) != ctx.n)
        throw std::invalid_argument("hy_decode: received length != n");
    const auto table = channel_leaf_table(ctx.channel, ctx.alpha);
    std::vector<std::pair<double, double>> leaves(ctx.n);
    for (int j = 0; j < ctx.n; ++j) leaves[j] = table[y[j]];
    return hy_decode_with_evidence(ctx, leaves, shared_seed);
}

HyDecodeResult hy_decode_with_evidence(
    const PolarContext& ctx, const std::vector<std::pair<double, double>>& leaves,
    std::uint64_t shared_seed) {
    if (static_cast<int>(leaves.size()) != ctx.n)
        throw std::invalid_argument("hy_decode: evidence length != n");
    ScEngine src(ctx.n), chan(ctx.n);
    for (int j = 0; j < ctx.n; ++j) {
        src.set_leaf(j, 1 - ctx.alpha, ctx.alpha);
        chan.set_leaf(j, leaves[j].first, leaves[j].second);
    }
    Rng fr_rng(derive_seed(shared_seed, {0xf2u}));
    HyDecodeResult res;
    res.u.assign(ctx.n, 0);
    res.message.reserve(ctx.info_set.size());
    for (int i = 0; i < ctx.n; ++i) {
        const auto ds = src.next(i);
        const auto dc = chan.next(i);
        std::uint8_t bit;
        switch (ctx.role[i]) {
            case PolarContext::role_info:
                bit = static_cast<std::uint8_t>(dc.argmax());
                res.message.push_back(bit);
                break;
            case PolarContext::role_fr:
                bit = fr_rng.next_u64() & 1;
                break;
            default:
                bit = static_cast<std::uint8_t>(ds.argmax());
                break;
        }
        res.u[i] = bit;
        src.feed(i, bit);
        chan.feed(i, bit);
    }
    res.x = polar_transform(res.u);
    return res;
}

BitVec source_compress(const PolarContext& ctx, const BitVec& x) {
    if (static_cast<int>(x.size()) != ctx.n)
        throw std::invalid_argument("source_compress: length != n");
    BitVec u = polar_transform(x);
    BitVec out;
    out.reserve(ctx.n - ctx.l_x.size());
    for (int i = 0; i < ctx.n; ++i)
        if (!ctx.in_l_x[i]) out.push_back(u[i]);
    return out;
}

BitVec source_decompress(const PolarContext& ctx, const BitVec& payload) {
    const std::size_t stored = ctx.n - ctx.l_x.size();
    if (payload.size() != stored)
        throw std::invalid_argument("source_decompress: payload length mismatch");
    ScEngine src(ctx.n);
    for (int j = 0; j < ctx.n; ++j) src.set_leaf(j, 1 - ctx.alpha, ctx.alpha);
    BitVec u(ctx.n);
    std::size_t next_in = 0;
    for (int i = 0; i < ctx.n; ++i) {
        const auto d = src.next(i);
        u[i] = ctx.in_l_x[i] ? static_cast<std::uint8_t>(d.argmax())
                             : payload[next_in++];
        src.feed(i, u[i]);
    }
    return polar_transform(u);
}

nlohmann::ordered_json PolarContext::to_json() const {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["n"] = n;
    j["alpha"] = alpha;
    j["channel"] = channel.to_json();
    j["samples"] = samples;
    j["seed"] = seed;
    j["policy"] = policy.to_json();
    j["z_source"] = z_source;
    j["z_channel"] = z_channel;
    j["h_x"] = h_x;
    j["l_x"] = l_x;
    j["h_xy"] = h_xy;
    j["l_xy"] = l_xy;
    j["info_set"] = info_set;
    j["f_r"] = f_r;
    j["f_d"] = f_d;
    return j;
}

PolarContext PolarContext::from_json(const nlohmann::json& j) {
    if (j.at("version").get<int>() != 1)
        throw std::invalid_argument("PolarContext: unsupported version");
    PolarContext ctx(Dmc::from_json(j.at("channel")));
    ctx.n = j.at("n").get<int>();
    ctx.m = std::countr_zero(static_cast<unsigned>(ctx.n));
    ctx.alpha = j.at("alpha").get<double>();
    ctx.samples = j.at("samples").get<int>();
    ctx.seed = j.at("seed").get<std::uint64_t>();
    ctx.z_source = j.at("z_source").get<std::vector<double>>();
    ctx.z_channel = j.at("z_channel").get<std::vector<double>>();
    classify(ctx, SelectionPolicy::from_json(j.at("policy")));
    return ctx;
}

}  // namespace asymcap
