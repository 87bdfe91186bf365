#include "asymcap/chaining.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace asymcap {

double chain_rate_formula(double h2_alpha, double iw, double hxy, double is,
                          int k) {
    if (k < 2) throw std::invalid_argument("chain_rate_formula: k must be >= 2");
    return (h2_alpha + (k - 2) * iw) / ((k - 1) + hxy / is);
}

double ChainConfig::formula_rate() const {
    const double h2_eff = static_cast<double>(payload_size) / n;
    const double iw_eff = static_cast<double>(info_per_middle) / n;
    const double hxy_eff = static_cast<double>(syndrome_size) / n;
    const double is_eff =
        static_cast<double>(syndrome_size) / (static_cast<double>(terminal_blocks) * n);
    return chain_rate_formula(h2_eff, iw_eff, hxy_eff, is_eff, k);
}

namespace {

// Shared set for the polar syndrome code: the hardest channel-side positions
// among those carrying payload bits. Positions outside the payload are
// deterministic source reconstructions and never need sharing.
std::vector<int> hardest_payload_positions(const PolarContext& ctx, int count) {
    std::vector<int> idx;
    idx.reserve(ctx.n - ctx.l_x.size());
    for (int i = 0; i < ctx.n; ++i)
        if (!ctx.in_l_x[i]) idx.push_back(i);
    if (count > static_cast<int>(idx.size()))
        throw std::invalid_argument("chain: syndrome larger than the payload set");
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (ctx.z_channel[a] != ctx.z_channel[b])
            return ctx.z_channel[a] > ctx.z_channel[b];
        return a < b;
    });
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// Polar syndrome decode mirrors the encoder's map: shared positions are
// forced to the recovered syndrome, non-payload positions replay the
// source-side argmax, and the remaining payload positions are decided from
// the channel side.
BitVec polar_syndrome_decode(const ChainConfig& cfg, const std::vector<int>& y,
                             const BitVec& shared_bits) {
    const auto& ctx = cfg.source_ctx;  // carries channel + alpha + z arrays
    ScEngine src(ctx.n), chan(ctx.n);
    const auto table = channel_leaf_table(ctx.channel, ctx.alpha);
    for (int j = 0; j < ctx.n; ++j) {
        src.set_leaf(j, 1 - ctx.alpha, ctx.alpha);
        const auto& q = table[y[j]];
        chan.set_leaf(j, q.first, q.second);
    }
    std::vector<unsigned char> forced(ctx.n, 0);
    std::vector<std::uint8_t> forced_val(ctx.n, 0);
    for (std::size_t s = 0; s < cfg.shared_positions.size(); ++s) {
        forced[cfg.shared_positions[s]] = 1;
        forced_val[cfg.shared_positions[s]] = shared_bits[s];
    }
    BitVec u(ctx.n);
    for (int i = 0; i < ctx.n; ++i) {
        const auto ds = src.next(i);
        const auto dc = chan.next(i);
        std::uint8_t bit;
        if (forced[i])
            bit = forced_val[i];
        else if (ctx.in_l_x[i])
            bit = static_cast<std::uint8_t>(ds.argmax());
        else
            bit = static_cast<std::uint8_t>(dc.argmax());
        u[i] = bit;
        src.feed(i, bit);
        chan.feed(i, bit);
    }
    return polar_transform(u);
}

BitVec channel_code_syndrome(const ChainConfig& cfg, const BitVec& x) {
    if (cfg.channel_kind == ChainConfig::ChannelKind::polar_syndrome) {
        BitVec u = polar_transform(x);
        BitVec s;
        s.reserve(cfg.shared_positions.size());
        for (int i : cfg.shared_positions) s.push_back(u[i]);
        return s;
    }
    return syndrome(cfg.ldpc, x);
}

BitVec channel_code_decode(const ChainConfig& cfg, const std::vector<int>& y,
                           const BitVec& shared_bits) {
    if (cfg.channel_kind == ChainConfig::ChannelKind::polar_syndrome)
        return polar_syndrome_decode(cfg, y, shared_bits);
    BpOptions opt;
    opt.max_iters = 200;
    auto llr = posterior_llrs(cfg.channel, cfg.alpha, y);
    return bp_decode_biased(cfg.ldpc, llr, shared_bits, opt).x;
}

std::uint64_t block_seed(std::uint64_t master, int block) {
    return derive_seed(master, {0xc4a1u, static_cast<std::uint64_t>(block)});
}

}  // namespace

ChainConfig plug_combination(const std::string& source_kind,
                             const std::string& channel_kind, const Dmc& ch,
                             int k, int n, double backoff, int samples,
                             std::uint64_t seed) {
    if (source_kind != "polar")
        throw std::invalid_argument("plug_combination: unregistered source kind: " +
                                    source_kind);
    ChainConfig::ChannelKind ck;
    if (channel_kind == "polar")
        ck = ChainConfig::ChannelKind::polar_syndrome;
    else if (channel_kind == "ldpc")
        ck = ChainConfig::ChannelKind::ldpc_syndrome;
    else
        throw std::invalid_argument(
            "plug_combination: unregistered channel-code kind: " + channel_kind);
    if (k < 2) throw std::invalid_argument("plug_combination: k must be >= 2");
    if (backoff <= 0 || backoff > 1)
        throw std::invalid_argument("plug_combination: backoff must be in (0,1]");

    auto rep = capacity(ch, 1e-9);
    ChainConfig cfg(ch);
    cfg.k = k;
    cfg.n = n;
    cfg.alpha = rep.optimal_input[1];
    cfg.backoff = backoff;
    cfg.channel_kind = ck;
    cfg.capacity_estimate = rep.capacity;
    cfg.symmetric_capacity_estimate = rep.symmetric_capacity;
    cfg.cond_entropy_estimate = rep.conditional_entropy_x_given_y;

    // Rate-targeted cut: the payload occupies the round(n h2(alpha)) most
    // uniform positions and everything else is reconstructed by argmax, so
    // g-images round-trip exactly and the composition stays near alpha.
    cfg.source_ctx = build_context(ch, cfg.alpha, n, samples,
                                   derive_seed(seed, {0x50u}));
    classify(cfg.source_ctx, SelectionPolicy::rate_targeted(0.0));
    cfg.payload_size = n - static_cast<int>(cfg.source_ctx.l_x.size());

    cfg.syndrome_size = static_cast<int>(
        std::ceil(n * rep.conditional_entropy_x_given_y / backoff));
    if (cfg.syndrome_size >= cfg.payload_size)
        throw std::invalid_argument(
            "plug_combination: syndrome does not fit into the payload; increase n "
            "or the backoff");
    cfg.info_per_middle = cfg.payload_size - cfg.syndrome_size;

    if (ck == ChainConfig::ChannelKind::polar_syndrome) {
        cfg.shared_positions =
            hardest_payload_positions(cfg.source_ctx, cfg.syndrome_size);
    } else {
        cfg.ldpc = build_graph_with_checks(n, 3, cfg.syndrome_size,
                                           derive_seed(seed, {0x1dccu}));
    }

    cfg.terminal_ctx = build_context(ch, 0.5, n, samples,
                                     derive_seed(seed, {0x7eu}));
    classify(cfg.terminal_ctx,
             SelectionPolicy::rate_targeted(backoff * rep.symmetric_capacity));
    const int per_block = cfg.terminal_ctx.info_size();
    if (per_block <= 0)
        throw std::invalid_argument("plug_combination: terminal code has no rate");
    cfg.terminal_blocks = (cfg.syndrome_size + per_block - 1) / per_block;
    cfg.terminal_padding = cfg.terminal_blocks * per_block - cfg.syndrome_size;
    // Guard from the construction: the terminal rate stays within the
    // symmetric-capacity estimate.
    if (static_cast<double>(cfg.syndrome_size) / (cfg.terminal_blocks * n) >
        rep.symmetric_capacity)
        throw std::invalid_argument("plug_combination: terminal rate above Is(W)");
    return cfg;
}

ChainTranscript chain_encode(const ChainConfig& cfg, const BitVec& message,
                             std::uint64_t master_seed) {
    if (static_cast<int>(message.size()) != cfg.message_length())
        throw std::invalid_argument("chain_encode: message length mismatch");

    ChainTranscript tr;
    tr.blocks.resize(cfg.k - 1);
    tr.channel_inputs.resize(cfg.k);

    std::size_t off = 0;
    BitVec prev_syndrome;
    for (int j = 0; j < cfg.k - 1; ++j) {
        auto& blk = tr.blocks[j];
        blk.payload.clear();
        if (j == 0) {
            blk.payload.assign(message.begin(), message.begin() + cfg.payload_size);
            off = cfg.payload_size;
        } else {
            blk.payload = prev_syndrome;
            blk.payload.insert(blk.payload.end(), message.begin() + off,
                               message.begin() + off + cfg.info_per_middle);
            off += cfg.info_per_middle;
        }
        blk.x = source_decompress(cfg.source_ctx, blk.payload);
        blk.source_roundtrip_ok =
            source_compress(cfg.source_ctx, blk.x) == blk.payload;
        blk.syndrome = channel_code_syndrome(cfg, blk.x);
        prev_syndrome = blk.syndrome;
        tr.channel_inputs[j].assign(blk.x.begin(), blk.x.end());
    }

    // Terminal block: the last syndrome, zero-padded to fill the sub-blocks.
    tr.terminal_payload = prev_syndrome;
    tr.terminal_payload.resize(prev_syndrome.size() + cfg.terminal_padding, 0);
    const int per_block = cfg.terminal_ctx.info_size();
    std::vector<int> terminal_tx;
    terminal_tx.reserve(cfg.terminal_blocks * cfg.n);
    for (int b = 0; b < cfg.terminal_blocks; ++b) {
        BitVec chunk(tr.terminal_payload.begin() + b * per_block,
                     tr.terminal_payload.begin() + (b + 1) * per_block);
        auto xb = hy_encode(cfg.terminal_ctx, chunk,
                            block_seed(master_seed, cfg.k * 8 + b));
        terminal_tx.insert(terminal_tx.end(), xb.begin(), xb.end());
    }
    tr.channel_inputs[cfg.k - 1] = std::move(terminal_tx);
    return tr;
}

ChainDecodeResult chain_decode(const ChainConfig& cfg,
                               const std::vector<std::vector<int>>& y_blocks,
                               std::uint64_t master_seed) {
    if (static_cast<int>(y_blocks.size()) != cfg.k)
        throw std::invalid_argument("chain_decode: expected k received blocks");

    ChainDecodeResult res;
    res.x_hat.resize(cfg.k - 1);
    res.payload_hat.resize(cfg.k - 1);

    // Terminal block first.
    res.decode_order.push_back(cfg.k);
    const auto& y_term = y_blocks[cfg.k - 1];
    const int per_block = cfg.terminal_ctx.info_size();
    if (static_cast<int>(y_term.size()) != cfg.terminal_blocks * cfg.n)
        throw std::invalid_argument("chain_decode: terminal block length mismatch");
    BitVec term;
    term.reserve(cfg.terminal_blocks * per_block);
    for (int b = 0; b < cfg.terminal_blocks; ++b) {
        std::vector<int> yb(y_term.begin() + b * cfg.n,
                            y_term.begin() + (b + 1) * cfg.n);
        auto dec = hy_decode(cfg.terminal_ctx, yb,
                             block_seed(master_seed, cfg.k * 8 + b));
        term.insert(term.end(), dec.message.begin(), dec.message.end());
    }
    res.terminal_payload_hat = term;
    BitVec next_syndrome(term.begin(), term.begin() + cfg.syndrome_size);

    // Backward through the biased blocks.
    std::vector<BitVec> infos(cfg.k - 1);
    for (int j = cfg.k - 2; j >= 0; --j) {
        res.decode_order.push_back(j + 1);
        res.x_hat[j] = channel_code_decode(cfg, y_blocks[j], next_syndrome);
        res.payload_hat[j] = source_compress(cfg.source_ctx, res.x_hat[j]);
        if (j == 0) {
            infos[j] = res.payload_hat[j];
        } else {
            infos[j].assign(res.payload_hat[j].begin() + cfg.syndrome_size,
                            res.payload_hat[j].end());
            next_syndrome.assign(res.payload_hat[j].begin(),
                                 res.payload_hat[j].begin() + cfg.syndrome_size);
        }
    }
    for (int j = 0; j < cfg.k - 1; ++j)
        res.message.insert(res.message.end(), infos[j].begin(), infos[j].end());
    return res;
}

ChainErrorCounts classify_chain_errors(const ChainConfig& cfg,
                                       const ChainTranscript& enc,
                                       const ChainDecodeResult& dec,
                                       const BitVec& message) {
    ChainErrorCounts counts;
    for (int j = 0; j < cfg.k - 1; ++j) {
        if (!enc.blocks[j].source_roundtrip_ok) ++counts.source_map_failures;
        if (dec.x_hat[j] != enc.blocks[j].x) {
            ++counts.middle_block_errors;
        } else if (dec.payload_hat[j] != enc.blocks[j].payload) {
            ++counts.payload_extraction_errors;
        }
    }
    if (dec.terminal_payload_hat != enc.terminal_payload) ++counts.terminal_errors;
    counts.message_ok = dec.message == message;
    return counts;
}

}  // namespace asymcap
