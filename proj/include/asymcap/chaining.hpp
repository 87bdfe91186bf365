#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asymcap/dmc.hpp"
#include "asymcap/polar.hpp"
#include "asymcap/sparse.hpp"

namespace asymcap {

// Chain rate with per-block normalized quantities:
// (h2 + (k-2) iw) / ((k-1) + hxy / is).
double chain_rate_formula(double h2_alpha, double iw, double hxy, double is, int k);

// k-block chaining session. Block j stores the previous block's syndrome in
// its payload; block k ships the last syndrome with a symmetric-capacity
// polar code. All component codes hang off one Monte Carlo construction.
struct ChainConfig {
    enum class ChannelKind { polar_syndrome, ldpc_syndrome };

    int k = 0;
    int n = 0;
    double alpha = 0;
    Dmc channel;
    double backoff = 0.75;  // component rate / theoretical target

    PolarContext source_ctx;    // g = decompress, f = compress
    ChannelKind channel_kind = ChannelKind::polar_syndrome;
    std::vector<int> shared_positions;  // polar syndrome: u positions shared
    SparseGraph ldpc;                   // ldpc syndrome: graph with S checks
    PolarContext terminal_ctx;          // alpha = 1/2 code for block k

    int payload_size = 0;        // m, bits carried by one biased block
    int syndrome_size = 0;       // S, redundancy per block
    int info_per_middle = 0;     // m - S
    int terminal_blocks = 0;     // sub-blocks of length n for block k
    int terminal_padding = 0;    // zero bits padded into the terminal payload

    // Capacity bookkeeping measured at construction.
    double capacity_estimate = 0;
    double symmetric_capacity_estimate = 0;
    double cond_entropy_estimate = 0;

    explicit ChainConfig(Dmc ch)
        : channel(ch), source_ctx(ch), terminal_ctx(std::move(ch)) {}

    int message_length() const {
        return payload_size + (k - 2) * info_per_middle;
    }
    int total_channel_uses() const { return n * (k - 1) + terminal_blocks * n; }
    double realized_rate() const {
        return static_cast<double>(message_length()) / total_channel_uses();
    }
    // The chain-rate formula evaluated with this config's measured quantities.
    double formula_rate() const;
};

// Assembles a config from registered component kinds. source must be
// "polar"; channel_code one of "polar", "ldpc". Throws on anything else.
ChainConfig plug_combination(const std::string& source_kind,
                             const std::string& channel_kind, const Dmc& ch,
                             int k, int n, double backoff, int samples,
                             std::uint64_t seed);

struct ChainBlockRecord {
    BitVec payload;
    BitVec x;
    BitVec syndrome;
    bool source_roundtrip_ok = true;  // f(g(payload)) == payload at the encoder
};

struct ChainTranscript {
    std::vector<ChainBlockRecord> blocks;  // blocks 1..k-1
    BitVec terminal_payload;               // syndrome of block k-1, padded
    std::vector<std::vector<int>> channel_inputs;  // all k transmissions
};

ChainTranscript chain_encode(const ChainConfig& cfg, const BitVec& message,
                             std::uint64_t master_seed);

struct ChainDecodeResult {
    BitVec message;
    std::vector<BitVec> x_hat;      // blocks 1..k-1
    std::vector<BitVec> payload_hat;
    BitVec terminal_payload_hat;
    std::vector<int> decode_order;  // must be k, k-1, ..., 1
};

ChainDecodeResult chain_decode(const ChainConfig& cfg,
                               const std::vector<std::vector<int>>& y_blocks,
                               std::uint64_t master_seed);

// The four error classes of the chain, attributed against the encoder's
// transcript: 1 source-map failure at the encoder, 2 a middle block decoded
// wrong, 3 the terminal block decoded wrong, 4 payload extraction wrong
// despite a correct block estimate.
struct ChainErrorCounts {
    int source_map_failures = 0;
    int middle_block_errors = 0;
    int terminal_errors = 0;
    int payload_extraction_errors = 0;
    bool message_ok = false;
};

ChainErrorCounts classify_chain_errors(const ChainConfig& cfg,
                                       const ChainTranscript& enc,
                                       const ChainDecodeResult& dec,
                                       const BitVec& message);

}  // namespace asymcap
