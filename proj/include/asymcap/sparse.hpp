#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "asymcap/dmc.hpp"
#include "asymcap/polar.hpp"  // BitVec
#include "asymcap/rng.hpp"

namespace asymcap {

// Bipartite parity-check graph with regular variable degree. Check degrees
// are nl/m rounded, with the remainder group recorded. Built from a random
// socket permutation; parallel edges are broken up by pair swaps.
struct SparseGraph {
    int n = 0;          // variables
    int r = 0;          // checks
    int var_degree = 0;
    std::uint64_t seed = 0;

    std::vector<int> edge_var, edge_chk;            // per edge
    std::vector<int> var_off, var_edges;            // CSR by variable
    std::vector<int> chk_off, chk_edges;            // CSR by check

    int num_edges() const { return static_cast<int>(edge_var.size()); }
    int check_degree(int c) const { return chk_off[c + 1] - chk_off[c]; }

    nlohmann::ordered_json to_json() const;
    static SparseGraph from_json(const nlohmann::json& j);
};

// (l, r)-regular ensemble; requires r | n*l.
SparseGraph build_regular_graph(int n, int l, int r, std::uint64_t seed);
// Regular variable degree l with an explicit check count.
SparseGraph build_graph_with_checks(int n, int l, int checks, std::uint64_t seed);

BitVec syndrome(const SparseGraph& g, const BitVec& x);

struct BpOptions {
    int max_iters = 100;
    int first_check = 0;   // BP may run on a contiguous band of checks
    int num_checks = -1;   // -1: all from first_check
    // When set, records the check-to-variable message array after each
    // iteration (used by the task-equivalence tests).
    std::vector<std::vector<double>>* message_trace = nullptr;
};

struct BpResult {
    BitVec x;
    bool syndrome_ok = false;
    int iterations = 0;
};

// Sum-product decoding of a biased codeword: llr[i] is the full posterior
// LLR ln P(x_i=0|obs)/P(x_i=1|obs) (prior folded in), and check c is
// constrained to the target syndrome bit. Messages clamp at +/-30.
BpResult bp_decode_biased(const SparseGraph& g, const std::vector<double>& llr,
                          const BitVec& target_syndrome, const BpOptions& opt);

// Posterior LLRs for a received word over a binary-input channel at prior
// alpha = P(X=1).
std::vector<double> posterior_llrs(const Dmc& ch, double alpha,
                                   const std::vector<int>& y);

// Task 2 / Task 3 consistency: decompressing the flip pattern from the
// syndrome of y and decoding the codeword from y must agree, c^ = y ^ e^.
struct TaskCheckResult {
    bool consistent = false;
    bool task2_ok = false;
    bool task3_ok = false;
};
TaskCheckResult task_equivalence_check(const SparseGraph& g, double alpha,
                                       const BitVec& y, int max_iters);

struct DecimateOptions {
    int iters_per_round = 10;
    double fraction = 0.01;  // share of undecided variables fixed per round
};

struct DecimateResult {
    BitVec x;
    int unfulfilled = 0;
    int rounds = 0;
};

// Guided decimation: BP rounds alternate with hard-fixing the most confident
// undecided variables (random tie-break). Fixed variables never change;
// leftover violated checks are reported, not repaired.
DecimateResult bp_decimate_encode(const SparseGraph& g, const BitVec& target,
                                  double alpha, const DecimateOptions& opt,
                                  Rng& rng);

// Integrated scheme: P = [P1; P2], s1 carries the message, s2 is shared
// randomness. Sizes are chosen by the caller via the graph split point m1.
struct IntegratedEncodeResult {
    BitVec x;
    BitVec s2;
    int unfulfilled = 0;
    bool encoder_ok = false;
};
IntegratedEncodeResult integrated_encode(const SparseGraph& g, int m1,
                                         const BitVec& s1, double alpha,
                                         const DecimateOptions& opt,
                                         std::uint64_t shared_seed, Rng& rng);

struct IntegratedDecodeResult {
    BitVec x_hat;
    BitVec s1_hat;
    bool decoder_ok = false;
};
IntegratedDecodeResult integrated_decode(const SparseGraph& g, int m1,
                                         const std::vector<double>& llr,
                                         std::uint64_t shared_seed,
                                         int max_iters);

}  // namespace asymcap
