#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "asymcap/chaining.hpp"
#include "asymcap/dmc.hpp"

namespace asymcap {

// Deterministic trial runner: results land in per-trial slots and are
// reduced in index order, so the worker count never changes the output.
// Worker count comes from ASYMCAP_WORKERS (default: hardware concurrency).
void parallel_trials(int trials, const std::function<void(int)>& body);

struct BinomialInterval {
    double lo = 0, hi = 0;
};
// Wilson score interval at 95%.
BinomialInterval binomial_ci95(int successes, int trials);

struct ExperimentSpec {
    std::string approach;  // gallager | integrated-polar | integrated-ldpc | chaining
    std::string channel;
    int blocklen = 1024;
    int trials = 100;
    std::uint64_t seed = 0;
    bool seed_set = false;
    nlohmann::json knobs;  // approach-specific

    static ExperimentSpec from_json(const nlohmann::json& j);
    nlohmann::ordered_json to_json() const;
    void validate() const;  // throws with an enumerated message list
};

struct ExperimentReport {
    nlohmann::ordered_json body;      // everything replayable
    double runtime_seconds = 0;

    // Replay-stable serialization; runtime is appended only when asked.
    std::string dump(bool include_runtime = true, int indent = 2) const;
};

ExperimentReport run(const ExperimentSpec& spec);

// Runs every applicable approach on the channel at a matched budget of
// channel uses and tabulates rate, gap and an operation-count proxy.
nlohmann::ordered_json compare_approaches(const std::string& channel_spec,
                                          long long budget, std::uint64_t seed);

// Chain-rate sweep over k with the measured per-block quantities of cfg.
std::vector<double> chain_rate_sweep(const ChainConfig& cfg,
                                     const std::vector<int>& ks);

}  // namespace asymcap
