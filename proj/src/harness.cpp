#include "asymcap/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "asymcap/gallager.hpp"
#include "asymcap/polar.hpp"
#include "asymcap/sparse.hpp"

namespace asymcap {

namespace {

int worker_count() {
    if (const char* env = std::getenv("ASYMCAP_WORKERS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

void parallel_trials(int trials, const std::function<void(int)>& body) {
    const int workers = std::min(worker_count(), trials);
    if (workers <= 1) {
        for (int t = 0; t < trials; ++t) body(t);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                int t = next.fetch_add(1);
                if (t >= trials) return;
                body(t);
            }
        });
    for (auto& th : pool) th.join();
}

BinomialInterval binomial_ci95(int successes, int trials) {
    if (trials <= 0) return {0, 1};
    const double z = 1.959963984540054;
    const double n = trials, p = static_cast<double>(successes) / n;
    const double denom = 1 + z * z / n;
    const double center = (p + z * z / (2 * n)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
    BinomialInterval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
    if (successes == 0) ci.lo = 0.0;
    if (successes == trials) ci.hi = 1.0;
    return ci;
}

ExperimentSpec ExperimentSpec::from_json(const nlohmann::json& j) {
    ExperimentSpec s;
    s.approach = j.at("approach").get<std::string>();
    s.channel = j.at("channel").get<std::string>();
    if (j.contains("blocklen")) s.blocklen = j.at("blocklen").get<int>();
    if (j.contains("trials")) s.trials = j.at("trials").get<int>();
    if (j.contains("seed")) {
        s.seed = j.at("seed").get<std::uint64_t>();
        s.seed_set = true;
    }
    s.knobs = j.value("knobs", nlohmann::json::object());
    return s;
}

nlohmann::ordered_json ExperimentSpec::to_json() const {
    nlohmann::ordered_json j;
    j["approach"] = approach;
    j["channel"] = channel;
    j["blocklen"] = blocklen;
    j["trials"] = trials;
    j["seed"] = seed;
    j["knobs"] = knobs;
    return j;
}

void ExperimentSpec::validate() const {
    std::vector<std::string> errs;
    if (approach != "gallager" && approach != "integrated-polar" &&
        approach != "integrated-ldpc" && approach != "chaining")
        errs.push_back("approach must be one of gallager, integrated-polar, "
                       "integrated-ldpc, chaining");
    if (channel.empty()) errs.push_back("channel is required");
    if (blocklen <= 1) errs.push_back("blocklen must exceed 1");
    if (trials <= 0) errs.push_back("trials must be positive");
    if (!seed_set) errs.push_back("seed is mandatory");
    if (!errs.empty()) {
        std::string msg = "invalid experiment spec:";
        for (const auto& e : errs) msg += "\n  - " + e;
        throw std::invalid_argument(msg);
    }
}

std::string ExperimentReport::dump(bool include_runtime, int indent) const {
    nlohmann::ordered_json out = body;
    if (include_runtime) out["runtime_seconds"] = runtime_seconds;
    return out.dump(indent);
}

namespace {

double knob(const nlohmann::json& knobs, const char* name, double fallback) {
    return knobs.value(name, fallback);
}

struct TrialOutcome {
    bool block_error = false;
    bool encoder_failure = false;
    bool decoder_failure = false;
    double ones_fraction = 0;
    ChainErrorCounts chain;
};

nlohmann::ordered_json run_gallager(const ExperimentSpec& spec, const Dmc& ch) {
    const double delta = knob(spec.knobs, "delta", 0.02);
    const double backoff = knob(spec.knobs, "backoff", 0.7);
    const int samples = static_cast<int>(knob(spec.knobs, "samples", 4000));

    auto scheme = build_gallager_scheme(ch, delta, spec.blocklen, backoff,
                                        samples, derive_seed(spec.seed, {1}));
    auto rep = capacity(ch, 1e-9);
    // Bounds against the mapped input distribution actually in use.
    auto ra = approximate(rep.optimal_input, delta, true);
    auto bounds = mi_perturbation_bounds(ch, rep.optimal_input, ra.approx);

    const int msg_len = gallager_message_length(scheme);
    std::vector<TrialOutcome> out(spec.trials);
    parallel_trials(spec.trials, [&](int t) {
        Rng rng(derive_seed(spec.seed, {0x6a11u, static_cast<std::uint64_t>(t)}));
        BitVec msg(msg_len);
        for (auto& b : msg) b = static_cast<std::uint8_t>(rng.next_u64() & 1);
        auto x = gallager_encode(scheme, msg, derive_seed(spec.seed, {0x6a12u, static_cast<std::uint64_t>(t)}));
        std::vector<int> y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = ch.sample(x[i], rng);
        auto dec = gallager_decode(scheme, y, derive_seed(spec.seed, {0x6a12u, static_cast<std::uint64_t>(t)}));
        out[t].block_error = dec != msg;
    });
    int errors = 0;
    for (const auto& o : out) errors += o.block_error;

    nlohmann::ordered_json r;
    r["rate"] = scheme.rate;
    r["mapper_levels"] = scheme.mapper.t;
    r["mapper_size"] = scheme.mapper.extended_size;
    r["mapped_mi"] = scheme.mapped_mi;
    r["empirical_bler"] = static_cast<double>(errors) / spec.trials;
    auto ci = binomial_ci95(errors, spec.trials);
    r["bler_ci95"] = {ci.lo, ci.hi};
    r["capacity"] = rep.capacity;
    r["gap_to_capacity"] = rep.capacity - scheme.rate;
    r["tv_delta"] = bounds.tv;
    r["bound_y"] = bounds.bound_y;
    r["bound_x"] = bounds.bound_x;
    r["mi_gap_actual"] = bounds.actual_gap;
    return r;
}

nlohmann::ordered_json run_integrated_polar(const ExperimentSpec& spec,
                                            const Dmc& ch) {
    const double rate_factor = knob(spec.knobs, "rate_factor", 0.75);
    const int samples = static_cast<int>(knob(spec.knobs, "samples", 10000));

    auto rep = capacity(ch, 1e-9);
    const double alpha = rep.optimal_input[1];
    auto ctx = build_context(ch, alpha, spec.blocklen, samples,
                             derive_seed(spec.seed, {2}));
    classify(ctx, SelectionPolicy::rate_targeted(rate_factor * rep.capacity));

    std::vector<TrialOutcome> out(spec.trials);
    parallel_trials(spec.trials, [&](int t) {
        Rng rng(derive_seed(spec.seed, {0x1b01u, static_cast<std::uint64_t>(t)}));
        BitVec msg(ctx.info_size());
        for (auto& b : msg) b = static_cast<std::uint8_t>(rng.next_u64() & 1);
        const std::uint64_t shared = derive_seed(spec.seed, {0x1b02u, static_cast<std::uint64_t>(t)});
        auto x = hy_encode(ctx, msg, shared);
        out[t].ones_fraction =
            std::accumulate(x.begin(), x.end(), 0.0) / x.size();
        std::vector<int> y(ctx.n);
        for (int i = 0; i < ctx.n; ++i) y[i] = ch.sample(x[i], rng);
        auto dec = hy_decode(ctx, y, shared);
        out[t].block_error = dec.message != msg;
    });
    int errors = 0;
    double ones = 0;
    for (const auto& o : out) {
        errors += o.block_error;
        ones += o.ones_fraction;
    }

    nlohmann::ordered_json r;
    r["alpha"] = alpha;
    r["rate"] = static_cast<double>(ctx.info_size()) / ctx.n;
    r["capacity"] = rep.capacity;
    r["gap_to_capacity"] = rep.capacity - static_cast<double>(ctx.info_size()) / ctx.n;
    r["empirical_bler"] = static_cast<double>(errors) / spec.trials;
    auto ci = binomial_ci95(errors, spec.trials);
    r["bler_ci95"] = {ci.lo, ci.hi};
    r["mean_ones_fraction"] = ones / spec.trials;
    r["info_z_sum"] = ctx.info_z_sum();
    return r;
}

nlohmann::ordered_json run_integrated_ldpc(const ExperimentSpec& spec,
                                           const Dmc& ch) {
    const int var_degree = static_cast<int>(knob(spec.knobs, "var_degree", 3));
    const double margin_dec = knob(spec.knobs, "margin_dec", 0.10);
    const double margin_enc = knob(spec.knobs, "margin_enc", 0.02);
    const int bp_iters = static_cast<int>(knob(spec.knobs, "bp_iters", 200));
    DecimateOptions dopt;
    dopt.iters_per_round = static_cast<int>(knob(spec.knobs, "decimation_iters", 10));
    dopt.fraction = knob(spec.knobs, "decimation_fraction", 0.01);

    auto rep = capacity(ch, 1e-9);
    const double alpha = rep.optimal_input[1];
    const int n = spec.blocklen;
    const int total_checks = static_cast<int>(
        std::floor(n * (binary_entropy(alpha) - margin_enc)));
    const int m2 = static_cast<int>(
        std::ceil(n * (rep.conditional_entropy_x_given_y + margin_dec)));
    if (m2 >= total_checks)
        throw std::invalid_argument("integrated-ldpc: no room for information "
                                    "checks at these margins");
    const int m1 = total_checks - m2;
    auto g = build_graph_with_checks(n, var_degree, total_checks,
                                     derive_seed(spec.seed, {3}));

    // Checks [0, m1) carry the message, [m1, total) the shared randomness.
    std::vector<TrialOutcome> out(spec.trials);
    parallel_trials(spec.trials, [&](int t) {
        Rng rng(derive_seed(spec.seed, {0x1d01u, static_cast<std::uint64_t>(t)}));
        BitVec s1(m1);
        for (auto& b : s1) b = static_cast<std::uint8_t>(rng.next_u64() & 1);
        const std::uint64_t shared = derive_seed(spec.seed, {0x1d02u, static_cast<std::uint64_t>(t)});
        auto enc = integrated_encode(g, m1, s1, alpha, dopt, shared, rng);
        out[t].encoder_failure = !enc.encoder_ok;
        out[t].ones_fraction =
            std::accumulate(enc.x.begin(), enc.x.end(), 0.0) / enc.x.size();
        std::vector<int> y(n);
        for (int i = 0; i < n; ++i) y[i] = ch.sample(enc.x[i], rng);
        auto dec = integrated_decode(g, m1, posterior_llrs(ch, alpha, y), shared,
                                     bp_iters);
        out[t].decoder_failure = dec.x_hat != enc.x;
        out[t].block_error = dec.s1_hat != s1;
    });
    int errors = 0, enc_fail = 0, dec_fail = 0;
    double ones = 0;
    for (const auto& o : out) {
        errors += o.block_error;
        enc_fail += o.encoder_failure;
        dec_fail += o.decoder_failure;
        ones += o.ones_fraction;
    }

    nlohmann::ordered_json r;
    r["alpha"] = alpha;
    r["rate"] = static_cast<double>(m1) / n;
    r["capacity"] = rep.capacity;
    r["gap_to_capacity"] = rep.capacity - static_cast<double>(m1) / n;
    r["empirical_bler"] = static_cast<double>(errors) / spec.trials;
    auto ci = binomial_ci95(errors, spec.trials);
    r["bler_ci95"] = {ci.lo, ci.hi};
    r["encoder_failures"] = enc_fail;
    r["decoder_failures"] = dec_fail;
    r["mean_ones_fraction"] = ones / spec.trials;
    r["checks_total"] = total_checks;
    r["checks_message"] = m1;
    return r;
}

nlohmann::ordered_json run_chaining(const ExperimentSpec& spec, const Dmc& ch) {
    const int k = static_cast<int>(knob(spec.knobs, "k", 5));
    const double backoff = knob(spec.knobs, "backoff", 0.75);
    const int samples = static_cast<int>(knob(spec.knobs, "samples", 10000));
    const std::string code = spec.knobs.value("code", std::string("polar"));
    const std::string source = spec.knobs.value("source", std::string("polar"));

    auto cfg = plug_combination(source, code, ch, k, spec.blocklen, backoff,
                                samples, derive_seed(spec.seed, {4}));

    std::vector<TrialOutcome> out(spec.trials);
    parallel_trials(spec.trials, [&](int t) {
        Rng rng(derive_seed(spec.seed, {0xc401u, static_cast<std::uint64_t>(t)}));
        BitVec msg(cfg.message_length());
        for (auto& b : msg) b = static_cast<std::uint8_t>(rng.next_u64() & 1);
        const std::uint64_t master = derive_seed(spec.seed, {0xc402u, static_cast<std::uint64_t>(t)});
        auto enc = chain_encode(cfg, msg, master);
        std::vector<std::vector<int>> y(cfg.k);
        for (int j = 0; j < cfg.k; ++j) {
            y[j].resize(enc.channel_inputs[j].size());
            for (std::size_t i = 0; i < y[j].size(); ++i)
                y[j][i] = ch.sample(enc.channel_inputs[j][i], rng);
        }
        auto dec = chain_decode(cfg, y, master);
        out[t].chain = classify_chain_errors(cfg, enc, dec, msg);
        out[t].block_error = !out[t].chain.message_ok;
    });
    int errors = 0;
    ChainErrorCounts agg;
    for (const auto& o : out) {
        errors += o.block_error;
        agg.source_map_failures += o.chain.source_map_failures;
        agg.middle_block_errors += o.chain.middle_block_errors;
        agg.terminal_errors += o.chain.terminal_errors;
        agg.payload_extraction_errors += o.chain.payload_extraction_errors;
    }

    nlohmann::ordered_json r;
    r["k"] = cfg.k;
    r["alpha"] = cfg.alpha;
    r["realized_rate"] = cfg.realized_rate();
    r["eq18_rate"] = cfg.formula_rate();
    r["capacity"] = cfg.capacity_estimate;
    r["gap_to_capacity"] = cfg.capacity_estimate - cfg.realized_rate();
    r["bler"] = static_cast<double>(errors) / spec.trials;
    auto ci = binomial_ci95(errors, spec.trials);
    r["bler_ci95"] = {ci.lo, ci.hi};
    r["per_error_type_counts"] = {
        {"source_map_failures", agg.source_map_failures},
        {"middle_block_errors", agg.middle_block_errors},
        {"terminal_errors", agg.terminal_errors},
        {"payload_extraction_errors", agg.payload_extraction_errors},
    };
    r["payload_size"] = cfg.payload_size;
    r["syndrome_size"] = cfg.syndrome_size;
    r["terminal_blocks"] = cfg.terminal_blocks;
    return r;
}

}  // namespace

ExperimentReport run(const ExperimentSpec& spec) {
    spec.validate();
    const auto t0 = std::chrono::steady_clock::now();
    auto ch = Dmc::from_spec(spec.channel);

    nlohmann::ordered_json body;
    body["schema_version"] = 1;
    body["spec"] = spec.to_json();
    if (spec.approach == "gallager")
        body["result"] = run_gallager(spec, ch);
    else if (spec.approach == "integrated-polar")
        body["result"] = run_integrated_polar(spec, ch);
    else if (spec.approach == "integrated-ldpc")
        body["result"] = run_integrated_ldpc(spec, ch);
    else
        body["result"] = run_chaining(spec, ch);

    ExperimentReport rep;
    rep.body = std::move(body);
    rep.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

nlohmann::ordered_json compare_approaches(const std::string& channel_spec,
                                          long long budget, std::uint64_t seed) {
    auto ch = Dmc::from_spec(channel_spec);
    auto rep = capacity(ch, 1e-9);

    nlohmann::ordered_json table = nlohmann::ordered_json::array();
    const int n = 1024;
    struct Row {
        const char* approach;
        long long uses_per_trial;
        double complexity_proxy;  // rough operation count per trial
    };
    const std::vector<Row> rows = {
        {"gallager", n, 3.0 * n * 10},
        {"integrated-polar", n, 2.0 * n * 10},
        {"integrated-ldpc", n, 3.0 * n * 200},
        {"chaining", 6ll * n, 12.0 * n * 10},
    };
    for (const auto& row : rows) {
        ExperimentSpec spec;
        spec.approach = row.approach;
        spec.channel = channel_spec;
        spec.blocklen = n;
        spec.trials = std::max<int>(10, static_cast<int>(budget / std::max<long long>(1, row.uses_per_trial) / 4));
        spec.trials = std::min(spec.trials, 100);
        spec.seed = seed;
        spec.seed_set = true;
        spec.knobs = nlohmann::json::object();
        spec.knobs["samples"] = 2000;
        nlohmann::ordered_json entry;
        entry["approach"] = row.approach;
        try {
            auto report = run(spec);
            const auto& res = report.body["result"];
            double rate = res.contains("realized_rate")
                              ? res["realized_rate"].get<double>()
                              : res["rate"].get<double>();
            entry["rate"] = rate;
            entry["gap"] = rep.capacity - rate;
            entry["bler"] = res.contains("bler") ? res["bler"].get<double>()
                                                 : res["empirical_bler"].get<double>();
            entry["trials"] = spec.trials;
            entry["complexity_proxy_ops"] = row.complexity_proxy;
            if (std::string(row.approach) == "gallager")
                entry["mapper_degenerate"] = res["mapper_levels"].get<int>() <= 1;
        } catch (const std::exception& e) {
            entry["error"] = e.what();
        }
        table.push_back(entry);
    }
    nlohmann::ordered_json out;
    out["channel"] = channel_spec;
    out["capacity"] = rep.capacity;
    out["budget_channel_uses"] = budget;
    out["rows"] = table;
    return out;
}

std::vector<double> chain_rate_sweep(const ChainConfig& cfg,
                                     const std::vector<int>& ks) {
    std::vector<double> rates;
    rates.reserve(ks.size());
    const double h2_eff = static_cast<double>(cfg.payload_size) / cfg.n;
    const double iw_eff = static_cast<double>(cfg.info_per_middle) / cfg.n;
    const double hxy_eff = static_cast<double>(cfg.syndrome_size) / cfg.n;
    const double is_eff = static_cast<double>(cfg.syndrome_size) /
                          (static_cast<double>(cfg.terminal_blocks) * cfg.n);
    for (int k : ks)
        rates.push_back(chain_rate_formula(h2_eff, iw_eff, hxy_eff, is_eff, k));
    return rates;
}

}  // namespace asymcap
