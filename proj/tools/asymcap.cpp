// asymcap: simulation CLI for capacity-approaching coding over asymmetric
// discrete memoryless channels.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "asymcap/chaining.hpp"
#include "asymcap/dmc.hpp"
#include "asymcap/gallager.hpp"
#include "asymcap/harness.hpp"
#include "asymcap/kernels.hpp"
#include "asymcap/ldensity.hpp"
#include "asymcap/polar.hpp"
#include "asymcap/sparse.hpp"

using namespace asymcap;

namespace {

void emit(const nlohmann::ordered_json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        out << j.dump(2) << "\n";
    }
}

void emit_report(const ExperimentReport& rep, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << rep.dump(true) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        out << rep.dump(true) << "\n";
    }
}

BitVec parse_bits(const std::string& s) {
    BitVec v;
    v.reserve(s.size());
    for (char c : s) {
        if (c == '0')
            v.push_back(0);
        else if (c == '1')
            v.push_back(1);
        else
            throw std::runtime_error("bit strings may only contain 0 and 1");
    }
    return v;
}

std::string bits_to_string(const BitVec& v) {
    std::string s;
    s.reserve(v.size());
    for (auto b : v) s.push_back(b ? '1' : '0');
    return s;
}

std::vector<int> parse_symbols(const std::string& s) {
    std::vector<int> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(std::stoi(tok));
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coding approaches for asymmetric discrete memoryless channels"};
    app.require_subcommand(1);
    app.fallthrough();  // allow --out / --kernel-backend after a subcommand

    std::string backend = "auto";
    app.add_option("--kernel-backend", backend,
                   "kernel backend: auto, scalar, avx2");

    std::string out_path;
    app.add_option("--out", out_path, "write JSON output to a file");

    // capacity
    auto* cap_cmd = app.add_subcommand("capacity", "capacity and optimal input");
    std::string cap_channel;
    double cap_tol = 1e-10;
    cap_cmd->add_option("--channel", cap_channel, "channel spec")->required();
    cap_cmd->add_option("--tol", cap_tol, "bracket tolerance");

    // inspect: L-densities and the symmetrization identities
    auto* ins_cmd = app.add_subcommand("inspect", "L-densities of a channel");
    std::string ins_channel;
    double ins_alpha = -1;
    ins_cmd->add_option("--channel", ins_channel, "channel spec")->required();
    ins_cmd->add_option("--alpha", ins_alpha,
                        "prior P(X=1); omit for the prior densities");

    // gallager
    auto* gal_cmd = app.add_subcommand("gallager", "Gallager-mapping simulation");
    std::string gal_channel;
    double gal_delta = 0.02, gal_backoff = 0.7;
    int gal_n = 1024, gal_trials = 100, gal_samples = 4000;
    std::uint64_t gal_seed = 0;
    bool gal_seed_set = false;
    gal_cmd->add_option("--channel", gal_channel, "channel spec")->required();
    gal_cmd->add_option("--delta", gal_delta, "TV target of the rational approximation");
    gal_cmd->add_option("--blocklen", gal_n, "block length (power of two)");
    gal_cmd->add_option("--trials", gal_trials, "Monte Carlo trials");
    gal_cmd->add_option("--backoff", gal_backoff, "per-level rate backoff");
    gal_cmd->add_option("--samples", gal_samples, "construction samples");
    gal_cmd->add_option("--seed", gal_seed, "master seed")
        ->required()
        ->each([&](const std::string&) { gal_seed_set = true; });

    // polar construct / encode / decode / simulate
    auto* pol_cmd = app.add_subcommand("polar", "integrated polar scheme");
    pol_cmd->require_subcommand(1);

    auto* pc = pol_cmd->add_subcommand("construct", "build and save a context");
    std::string pc_channel, pc_out = "context.json";
    double pc_alpha = -1, pc_delta = 0.1, pc_rate = -1;
    int pc_n = 4096, pc_samples = 10000;
    std::uint64_t pc_seed = 1;
    pc->add_option("--channel", pc_channel, "channel spec")->required();
    pc->add_option("--alpha", pc_alpha, "P(X=1); default: capacity-achieving");
    pc->add_option("--n", pc_n, "block length (power of two)");
    pc->add_option("--samples", pc_samples, "Monte Carlo samples");
    pc->add_option("--seed", pc_seed, "construction seed")->required();
    pc->add_option("--ctx-out", pc_out, "context file to write");
    pc->add_option("--threshold", pc_delta, "threshold policy delta");
    pc->add_option("--rate", pc_rate, "rate-targeted policy instead of threshold");

    auto* pe = pol_cmd->add_subcommand("encode", "encode a message with a context");
    std::string pe_ctx, pe_bits;
    std::uint64_t pe_shared = 0;
    pe->add_option("--ctx", pe_ctx, "context file")->required();
    pe->add_option("--message-bits", pe_bits, "message as a 01 string")->required();
    pe->add_option("--shared-seed", pe_shared, "shared randomness seed")->required();

    auto* pd = pol_cmd->add_subcommand("decode", "decode received symbols");
    std::string pd_ctx, pd_y;
    std::uint64_t pd_shared = 0;
    pd->add_option("--ctx", pd_ctx, "context file")->required();
    pd->add_option("--y", pd_y, "received symbols, comma separated")->required();
    pd->add_option("--shared-seed", pd_shared, "shared randomness seed")->required();

    auto* ps = pol_cmd->add_subcommand("simulate", "end-to-end simulation");
    std::string ps_channel;
    double ps_rate_factor = 0.75;
    int ps_n = 4096, ps_trials = 500, ps_samples = 10000;
    std::uint64_t ps_seed = 0;
    ps->add_option("--channel", ps_channel, "channel spec")->required();
    ps->add_option("--n", ps_n, "block length (power of two)");
    ps->add_option("--trials", ps_trials, "Monte Carlo trials");
    ps->add_option("--rate-factor", ps_rate_factor, "info rate as a fraction of I(W)");
    ps->add_option("--samples", ps_samples, "construction samples");
    ps->add_option("--seed", ps_seed, "master seed")->required();

    // sparse simulate
    auto* sp_cmd = app.add_subcommand("sparse", "LDPC primitives");
    sp_cmd->require_subcommand(1);
    auto* ss = sp_cmd->add_subcommand("simulate", "integrated LDPC simulation");
    std::string ss_channel, ss_mode = "integrated";
    int ss_l = 3, ss_n = 10000, ss_trials = 20, ss_iters = 200;
    double ss_alpha = -1;
    std::uint64_t ss_seed = 0;
    ss->add_option("--channel", ss_channel, "channel spec")->required();
    ss->add_option("--l", ss_l, "variable degree");
    ss->add_option("--n", ss_n, "variable count");
    ss->add_option("--alpha", ss_alpha, "P(X=1); default: capacity-achieving");
    ss->add_option("--trials", ss_trials, "Monte Carlo trials");
    ss->add_option("--iters", ss_iters, "BP iterations");
    ss->add_option("--mode", ss_mode, "integrated | biased | decimate");
    ss->add_option("--seed", ss_seed, "master seed")->required();

    // chain simulate
    auto* ch_cmd = app.add_subcommand("chain", "chaining construction");
    ch_cmd->require_subcommand(1);
    auto* cs = ch_cmd->add_subcommand("simulate", "end-to-end chain simulation");
    std::string cs_channel, cs_code = "polar", cs_source = "polar", cs_sweep;
    int cs_k = 5, cs_n = 4096, cs_trials = 200, cs_samples = 10000;
    double cs_backoff = 0.75;
    std::uint64_t cs_seed = 0;
    cs->add_option("--channel", cs_channel, "channel spec")->required();
    cs->add_option("--k", cs_k, "number of chained blocks");
    cs->add_option("--n", cs_n, "per-block length (power of two)");
    cs->add_option("--source", cs_source, "source-map kind (polar)");
    cs->add_option("--code", cs_code, "channel-code kind: polar | ldpc");
    cs->add_option("--trials", cs_trials, "Monte Carlo trials");
    cs->add_option("--backoff", cs_backoff, "component rate backoff");
    cs->add_option("--samples", cs_samples, "construction samples");
    cs->add_option("--sweep-csv", cs_sweep, "write a k -> rate CSV sweep here");
    cs->add_option("--seed", cs_seed, "master seed")->required();

    // compare
    auto* cmp_cmd = app.add_subcommand("compare", "compare all approaches");
    std::string cmp_channel;
    long long cmp_budget = 1000000;
    std::uint64_t cmp_seed = 0;
    cmp_cmd->add_option("--channel", cmp_channel, "channel spec")->required();
    cmp_cmd->add_option("--budget", cmp_budget, "total channel-use budget");
    cmp_cmd->add_option("--seed", cmp_seed, "master seed")->required();

    // run --spec
    auto* run_cmd = app.add_subcommand("run", "run an experiment spec file");
    std::string run_spec;
    run_cmd->add_option("--spec", run_spec, "experiment spec JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        kernels::select_backend(backend);

        if (cap_cmd->parsed()) {
            auto ch = Dmc::from_spec(cap_channel);
            auto rep = capacity(ch, cap_tol);
            nlohmann::ordered_json j;
            j["channel"] = ch.to_json();
            j["capacity"] = rep.capacity;
            j["symmetric_capacity"] = rep.symmetric_capacity;
            j["optimal_input"] = rep.optimal_input.p;
            j["conditional_entropy_x_given_y"] = rep.conditional_entropy_x_given_y;
            j["iterations"] = rep.iterations;
            emit(j, out_path);
        } else if (ins_cmd->parsed()) {
            auto ch = Dmc::from_spec(ins_channel);
            nlohmann::ordered_json j;
            j["channel"] = ch.to_json();
            if (ins_alpha < 0) {
                auto [ap, am] = prior_ldensities(ch);
                auto s = symmetrize_prior(ap, am);
                j["aplus"] = ap.to_json();
                j["aminus"] = am.to_json();
                j["symmetrized"] = s.to_json();
                j["symmetric"] = check_symmetry(s, 1e-10);
                j["capacity_functional"] = capacity_functional(s);
            } else {
                InputDist p({1 - ins_alpha, ins_alpha});
                auto [ap, am] = posterior_ldensities(ch, p);
                auto s = symmetrize_posterior(ap, am, p);
                j["aplus"] = ap.to_json();
                j["aminus"] = am.to_json();
                j["symmetrized"] = s.to_json();
                j["symmetric"] = check_symmetry(s, 1e-10);
                j["conditional_entropy_functional"] = conditional_entropy_functional(s);
            }
            emit(j, out_path);
        } else if (gal_cmd->parsed()) {
            ExperimentSpec spec;
            spec.approach = "gallager";
            spec.channel = gal_channel;
            spec.blocklen = gal_n;
            spec.trials = gal_trials;
            spec.seed = gal_seed;
            spec.seed_set = true;
            spec.knobs = {{"delta", gal_delta},
                          {"backoff", gal_backoff},
                          {"samples", gal_samples}};
            emit_report(run(spec), out_path);
        } else if (pc->parsed()) {
            auto ch = Dmc::from_spec(pc_channel);
            double alpha = pc_alpha;
            if (alpha < 0) alpha = capacity(ch, 1e-9).optimal_input[1];
            auto ctx = build_context(ch, alpha, pc_n, pc_samples, pc_seed);
            classify(ctx, pc_rate > 0 ? SelectionPolicy::rate_targeted(pc_rate)
                                      : SelectionPolicy::threshold(pc_delta));
            std::ofstream out(pc_out);
            if (!out) throw std::runtime_error("cannot write " + pc_out);
            out << ctx.to_json().dump(2) << "\n";
            nlohmann::ordered_json j;
            j["context"] = pc_out;
            j["info_bits"] = ctx.info_size();
            j["f_r"] = static_cast<int>(ctx.f_r.size());
            j["f_d"] = static_cast<int>(ctx.f_d.size());
            j["info_z_sum"] = ctx.info_z_sum();
            emit(j, out_path);
        } else if (pe->parsed()) {
            std::ifstream in(pe_ctx);
            if (!in) throw std::runtime_error("cannot read " + pe_ctx);
            nlohmann::json cj;
            in >> cj;
            auto ctx = PolarContext::from_json(cj);
            auto x = hy_encode(ctx, parse_bits(pe_bits), pe_shared);
            nlohmann::ordered_json j;
            j["x"] = bits_to_string(x);
            emit(j, out_path);
        } else if (pd->parsed()) {
            std::ifstream in(pd_ctx);
            if (!in) throw std::runtime_error("cannot read " + pd_ctx);
            nlohmann::json cj;
            in >> cj;
            auto ctx = PolarContext::from_json(cj);
            auto dec = hy_decode(ctx, parse_symbols(pd_y), pd_shared);
            nlohmann::ordered_json j;
            j["message"] = bits_to_string(dec.message);
            emit(j, out_path);
        } else if (ps->parsed()) {
            ExperimentSpec spec;
            spec.approach = "integrated-polar";
            spec.channel = ps_channel;
            spec.blocklen = ps_n;
            spec.trials = ps_trials;
            spec.seed = ps_seed;
            spec.seed_set = true;
            spec.knobs = {{"rate_factor", ps_rate_factor}, {"samples", ps_samples}};
            emit_report(run(spec), out_path);
        } else if (ss->parsed()) {
            if (ss_mode == "integrated") {
                ExperimentSpec spec;
                spec.approach = "integrated-ldpc";
                spec.channel = ss_channel;
                spec.blocklen = ss_n;
                spec.trials = ss_trials;
                spec.seed = ss_seed;
                spec.seed_set = true;
                spec.knobs = {{"var_degree", ss_l}, {"bp_iters", ss_iters}};
                emit_report(run(spec), out_path);
            } else if (ss_mode == "biased") {
                // Syndrome-sharing transmission of a biased block: the
                // receiver knows P x and decodes from the channel output.
                auto ch = Dmc::from_spec(ss_channel);
                double alpha = ss_alpha;
                auto rep = capacity(ch, 1e-9);
                if (alpha < 0) alpha = rep.optimal_input[1];
                const int checks = static_cast<int>(std::ceil(
                    ss_n * (conditional_entropy_x_given_y(ch, InputDist({1 - alpha, alpha})) + 0.1)));
                auto g = build_graph_with_checks(ss_n, ss_l, checks,
                                                 derive_seed(ss_seed, {0xb1}));
                long long bit_errs = 0;
                int blk_errs = 0;
                for (int t = 0; t < ss_trials; ++t) {
                    Rng rng(derive_seed(ss_seed, {0xb2, static_cast<std::uint64_t>(t)}));
                    BitVec x(ss_n);
                    for (auto& b : x) b = rng.bernoulli(alpha) ? 1 : 0;
                    auto s = syndrome(g, x);
                    std::vector<int> y(ss_n);
                    for (int i = 0; i < ss_n; ++i) y[i] = ch.sample(x[i], rng);
                    BpOptions opt;
                    opt.max_iters = ss_iters;
                    auto res = bp_decode_biased(g, posterior_llrs(ch, alpha, y), s, opt);
                    int errs = 0;
                    for (int i = 0; i < ss_n; ++i) errs += res.x[i] != x[i];
                    bit_errs += errs;
                    blk_errs += errs != 0;
                }
                nlohmann::ordered_json j;
                j["mode"] = "biased";
                j["alpha"] = alpha;
                j["checks"] = checks;
                j["share_rate"] = static_cast<double>(checks) / ss_n;
                j["cond_entropy"] = conditional_entropy_x_given_y(ch, InputDist({1 - alpha, alpha}));
                j["trials"] = ss_trials;
                j["bit_error_rate"] =
                    static_cast<double>(bit_errs) / (static_cast<long long>(ss_n) * ss_trials);
                j["block_error_rate"] = static_cast<double>(blk_errs) / ss_trials;
                emit(j, out_path);
            } else if (ss_mode == "decimate") {
                auto ch = Dmc::from_spec(ss_channel);
                double alpha = ss_alpha;
                if (alpha < 0) alpha = capacity(ch, 1e-9).optimal_input[1];
                const int checks = static_cast<int>(ss_n * (binary_entropy(alpha) - 0.0225));
                auto ones = nlohmann::ordered_json::array();
                auto unfulfilled = nlohmann::ordered_json::array();
                for (int t = 0; t < ss_trials; ++t) {
                    auto g = build_graph_with_checks(ss_n, ss_l, checks,
                                                     derive_seed(ss_seed, {0xd1, static_cast<std::uint64_t>(t)}));
                    Rng rng(derive_seed(ss_seed, {0xd2, static_cast<std::uint64_t>(t)}));
                    BitVec target(checks);
                    for (auto& b : target) b = static_cast<std::uint8_t>(rng.next_u64() & 1);
                    DecimateOptions opt;
                    auto res = bp_decimate_encode(g, target, alpha, opt, rng);
                    double o = 0;
                    for (auto b : res.x) o += b;
                    ones.push_back(o / ss_n);
                    unfulfilled.push_back(static_cast<double>(res.unfulfilled) / checks);
                }
                nlohmann::ordered_json j;
                j["mode"] = "decimate";
                j["alpha"] = alpha;
                j["checks"] = checks;
                j["trials"] = ss_trials;
                j["ones_fraction"] = ones;
                j["unfulfilled_fraction"] = unfulfilled;
                emit(j, out_path);
            } else {
                throw std::runtime_error("unknown sparse mode: " + ss_mode);
            }
        } else if (cs->parsed()) {
            ExperimentSpec spec;
            spec.approach = "chaining";
            spec.channel = cs_channel;
            spec.blocklen = cs_n;
            spec.trials = cs_trials;
            spec.seed = cs_seed;
            spec.seed_set = true;
            spec.knobs = {{"k", cs_k},
                          {"backoff", cs_backoff},
                          {"samples", cs_samples},
                          {"code", cs_code},
                          {"source", cs_source}};
            auto rep = run(spec);
            if (!cs_sweep.empty()) {
                auto ch = Dmc::from_spec(cs_channel);
                auto cfg = plug_combination(cs_source, cs_code, ch, cs_k, cs_n,
                                            cs_backoff, cs_samples,
                                            derive_seed(cs_seed, {4}));
                std::ofstream csv(cs_sweep);
                if (!csv) throw std::runtime_error("cannot write " + cs_sweep);
                csv << "k,eq18_rate\n";
                std::vector<int> ks = {2, 5, 10, 20};
                auto rates = chain_rate_sweep(cfg, ks);
                for (std::size_t i = 0; i < ks.size(); ++i)
                    csv << ks[i] << "," << rates[i] << "\n";
            }
            emit_report(rep, out_path);
        } else if (cmp_cmd->parsed()) {
            emit(compare_approaches(cmp_channel, cmp_budget, cmp_seed), out_path);
        } else if (run_cmd->parsed()) {
            std::ifstream in(run_spec);
            if (!in) throw std::runtime_error("cannot read " + run_spec);
            nlohmann::json sj;
            in >> sj;
            emit_report(run(ExperimentSpec::from_json(sj)), out_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
