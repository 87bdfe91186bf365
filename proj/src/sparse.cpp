#include "asymcap/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace asymcap {

namespace {

constexpr double llr_clamp = 30.0;
constexpr double decided_llr = 1e3;  // tanh(x/2) == 1.0 exactly at this scale

double clamp_llr(double v) {
    if (v > llr_clamp) return llr_clamp;
    if (v < -llr_clamp) return -llr_clamp;
    return v;
}

void build_csr(SparseGraph& g) {
    const int e = g.num_edges();
    g.var_off.assign(g.n + 1, 0);
    g.chk_off.assign(g.r + 1, 0);
    for (int k = 0; k < e; ++k) {
        ++g.var_off[g.edge_var[k] + 1];
        ++g.chk_off[g.edge_chk[k] + 1];
    }
    for (int v = 0; v < g.n; ++v) g.var_off[v + 1] += g.var_off[v];
    for (int c = 0; c < g.r; ++c) g.chk_off[c + 1] += g.chk_off[c];
    g.var_edges.assign(e, 0);
    g.chk_edges.assign(e, 0);
    auto vcur = g.var_off;
    auto ccur = g.chk_off;
    for (int k = 0; k < e; ++k) {
        g.var_edges[vcur[g.edge_var[k]]++] = k;
        g.chk_edges[ccur[g.edge_chk[k]]++] = k;
    }
}

}  // namespace

SparseGraph build_graph_with_checks(int n, int l, int checks, std::uint64_t seed) {
    if (n <= 0 || l <= 0 || checks <= 0)
        throw std::invalid_argument("sparse graph: sizes must be positive");
    const int e = n * l;
    if (checks > e)
        throw std::invalid_argument("sparse graph: more checks than sockets");

    SparseGraph g;
    g.n = n;
    g.r = checks;
    g.var_degree = l;
    g.seed = seed;
    g.edge_var.resize(e);
    g.edge_chk.resize(e);
    for (int k = 0; k < e; ++k) g.edge_var[k] = k / l;

    // Check degrees e/checks rounded, remainder group first.
    std::vector<int> chk_of_socket(e);
    {
        const int base = e / checks, rem = e % checks;
        int s = 0;
        for (int c = 0; c < checks; ++c) {
            const int deg = base + (c < rem ? 1 : 0);
            for (int d = 0; d < deg; ++d) chk_of_socket[s++] = c;
        }
    }
    Rng rng(derive_seed(seed, {0x9a9fu}));
    for (int k = e - 1; k > 0; --k) {
        const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k + 1)));
        std::swap(chk_of_socket[k], chk_of_socket[j]);
    }
    for (int k = 0; k < e; ++k) g.edge_chk[k] = chk_of_socket[k];

    // Break up parallel edges by pair swaps.
    for (int pass = 0; pass < 200; ++pass) {
        std::vector<int> dups;
        std::vector<std::pair<int, int>> seen;
        seen.reserve(e);
        for (int k = 0; k < e; ++k) seen.push_back({g.edge_var[k] * checks + g.edge_chk[k], k});
        std::sort(seen.begin(), seen.end());
        for (int k = 1; k < e; ++k)
            if (seen[k].first == seen[k - 1].first) dups.push_back(seen[k].second);
        if (dups.empty()) break;
        for (int k : dups) {
            const int other = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(e)));
            std::swap(g.edge_chk[k], g.edge_chk[other]);
        }
    }
    build_csr(g);
    return g;
}

SparseGraph build_regular_graph(int n, int l, int r, std::uint64_t seed) {
    if (r <= 0 || (static_cast<long long>(n) * l) % r != 0)
        throw std::invalid_argument("build_regular_graph: r must divide n*l");
    return build_graph_with_checks(n, l, n * l / r, seed);
}

BitVec syndrome(const SparseGraph& g, const BitVec& x) {
    if (static_cast<int>(x.size()) != g.n)
        throw std::invalid_argument("syndrome: length mismatch");
    BitVec s(g.r, 0);
    for (int k = 0; k < g.num_edges(); ++k) s[g.edge_chk[k]] ^= x[g.edge_var[k]];
    return s;
}

namespace {

struct BpState {
    std::vector<double> v2c, c2v, total;
    std::vector<double> tanh_half;

    explicit BpState(const SparseGraph& g)
        : v2c(g.num_edges(), 0.0),
          c2v(g.num_edges(), 0.0),
          total(g.n, 0.0),
          tanh_half(g.num_edges(), 0.0) {}
};

void check_pass(const SparseGraph& g, const BitVec& target, int c_lo, int c_hi,
                BpState& st) {
    for (int k = 0; k < g.num_edges(); ++k)
        st.tanh_half[k] = std::tanh(0.5 * st.v2c[k]);
    for (int c = c_lo; c < c_hi; ++c) {
        const int deg = g.chk_off[c + 1] - g.chk_off[c];
        const int* edges = g.chk_edges.data() + g.chk_off[c];
        // Exclusive products via forward/backward sweeps.
        double fwd = 1.0;
        static thread_local std::vector<double> suffix;
        suffix.assign(deg + 1, 1.0);
        for (int d = deg - 1; d >= 0; --d)
            suffix[d] = suffix[d + 1] * st.tanh_half[edges[d]];
        const double sign = target[c] ? -1.0 : 1.0;
        for (int d = 0; d < deg; ++d) {
            double prod = sign * fwd * suffix[d + 1];
            if (prod > 1.0 - 1e-14) prod = 1.0 - 1e-14;
            if (prod < -(1.0 - 1e-14)) prod = -(1.0 - 1e-14);
            st.c2v[edges[d]] = clamp_llr(2.0 * std::atanh(prod));
            fwd *= st.tanh_half[edges[d]];
        }
    }
}

void var_pass(const SparseGraph& g, const std::vector<double>& llr, BpState& st) {
    for (int v = 0; v < g.n; ++v) {
        const int lo = g.var_off[v], hi = g.var_off[v + 1];
        double sum = llr[v];
        for (int d = lo; d < hi; ++d) sum += st.c2v[g.var_edges[d]];
        st.total[v] = sum;
        for (int d = lo; d < hi; ++d) {
            const int k = g.var_edges[d];
            st.v2c[k] = clamp_llr(sum - st.c2v[k]);
        }
    }
}

bool syndrome_satisfied(const SparseGraph& g, const BitVec& x,
                        const BitVec& target, int c_lo, int c_hi) {
    for (int c = c_lo; c < c_hi; ++c) {
        std::uint8_t parity = 0;
        for (int d = g.chk_off[c]; d < g.chk_off[c + 1]; ++d)
            parity ^= x[g.edge_var[g.chk_edges[d]]];
        if (parity != target[c]) return false;
    }
    return true;
}

}  // namespace

BpResult bp_decode_biased(const SparseGraph& g, const std::vector<double>& llr,
                          const BitVec& target_syndrome, const BpOptions& opt) {
    if (static_cast<int>(llr.size()) != g.n)
        throw std::invalid_argument("bp_decode_biased: llr length mismatch");
    const int c_lo = opt.first_check;
    const int c_hi = opt.num_checks < 0 ? g.r : opt.first_check + opt.num_checks;
    if (c_lo < 0 || c_hi > g.r || c_lo > c_hi)
        throw std::invalid_argument("bp_decode_biased: bad check range");
    if (static_cast<int>(target_syndrome.size()) < c_hi)
        throw std::invalid_argument("bp_decode_biased: syndrome too short");

    BpState st(g);
    for (int k = 0; k < g.num_edges(); ++k) st.v2c[k] = clamp_llr(llr[g.edge_var[k]]);

    BpResult res;
    res.x.assign(g.n, 0);
    for (int it = 1; it <= opt.max_iters; ++it) {
        check_pass(g, target_syndrome, c_lo, c_hi, st);
        var_pass(g, llr, st);
        if (opt.message_trace) opt.message_trace->push_back(st.c2v);
        for (int v = 0; v < g.n; ++v) res.x[v] = st.total[v] < 0 ? 1 : 0;
        res.iterations = it;
        if (syndrome_satisfied(g, res.x, target_syndrome, c_lo, c_hi)) {
            res.syndrome_ok = true;
            return res;
        }
    }
    return res;
}

std::vector<double> posterior_llrs(const Dmc& ch, double alpha,
                                   const std::vector<int>& y) {
    if (ch.input_size() != 2)
        throw std::invalid_argument("posterior_llrs: binary-input channel required");
    std::vector<double> llr(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double q0 = (1 - alpha) * ch.at(0, y[i]);
        const double q1 = alpha * ch.at(1, y[i]);
        if (q0 <= 0 && q1 <= 0)
            throw std::invalid_argument("posterior_llrs: impossible observation");
        if (q0 <= 0)
            llr[i] = -llr_clamp;
        else if (q1 <= 0)
            llr[i] = llr_clamp;
        else
            llr[i] = clamp_llr(std::log(q0 / q1));
    }
    return llr;
}

TaskCheckResult task_equivalence_check(const SparseGraph& g, double alpha,
                                       const BitVec& y, int max_iters) {
    TaskCheckResult r;
    BpOptions opt;
    opt.max_iters = max_iters;

    // Task 2: decompress the flip pattern from the syndrome of y.
    const auto s = syndrome(g, y);
    const double prior = std::log((1 - alpha) / alpha);
    auto e_dec = bp_decode_biased(g, std::vector<double>(g.n, prior), s, opt);
    r.task2_ok = e_dec.syndrome_ok;

    // Task 3: decode the codeword from y over the BSC(alpha).
    std::vector<double> llr(g.n);
    for (int v = 0; v < g.n; ++v) llr[v] = y[v] ? -prior : prior;
    auto c_dec = bp_decode_biased(g, llr, BitVec(g.r, 0), opt);
    r.task3_ok = c_dec.syndrome_ok;

    r.consistent = true;
    for (int v = 0; v < g.n; ++v)
        if ((y[v] ^ e_dec.x[v]) != c_dec.x[v]) {
            r.consistent = false;
            break;
        }
    return r;
}

DecimateResult bp_decimate_encode(const SparseGraph& g, const BitVec& target,
                                  double alpha, const DecimateOptions& opt,
                                  Rng& rng) {
    if (static_cast<int>(target.size()) != g.r)
        throw std::invalid_argument("bp_decimate_encode: syndrome length mismatch");
    if (alpha <= 0 || alpha >= 1)
        throw std::invalid_argument("bp_decimate_encode: alpha must be in (0,1)");

    const double prior = std::log((1 - alpha) / alpha);
    BpState st(g);
    std::vector<std::uint8_t> decided(g.n, 0), value(g.n, 0);
    std::vector<double> llr(g.n, prior);
    for (int k = 0; k < g.num_edges(); ++k) st.v2c[k] = clamp_llr(prior);

    DecimateResult res;
    int undecided = g.n;
    struct Cand {
        double mag;
        std::uint64_t tie;
        int var;
    };
    std::vector<Cand> cands;

    while (undecided > 0) {
        for (int it = 0; it < opt.iters_per_round; ++it) {
            check_pass(g, target, 0, g.r, st);
            var_pass(g, llr, st);
            // Decimated variables keep broadcasting their fixed value.
            for (int v = 0; v < g.n; ++v) {
                if (!decided[v]) continue;
                const double out = value[v] ? -decided_llr : decided_llr;
                for (int d = g.var_off[v]; d < g.var_off[v + 1]; ++d)
                    st.v2c[g.var_edges[d]] = out;
            }
        }
        cands.clear();
        for (int v = 0; v < g.n; ++v)
            if (!decided[v]) cands.push_back({std::abs(st.total[v]), rng.next_u64(), v});
        const int fix = std::max(1, static_cast<int>(std::ceil(opt.fraction * undecided)));
        const int take = std::min<int>(fix, static_cast<int>(cands.size()));
        std::partial_sort(cands.begin(), cands.begin() + take, cands.end(),
                          [](const Cand& a, const Cand& b) {
                              if (a.mag != b.mag) return a.mag > b.mag;
                              return a.tie > b.tie;
                          });
        for (int k = 0; k < take; ++k) {
            const int v = cands[k].var;
            decided[v] = 1;
            if (st.total[v] > 0)
                value[v] = 0;
            else if (st.total[v] < 0)
                value[v] = 1;
            else
                value[v] = static_cast<std::uint8_t>(rng.next_u64() & 1);
            const double out = value[v] ? -decided_llr : decided_llr;
            for (int d = g.var_off[v]; d < g.var_off[v + 1]; ++d)
                st.v2c[g.var_edges[d]] = out;
        }
        undecided -= take;
        ++res.rounds;
    }

    res.x.assign(value.begin(), value.end());
    const auto s = syndrome(g, res.x);
    for (int c = 0; c < g.r; ++c) res.unfulfilled += s[c] != target[c];
    return res;
}

IntegratedEncodeResult integrated_encode(const SparseGraph& g, int m1,
                                         const BitVec& s1, double alpha,
                                         const DecimateOptions& opt,
                                         std::uint64_t shared_seed, Rng& rng) {
    if (m1 < 0 || m1 > g.r)
        throw std::invalid_argument("integrated_encode: bad split point");
    if (static_cast<int>(s1.size()) != m1)
        throw std::invalid_argument("integrated_encode: message length != m1");
    IntegratedEncodeResult res;
    Rng shared(derive_seed(shared_seed, {0x52u}));
    res.s2.resize(g.r - m1);
    for (auto& b : res.s2) b = static_cast<std::uint8_t>(shared.next_u64() & 1);
    BitVec target(s1);
    target.insert(target.end(), res.s2.begin(), res.s2.end());
    auto dec = bp_decimate_encode(g, target, alpha, opt, rng);
    res.x = std::move(dec.x);
    res.unfulfilled = dec.unfulfilled;
    res.encoder_ok = dec.unfulfilled == 0;
    return res;
}

IntegratedDecodeResult integrated_decode(const SparseGraph& g, int m1,
                                         const std::vector<double>& llr,
                                         std::uint64_t shared_seed,
                                         int max_iters) {
    IntegratedDecodeResult res;
    Rng shared(derive_seed(shared_seed, {0x52u}));
    BitVec target(g.r, 0);
    for (int c = m1; c < g.r; ++c)
        target[c] = static_cast<std::uint8_t>(shared.next_u64() & 1);
    BpOptions opt;
    opt.max_iters = max_iters;
    opt.first_check = m1;
    opt.num_checks = g.r - m1;
    auto bp = bp_decode_biased(g, llr, target, opt);
    res.decoder_ok = bp.syndrome_ok;
    res.x_hat = std::move(bp.x);
    const auto full = syndrome(g, res.x_hat);
    res.s1_hat.assign(full.begin(), full.begin() + m1);
    return res;
}

nlohmann::ordered_json SparseGraph::to_json() const {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["n"] = n;
    j["checks"] = r;
    j["var_degree"] = var_degree;
    j["seed"] = seed;
    j["edge_chk"] = edge_chk;
    return j;
}

SparseGraph SparseGraph::from_json(const nlohmann::json& j) {
    if (j.at("version").get<int>() != 1)
        throw std::invalid_argument("SparseGraph: unsupported version");
    SparseGraph g;
    g.n = j.at("n").get<int>();
    g.r = j.at("checks").get<int>();
    g.var_degree = j.at("var_degree").get<int>();
    g.seed = j.at("seed").get<std::uint64_t>();
    g.edge_chk = j.at("edge_chk").get<std::vector<int>>();
    const int e = g.n * g.var_degree;
    if (static_cast<int>(g.edge_chk.size()) != e)
        throw std::invalid_argument("SparseGraph: edge list size mismatch");
    g.edge_var.resize(e);
    for (int k = 0; k < e; ++k) g.edge_var[k] = k / g.var_degree;
    build_csr(g);
    return g;
}

}  // namespace asymcap
