#include "asymcap/dmc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace asymcap {

namespace {

constexpr double row_sum_tol = 1e-12;

double xlog2x(double x) { return x > 0 ? x * std::log2(x) : 0.0; }

}  // namespace

InputDist::InputDist(std::vector<double> probs) : p(std::move(probs)) {
    if (p.empty()) throw std::invalid_argument("InputDist: empty");
    double sum = 0;
    for (double v : p) {
        if (v < -1e-15 || v > 1.0 + 1e-12)
            throw std::invalid_argument("InputDist: entry outside [0,1]");
        sum += v;
    }
    if (std::abs(sum - 1.0) > row_sum_tol)
        throw std::invalid_argument("InputDist: does not sum to 1");
}

InputDist InputDist::uniform(int k) {
    return InputDist(std::vector<double>(k, 1.0 / k));
}

InputDist InputDist::point_mass(int k, int x) {
    std::vector<double> v(k, 0.0);
    v[static_cast<std::size_t>(x)] = 1.0;
    return InputDist(std::move(v));
}

Dmc::Dmc(int input_size, int output_size, std::vector<double> w)
    : input_size_(input_size), output_size_(output_size), w_(std::move(w)) {
    if (input_size_ <= 0 || output_size_ <= 0)
        throw std::invalid_argument("Dmc: alphabet sizes must be positive");
    if (w_.size() != static_cast<std::size_t>(input_size_) * output_size_)
        throw std::invalid_argument("Dmc: matrix size mismatch");
    for (int x = 0; x < input_size_; ++x) {
        double sum = 0;
        for (int y = 0; y < output_size_; ++y) {
            double v = at(x, y);
            if (v < 0 || v > 1.0 + 1e-12)
                throw std::invalid_argument("Dmc: entry outside [0,1]");
            sum += v;
        }
        if (std::abs(sum - 1.0) > row_sum_tol)
            throw std::invalid_argument("Dmc: row does not sum to 1");
    }

    // Prune unreachable outputs, keeping the index remap.
    std::vector<int> kept;
    for (int y = 0; y < output_size_; ++y) {
        bool reachable = false;
        for (int x = 0; x < input_size_ && !reachable; ++x)
            reachable = at(x, y) > 0;
        if (reachable) kept.push_back(y);
    }
    if (kept.empty()) throw std::invalid_argument("Dmc: all outputs unreachable");
    if (static_cast<int>(kept.size()) != output_size_) {
        std::vector<double> packed(static_cast<std::size_t>(input_size_) * kept.size());
        for (int x = 0; x < input_size_; ++x)
            for (std::size_t j = 0; j < kept.size(); ++j)
                packed[x * kept.size() + j] = at(x, kept[j]);
        w_ = std::move(packed);
        output_size_ = static_cast<int>(kept.size());
    }
    kept_outputs_ = std::move(kept);
}

int Dmc::sample(int x, Rng& rng) const {
    if (x < 0 || x >= input_size_)
        throw std::out_of_range("Dmc::sample: input symbol out of range");
    double u = rng.next_double();
    double acc = 0;
    for (int y = 0; y < output_size_; ++y) {
        acc += at(x, y);
        if (u < acc) return y;
    }
    return output_size_ - 1;
}

Dmc Dmc::bsc(double p) {
    return Dmc(2, 2, {1 - p, p, p, 1 - p});
}

Dmc Dmc::bec(double eps) {
    // Outputs: 0, 1, erasure.
    return Dmc(2, 3, {1 - eps, 0, eps, 0, 1 - eps, eps});
}

Dmc Dmc::zchannel(double q) {
    return Dmc(2, 2, {1, 0, q, 1 - q});
}

Dmc Dmc::bac(double p0, double p1) {
    return Dmc(2, 2, {1 - p0, p0, p1, 1 - p1});
}

Dmc Dmc::identity(int k) {
    std::vector<double> w(static_cast<std::size_t>(k) * k, 0.0);
    for (int i = 0; i < k; ++i) w[static_cast<std::size_t>(i) * k + i] = 1.0;
    return Dmc(k, k, std::move(w));
}

namespace {

std::vector<double> parse_args(const std::string& body) {
    std::vector<double> args;
    std::stringstream ss(body);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        args.push_back(v);
    }
    return args;
}

}  // namespace

Dmc Dmc::from_spec(const std::string& spec) {
    auto open = spec.find('(');
    if (open != std::string::npos && spec.back() == ')') {
        std::string name = spec.substr(0, open);
        auto args = parse_args(spec.substr(open + 1, spec.size() - open - 2));
        if (name == "bsc" && args.size() == 1) return bsc(args[0]);
        if (name == "bec" && args.size() == 1) return bec(args[0]);
        if (name == "zchannel" && args.size() == 1) return zchannel(args[0]);
        if (name == "bac" && args.size() == 2) return bac(args[0], args[1]);
        if (name == "identity" && args.size() == 1)
            return identity(static_cast<int>(args[0]));
        throw std::invalid_argument("unknown channel preset: " + spec);
    }
    if (!spec.empty() && (spec[0] == '{' || spec[0] == '[')) {
        return from_json(nlohmann::json::parse(spec));
    }
    std::ifstream in(spec);
    if (!in) throw std::invalid_argument("channel spec is neither a preset nor a readable file: " + spec);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

Dmc Dmc::from_json(const nlohmann::json& j) {
    int in_size = j.at("input_size").get<int>();
    int out_size = j.at("output_size").get<int>();
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(in_size) * out_size);
    for (const auto& row : j.at("w")) {
        if (static_cast<int>(row.size()) != out_size)
            throw std::invalid_argument("channel JSON: row width mismatch");
        for (const auto& v : row) w.push_back(v.get<double>());
    }
    if (static_cast<int>(w.size()) != in_size * out_size)
        throw std::invalid_argument("channel JSON: row count mismatch");
    return Dmc(in_size, out_size, std::move(w));
}

nlohmann::ordered_json Dmc::to_json() const {
    nlohmann::ordered_json j;
    j["input_size"] = input_size_;
    j["output_size"] = output_size_;
    auto rows = nlohmann::ordered_json::array();
    for (int x = 0; x < input_size_; ++x) {
        auto row = nlohmann::ordered_json::array();
        for (int y = 0; y < output_size_; ++y) row.push_back(at(x, y));
        rows.push_back(row);
    }
    j["w"] = rows;
    return j;
}

double binary_entropy(double x) {
    if (x <= 0 || x >= 1) return 0.0;
    return -x * std::log2(x) - (1 - x) * std::log2(1 - x);
}

double entropy_bits(const std::vector<double>& p) {
    double h = 0;
    for (double v : p) h -= xlog2x(v);
    return h;
}

double entropy_bits(const InputDist& p) { return entropy_bits(p.p); }

double mutual_information(const Dmc& ch, const InputDist& p) {
    if (p.size() != ch.input_size())
        throw std::invalid_argument("mutual_information: dimension mismatch");
    const int nx = ch.input_size(), ny = ch.output_size();
    std::vector<double> q(ny, 0.0);
    for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y) q[y] += p[x] * ch.at(x, y);
    double mi = 0;
    for (int x = 0; x < nx; ++x) {
        if (p[x] <= 0) continue;
        for (int y = 0; y < ny; ++y) {
            double wxy = ch.at(x, y);
            if (wxy > 0) mi += p[x] * wxy * std::log2(wxy / q[y]);
        }
    }
    return mi;
}

double conditional_entropy_x_given_y(const Dmc& ch, const InputDist& p) {
    if (p.size() != ch.input_size())
        throw std::invalid_argument("conditional_entropy: dimension mismatch");
    const int nx = ch.input_size(), ny = ch.output_size();
    std::vector<double> q(ny, 0.0);
    for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y) q[y] += p[x] * ch.at(x, y);
    double h = 0;
    for (int x = 0; x < nx; ++x) {
        if (p[x] <= 0) continue;
        for (int y = 0; y < ny; ++y) {
            double joint = p[x] * ch.at(x, y);
            if (joint > 0) h -= joint * std::log2(joint / q[y]);
        }
    }
    return h;
}

double total_variation(const InputDist& a, const InputDist& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("total_variation: dimension mismatch");
    double s = 0;
    for (int x = 0; x < a.size(); ++x) s += std::abs(a[x] - b[x]);
    return 0.5 * s;
}

InfoReport capacity(const Dmc& ch, double tol) {
    if (tol <= 0) throw std::invalid_argument("capacity: tol must be positive");
    const int nx = ch.input_size(), ny = ch.output_size();
    constexpr int max_iters = 100000;

    std::vector<double> p(nx, 1.0 / nx), cand(nx);
    std::vector<double> q(ny), d(nx), d_cand(nx);

    // One full pass: q = pW, d[x] = D(W(.|x) || q) in bits, and the bracket
    // I(p) = sum p d <= C <= max_x d[x], valid for any input distribution.
    auto stats = [&](const std::vector<double>& in, std::vector<double>& dx_out,
                     double& lo, double& up) {
        std::fill(q.begin(), q.end(), 0.0);
        for (int x = 0; x < nx; ++x)
            for (int y = 0; y < ny; ++y) q[y] += in[x] * ch.at(x, y);
        lo = 0;
        up = -1e300;
        for (int x = 0; x < nx; ++x) {
            double dx = 0;
            for (int y = 0; y < ny; ++y) {
                double wxy = ch.at(x, y);
                if (wxy > 0) dx += q[y] > 0 ? wxy * std::log2(wxy / q[y]) : 1e6;
            }
            dx_out[x] = dx;
            lo += in[x] * dx;
            up = std::max(up, dx);
        }
    };
    auto step = [&](const std::vector<double>& in, const std::vector<double>& dx,
                    double up, double gamma, std::vector<double>& out) {
        double norm = 0;
        for (int x = 0; x < nx; ++x) {
            out[x] = std::max(in[x] * std::exp2(gamma * (dx[x] - up)), 1e-300);
            norm += out[x];
        }
        for (int x = 0; x < nx; ++x) out[x] /= norm;
    };

    double lower = 0, upper = 0;
    stats(p, d, lower, upper);
    // gamma = 1 is the plain (provably monotone) update; larger steps fight
    // the O(1/t) stall caused by near-inactive inputs and are only accepted
    // when I(p) does not decrease, so the bracket stays a valid certificate
    // and I(p) never drops below its uniform-input starting value.
    double gamma = 1.0;
    int it = 0;
    while (upper - lower >= tol) {
        if (++it > max_iters)
            throw std::runtime_error(
                "capacity: Blahut-Arimoto did not converge (tol too small?)");
        step(p, d, upper, gamma, cand);
        double lower_c = 0, upper_c = 0;
        stats(cand, d_cand, lower_c, upper_c);
        if (lower_c >= lower || gamma == 1.0) {
            p.swap(cand);
            d.swap(d_cand);
            lower = lower_c;
            upper = upper_c;
            gamma = std::min(gamma * 1.25, 64.0);
        } else {
            gamma = std::max(1.0, gamma / 4.0);
        }
    }

    InfoReport rep;
    rep.optimal_input = InputDist(p);
    rep.mutual_information = mutual_information(ch, rep.optimal_input);
    rep.capacity = rep.mutual_information;
    rep.symmetric_capacity = mutual_information(ch, InputDist::uniform(nx));
    rep.conditional_entropy_x_given_y = conditional_entropy_x_given_y(ch, rep.optimal_input);
    rep.iterations = it;
    rep.bracket_gap = upper - lower;
    return rep;
}

}  // namespace asymcap
