#include "asymcap/ldensity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace asymcap {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double merge_tol = 1e-12;
constexpr double symmetry_precondition_tol = 1e-9;

// log2(1 + e^{-y}), continuous at the extremes.
double log2_one_plus_exp_neg(double y) {
    if (y == inf) return 0.0;
    if (y == -inf) return inf;
    if (y < -700.0) return -y / std::numbers::ln2_v<double>;
    return std::log1p(std::exp(-y)) / std::numbers::ln2_v<double>;
}

void require_binary(const Dmc& ch) {
    if (ch.input_size() != 2)
        throw std::invalid_argument("L-densities need a binary input alphabet");
}

}  // namespace

DiscreteLDensity DiscreteLDensity::from_atoms(std::vector<LAtom> atoms, LTag tag) {
    std::vector<LAtom> kept;
    kept.reserve(atoms.size());
    for (const auto& a : atoms) {
        if (std::isnan(a.llr)) throw std::invalid_argument("L-density: NaN llr");
        if (a.mass < 0) throw std::invalid_argument("L-density: negative mass");
        if (a.mass > 0) kept.push_back(a);
    }
    std::sort(kept.begin(), kept.end(),
              [](const LAtom& a, const LAtom& b) { return a.llr < b.llr; });
    std::vector<LAtom> merged;
    for (const auto& a : kept) {
        if (!merged.empty() &&
            (a.llr == merged.back().llr ||
             std::abs(a.llr - merged.back().llr) <= merge_tol)) {
            merged.back().mass += a.mass;
        } else {
            merged.push_back(a);
        }
    }
    double sum = 0;
    for (const auto& a : merged) sum += a.mass;
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("L-density: masses do not sum to 1");
    DiscreteLDensity d;
    d.atoms = std::move(merged);
    d.tag = tag;
    return d;
}

double DiscreteLDensity::total_mass() const {
    double s = 0;
    for (const auto& a : atoms) s += a.mass;
    return s;
}

nlohmann::ordered_json DiscreteLDensity::to_json() const {
    nlohmann::ordered_json j;
    j["tag"] = tag == LTag::prior ? "prior" : "posterior";
    auto arr = nlohmann::ordered_json::array();
    for (const auto& a : atoms) {
        nlohmann::ordered_json atom;
        if (a.llr == inf)
            atom["llr"] = "inf";
        else if (a.llr == -inf)
            atom["llr"] = "-inf";
        else
            atom["llr"] = a.llr;
        atom["mass"] = a.mass;
        arr.push_back(atom);
    }
    j["atoms"] = arr;
    return j;
}

std::pair<DiscreteLDensity, DiscreteLDensity> prior_ldensities(const Dmc& ch) {
    require_binary(ch);
    std::vector<LAtom> plus, minus;
    for (int y = 0; y < ch.output_size(); ++y) {
        const double w0 = ch.at(0, y), w1 = ch.at(1, y);
        if (w0 == 0 && w1 == 0) continue;  // pruned at construction anyway
        double llr;
        if (w1 == 0)
            llr = inf;
        else if (w0 == 0)
            llr = -inf;
        else
            llr = std::log(w0 / w1);
        plus.push_back({llr, w0});
        minus.push_back({llr, w1});
    }
    return {DiscreteLDensity::from_atoms(std::move(plus), LTag::prior),
            DiscreteLDensity::from_atoms(std::move(minus), LTag::prior)};
}

namespace {

DiscreteLDensity mix_reflected(const DiscreteLDensity& plus,
                               const DiscreteLDensity& minus,
                               double weight_plus, double weight_minus,
                               LTag tag) {
    std::vector<LAtom> atoms;
    atoms.reserve(plus.atoms.size() + minus.atoms.size());
    for (const auto& a : plus.atoms) atoms.push_back({a.llr, weight_plus * a.mass});
    for (const auto& a : minus.atoms) atoms.push_back({-a.llr, weight_minus * a.mass});
    return DiscreteLDensity::from_atoms(std::move(atoms), tag);
}

}  // namespace

DiscreteLDensity symmetrize_prior(const DiscreteLDensity& aplus,
                                  const DiscreteLDensity& aminus) {
    return mix_reflected(aplus, aminus, 0.5, 0.5, LTag::prior);
}

bool check_symmetry(const DiscreteLDensity& d, double tol) {
    for (const auto& a : d.atoms) {
        if (a.llr == -inf) {
            if (a.mass > tol) return false;
            continue;
        }
        if (a.llr == inf) {
            // Pairs with zero mass at -inf; any explicit -inf atom is caught above.
            continue;
        }
        // Expected mass at -llr is mass * e^{-llr}, computed in log space so
        // large |llr| cannot overflow.
        const double expected = std::exp(std::log(a.mass) - a.llr);
        double found = 0;
        for (const auto& b : d.atoms) {
            if (std::abs(b.llr + a.llr) <= 1e-9) {
                found = b.mass;
                break;
            }
        }
        if (std::abs(found - expected) > tol) return false;
    }
    return true;
}

double capacity_functional(const DiscreteLDensity& d) {
    if (!check_symmetry(d, symmetry_precondition_tol))
        throw std::invalid_argument("capacity_functional: density is not symmetric");
    double c = 0;
    for (const auto& a : d.atoms) {
        if (a.llr == -inf) continue;  // symmetry bounds its mass below tol
        c += a.mass * (1.0 - log2_one_plus_exp_neg(a.llr));
    }
    return c;
}

std::pair<DiscreteLDensity, DiscreteLDensity> posterior_ldensities(
    const Dmc& ch, const InputDist& p) {
    require_binary(ch);
    if (p.size() != 2)
        throw std::invalid_argument("posterior_ldensities: prior must be binary");
    const double alpha = p[1];
    if (alpha <= 0 || alpha >= 1)
        throw std::invalid_argument("posterior_ldensities: degenerate prior");
    const double shift = std::log((1 - alpha) / alpha);
    std::vector<LAtom> plus, minus;
    for (int y = 0; y < ch.output_size(); ++y) {
        const double w0 = ch.at(0, y), w1 = ch.at(1, y);
        if (w0 == 0 && w1 == 0) continue;
        double llr;
        if (w1 == 0)
            llr = inf;
        else if (w0 == 0)
            llr = -inf;
        else
            llr = std::log(w0 / w1) + shift;
        plus.push_back({llr, w0});
        minus.push_back({llr, w1});
    }
    return {DiscreteLDensity::from_atoms(std::move(plus), LTag::posterior),
            DiscreteLDensity::from_atoms(std::move(minus), LTag::posterior)};
}

DiscreteLDensity symmetrize_posterior(const DiscreteLDensity& applus,
                                      const DiscreteLDensity& apminus,
                                      const InputDist& p) {
    if (p.size() != 2)
        throw std::invalid_argument("symmetrize_posterior: prior must be binary");
    const double alpha = p[1];
    if (alpha <= 0 || alpha >= 1)
        throw std::invalid_argument("symmetrize_posterior: degenerate prior");
    return mix_reflected(applus, apminus, 1 - alpha, alpha, LTag::posterior);
}

double conditional_entropy_functional(const DiscreteLDensity& d) {
    if (d.tag != LTag::posterior)
        throw std::invalid_argument(
            "conditional_entropy_functional: posterior density required");
    if (!check_symmetry(d, symmetry_precondition_tol))
        throw std::invalid_argument(
            "conditional_entropy_functional: density is not symmetric");
    double h = 0;
    for (const auto& a : d.atoms) {
        if (a.llr == -inf) continue;
        h += a.mass * log2_one_plus_exp_neg(a.llr);
    }
    return h;
}

}  // namespace asymcap
