#pragma once

#include <utility>
#include <vector>

#include "json.hpp"

#include "asymcap/dmc.hpp"

namespace asymcap {

// Finitely supported distribution of a log-likelihood ratio. Atoms at +/-inf
// are first-class: the Z-channel and the BEC have genuine infinite-LLR events
// and the functionals below define their contributions by continuous limit.
struct LAtom {
    double llr;
    double mass;
};

enum class LTag { prior, posterior };

struct DiscreteLDensity {
    std::vector<LAtom> atoms;  // sorted by llr, equal values merged, masses > 0
    LTag tag = LTag::prior;

    static DiscreteLDensity from_atoms(std::vector<LAtom> atoms, LTag tag);
    double total_mass() const;
    nlohmann::ordered_json to_json() const;
};

// Distributions of L(Y) = ln(W(y|bit 0)/W(y|bit 1)) conditioned on the
// transmitted bit; .first is given bit 0 (mapped to +1), .second given bit 1.
std::pair<DiscreteLDensity, DiscreteLDensity> prior_ldensities(const Dmc& ch);

// a_s(y) = (a_minus(-y) + a_plus(y)) / 2
DiscreteLDensity symmetrize_prior(const DiscreteLDensity& aplus,
                                  const DiscreteLDensity& aminus);

// True iff every atom (y, m) has a partner at -y with mass m*e^{-y} within
// tol; a +inf atom pairs with zero mass at -inf.
bool check_symmetry(const DiscreteLDensity& d, double tol);

// sum m * (1 - log2(1 + e^{-llr})); requires a symmetric density.
double capacity_functional(const DiscreteLDensity& d);

// Posterior LLR densities under prior p: L_p(y) = ln p(0|y) - ln p(1|y).
std::pair<DiscreteLDensity, DiscreteLDensity> posterior_ldensities(
    const Dmc& ch, const InputDist& p);

// a_ps(y) = alpha * a_pminus(-y) + (1-alpha) * a_pplus(y), alpha = p(bit 1).
DiscreteLDensity symmetrize_posterior(const DiscreteLDensity& applus,
                                      const DiscreteLDensity& apminus,
                                      const InputDist& p);

// sum m * log2(1 + e^{-llr}); requires a symmetric posterior density.
double conditional_entropy_functional(const DiscreteLDensity& d);

}  // namespace asymcap
