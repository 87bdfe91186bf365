#pragma once

#include <cmath>
#include <vector>

#include "asymcap/dmc.hpp"
#include "asymcap/rng.hpp"

namespace asymcap::testing {

// Random row-stochastic channel with strictly positive entries, so every
// output stays reachable and no column gets pruned.
inline Dmc random_channel(int nx, int ny, Rng& rng) {
    std::vector<double> w(static_cast<std::size_t>(nx) * ny);
    for (int x = 0; x < nx; ++x) {
        double sum = 0;
        for (int y = 0; y < ny; ++y) {
            double v = 0.02 + rng.next_double();
            w[static_cast<std::size_t>(x) * ny + y] = v;
            sum += v;
        }
        for (int y = 0; y < ny; ++y) w[static_cast<std::size_t>(x) * ny + y] /= sum;
    }
    return Dmc(nx, ny, std::move(w));
}

inline InputDist random_dist(int k, Rng& rng) {
    std::vector<double> p(k);
    double sum = 0;
    for (int i = 0; i < k; ++i) {
        p[i] = 0.01 + rng.next_double();
        sum += p[i];
    }
    for (int i = 0; i < k; ++i) p[i] /= sum;
    return InputDist(std::move(p));
}

// Closed-form Z-channel capacity, used as an oracle for Blahut-Arimoto.
inline double zchannel_capacity(double q) {
    const double e = (1 - q) * std::pow(q, q / (1 - q));
    return std::log2(1 + e);
}

}  // namespace asymcap::testing
