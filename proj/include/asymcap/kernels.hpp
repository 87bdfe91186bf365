#pragma once

#include <cstddef>
#include <string>

namespace asymcap::kernels {

// Probability-pair sweeps used by the successive cancellation recursion.
// Arrays are struct-of-arrays: (a0[i], a1[i]) is the unnormalized pair of the
// first operand, (b0[i], b1[i]) of the second. Every variant floors each
// component at mass_floor and renormalizes the pair to sum 1, so a pair can
// encode certainty without ever producing 0/0.
//
// check_combine:  c0 = a0*b0 + a1*b1,  c1 = a0*b1 + a1*b0
// bit_combine:    d=0: c0 = a0*b0, c1 = a1*b1;  d=1: c0 = a1*b0, c1 = a0*b1
// xor_bytes:      dst = a ^ b over byte arrays (GF(2) partial sums)
//
// All backends must agree bit-for-bit; the unit tests enforce it.

inline constexpr double mass_floor = 1e-300;

struct Ops {
    void (*check_combine)(const double* a0, const double* a1,
                          const double* b0, const double* b1,
                          double* c0, double* c1, std::size_t n);
    void (*bit_combine)(const double* a0, const double* a1,
                        const double* b0, const double* b1,
                        const unsigned char* dec,
                        double* c0, double* c1, std::size_t n);
    void (*xor_bytes)(unsigned char* dst, const unsigned char* a,
                      const unsigned char* b, std::size_t n);
    const char* name;
};

const Ops& scalar_ops();
const Ops* avx2_ops();   // nullptr when not compiled in or not supported
const Ops& active_ops();

bool cpu_has_avx2();

// "auto", "scalar" or "avx2"; throws on an unavailable backend.
void select_backend(const std::string& name);
std::string active_backend();

}  // namespace asymcap::kernels
