#include "asymcap/kernels.hpp"

namespace asymcap::kernels {

namespace {

void check_combine_scalar(const double* a0, const double* a1,
                          const double* b0, const double* b1,
                          double* c0, double* c1, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double t0 = a0[i] * b0[i] + a1[i] * b1[i];
        double t1 = a0[i] * b1[i] + a1[i] * b0[i];
        t0 = t0 > mass_floor ? t0 : mass_floor;
        t1 = t1 > mass_floor ? t1 : mass_floor;
        const double inv = 1.0 / (t0 + t1);
        c0[i] = t0 * inv;
        c1[i] = t1 * inv;
    }
}

void bit_combine_scalar(const double* a0, const double* a1,
                        const double* b0, const double* b1,
                        const unsigned char* dec,
                        double* c0, double* c1, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double sel0 = dec[i] ? a1[i] : a0[i];
        const double sel1 = dec[i] ? a0[i] : a1[i];
        double t0 = sel0 * b0[i];
        double t1 = sel1 * b1[i];
        t0 = t0 > mass_floor ? t0 : mass_floor;
        t1 = t1 > mass_floor ? t1 : mass_floor;
        const double inv = 1.0 / (t0 + t1);
        c0[i] = t0 * inv;
        c1[i] = t1 * inv;
    }
}

void xor_bytes_scalar(unsigned char* dst, const unsigned char* a,
                      const unsigned char* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] ^ b[i];
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{check_combine_scalar, bit_combine_scalar,
                         xor_bytes_scalar, "scalar"};
    return ops;
}

}  // namespace asymcap::kernels
