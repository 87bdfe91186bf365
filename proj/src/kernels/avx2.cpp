#include "asymcap/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <cstring>

namespace asymcap::kernels {

namespace {

// Same operations and operation order as the scalar backend: mul, add, max,
// one division, two muls. Each step is correctly rounded, so the lanes match
// the scalar results bit-for-bit (FP contraction is disabled project-wide).

inline void normalize_store(__m256d t0, __m256d t1, double* c0, double* c1,
                            std::size_t i) {
    const __m256d floor = _mm256_set1_pd(mass_floor);
    t0 = _mm256_max_pd(t0, floor);
    t1 = _mm256_max_pd(t1, floor);
    const __m256d inv = _mm256_div_pd(_mm256_set1_pd(1.0), _mm256_add_pd(t0, t1));
    _mm256_storeu_pd(c0 + i, _mm256_mul_pd(t0, inv));
    _mm256_storeu_pd(c1 + i, _mm256_mul_pd(t1, inv));
}

void check_combine_avx2(const double* a0, const double* a1,
                        const double* b0, const double* b1,
                        double* c0, double* c1, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d va0 = _mm256_loadu_pd(a0 + i);
        const __m256d va1 = _mm256_loadu_pd(a1 + i);
        const __m256d vb0 = _mm256_loadu_pd(b0 + i);
        const __m256d vb1 = _mm256_loadu_pd(b1 + i);
        const __m256d t0 =
            _mm256_add_pd(_mm256_mul_pd(va0, vb0), _mm256_mul_pd(va1, vb1));
        const __m256d t1 =
            _mm256_add_pd(_mm256_mul_pd(va0, vb1), _mm256_mul_pd(va1, vb0));
        normalize_store(t0, t1, c0, c1, i);
    }
    if (i < n)
        scalar_ops().check_combine(a0 + i, a1 + i, b0 + i, b1 + i, c0 + i,
                                   c1 + i, n - i);
}

void bit_combine_avx2(const double* a0, const double* a1,
                      const double* b0, const double* b1,
                      const unsigned char* dec,
                      double* c0, double* c1, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        std::uint32_t packed;
        std::memcpy(&packed, dec + i, 4);
        const __m256i d64 =
            _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(static_cast<int>(packed)));
        const __m256d swap =
            _mm256_castsi256_pd(_mm256_cmpeq_epi64(d64, _mm256_set1_epi64x(1)));
        const __m256d va0 = _mm256_loadu_pd(a0 + i);
        const __m256d va1 = _mm256_loadu_pd(a1 + i);
        const __m256d sel0 = _mm256_blendv_pd(va0, va1, swap);
        const __m256d sel1 = _mm256_blendv_pd(va1, va0, swap);
        const __m256d t0 = _mm256_mul_pd(sel0, _mm256_loadu_pd(b0 + i));
        const __m256d t1 = _mm256_mul_pd(sel1, _mm256_loadu_pd(b1 + i));
        normalize_store(t0, t1, c0, c1, i);
    }
    if (i < n)
        scalar_ops().bit_combine(a0 + i, a1 + i, b0 + i, b1 + i, dec + i,
                                 c0 + i, c1 + i, n - i);
}

void xor_bytes_avx2(unsigned char* dst, const unsigned char* a,
                    const unsigned char* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i va =
            _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        const __m256i vb =
            _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i),
                            _mm256_xor_si256(va, vb));
    }
    for (; i < n; ++i) dst[i] = a[i] ^ b[i];
}

}  // namespace

const Ops* avx2_ops_impl() {
    static const Ops ops{check_combine_avx2, bit_combine_avx2, xor_bytes_avx2,
                         "avx2"};
    return &ops;
}

}  // namespace asymcap::kernels

#endif  // __AVX2__
