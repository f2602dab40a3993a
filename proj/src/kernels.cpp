#include "pairelim/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define PAIRELIM_X86 1
#endif
#if defined(__aarch64__)
#include <arm_neon.h>
#define PAIRELIM_NEON 1
#endif

namespace pairelim::simd {

namespace {

void masked_add_scalar(double* dst, double s, const double* mask, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) dst[j] += s * mask[j];
}

void masked_sqdiff_add_scalar(double* dst, double x, const double* f, const double* mask,
                              std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        const double diff = x - f[j];
        dst[j] += (diff * diff) * mask[j];
    }
}

void squared_residuals_scalar(double* out, double y, const double* f, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        const double diff = y - f[j];
        out[j] = diff * diff;
    }
}

#ifdef PAIRELIM_X86

// Multiply and add stay separate instructions (no FMA contraction) so each
// lane performs exactly the scalar operation sequence.

__attribute__((target("avx2"))) void masked_add_avx2(double* dst, double s, const double* mask,
                                                     std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d m = _mm256_loadu_pd(mask + j);
        const __m256d d = _mm256_loadu_pd(dst + j);
        _mm256_storeu_pd(dst + j, _mm256_add_pd(d, _mm256_mul_pd(vs, m)));
    }
    for (; j < n; ++j) dst[j] += s * mask[j];
}

__attribute__((target("avx2"))) void masked_sqdiff_add_avx2(double* dst, double x, const double* f,
                                                            const double* mask, std::size_t n) {
    const __m256d vx = _mm256_set1_pd(x);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d diff = _mm256_sub_pd(vx, _mm256_loadu_pd(f + j));
        const __m256d sq = _mm256_mul_pd(diff, diff);
        const __m256d m = _mm256_loadu_pd(mask + j);
        const __m256d d = _mm256_loadu_pd(dst + j);
        _mm256_storeu_pd(dst + j, _mm256_add_pd(d, _mm256_mul_pd(sq, m)));
    }
    for (; j < n; ++j) {
        const double diff = x - f[j];
        dst[j] += (diff * diff) * mask[j];
    }
}

__attribute__((target("avx2"))) void squared_residuals_avx2(double* out, double y, const double* f,
                                                            std::size_t n) {
    const __m256d vy = _mm256_set1_pd(y);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d diff = _mm256_sub_pd(vy, _mm256_loadu_pd(f + j));
        _mm256_storeu_pd(out + j, _mm256_mul_pd(diff, diff));
    }
    for (; j < n; ++j) {
        const double diff = y - f[j];
        out[j] = diff * diff;
    }
}

#endif  // PAIRELIM_X86

#ifdef PAIRELIM_NEON

void masked_add_neon(double* dst, double s, const double* mask, std::size_t n) {
    const float64x2_t vs = vdupq_n_f64(s);
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const float64x2_t m = vld1q_f64(mask + j);
        const float64x2_t d = vld1q_f64(dst + j);
        vst1q_f64(dst + j, vaddq_f64(d, vmulq_f64(vs, m)));
    }
    for (; j < n; ++j) dst[j] += s * mask[j];
}

void masked_sqdiff_add_neon(double* dst, double x, const double* f, const double* mask,
                            std::size_t n) {
    const float64x2_t vx = vdupq_n_f64(x);
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const float64x2_t diff = vsubq_f64(vx, vld1q_f64(f + j));
        const float64x2_t sq = vmulq_f64(diff, diff);
        const float64x2_t m = vld1q_f64(mask + j);
        const float64x2_t d = vld1q_f64(dst + j);
        vst1q_f64(dst + j, vaddq_f64(d, vmulq_f64(sq, m)));
    }
    for (; j < n; ++j) {
        const double diff = x - f[j];
        dst[j] += (diff * diff) * mask[j];
    }
}

void squared_residuals_neon(double* out, double y, const double* f, std::size_t n) {
    const float64x2_t vy = vdupq_n_f64(y);
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const float64x2_t diff = vsubq_f64(vy, vld1q_f64(f + j));
        vst1q_f64(out + j, vmulq_f64(diff, diff));
    }
    for (; j < n; ++j) {
        const double diff = y - f[j];
        out[j] = diff * diff;
    }
}

#endif  // PAIRELIM_NEON

const Kernels kScalar{masked_add_scalar, masked_sqdiff_add_scalar, squared_residuals_scalar,
                      "scalar"};

#ifdef PAIRELIM_X86
const Kernels kAvx2{masked_add_avx2, masked_sqdiff_add_avx2, squared_residuals_avx2, "avx2"};
#endif
#ifdef PAIRELIM_NEON
const Kernels kNeon{masked_add_neon, masked_sqdiff_add_neon, squared_residuals_neon, "neon"};
#endif

const Kernels& pick_active() {
#ifdef PAIRELIM_X86
    if (__builtin_cpu_supports("avx2")) return kAvx2;
#endif
#ifdef PAIRELIM_NEON
    return kNeon;
#endif
    return kScalar;
}

}  // namespace

const Kernels& scalar_kernels() { return kScalar; }

const Kernels* avx2_kernels() {
#ifdef PAIRELIM_X86
    if (__builtin_cpu_supports("avx2")) return &kAvx2;
#endif
    return nullptr;
}

const Kernels* neon_kernels() {
#ifdef PAIRELIM_NEON
    return &kNeon;
#else
    return nullptr;
#endif
}

const Kernels& active() {
    static const Kernels& chosen = pick_active();
    return chosen;
}

}  // namespace pairelim::simd
