#include "qualit/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

#include <bit>

namespace qualit::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double res = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) res += a[i] * b[i];
    return res;
}

double squared_l2_neon(const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    for (; i + 4 <= n; i += 4) {
        float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
        acc0 = vfmaq_f64(acc0, d0, d0);
        acc1 = vfmaq_f64(acc1, d1, d1);
    }
    double res = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        res += d * d;
    }
    return res;
}

void accumulate_neon(double* acc, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), vld1q_f64(x + i)));
    for (; i < n; ++i) acc[i] += x[i];
}

std::uint64_t and_popcount_neon(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
    std::size_t i = 0;
    uint64x2_t total = vdupq_n_u64(0);
    for (; i + 2 <= n; i += 2) {
        const uint8x16_t v = vreinterpretq_u8_u64(vandq_u64(vld1q_u64(a + i), vld1q_u64(b + i)));
        total = vaddq_u64(total, vpaddlq_u32(vpaddlq_u16(vpaddlq_u8(vcntq_u8(v)))));
    }
    std::uint64_t res = vgetq_lane_u64(total, 0) + vgetq_lane_u64(total, 1);
    for (; i < n; ++i) res += std::popcount(a[i] & b[i]);
    return res;
}

const KernelSet neon{Isa::neon, dot_neon, squared_l2_neon, accumulate_neon, and_popcount_neon};

}  // namespace

namespace detail {
const KernelSet* neon_set() { return &neon; }
}  // namespace detail

}  // namespace qualit::kernels

#else

namespace qualit::kernels::detail {
const KernelSet* neon_set() { return nullptr; }
}  // namespace qualit::kernels::detail

#endif
