#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

// Data-parallel inner loops used by clustering, coherence scoring and
// co-occurrence counting. Every kernel has a scalar reference and optional
// SIMD variants; the active set is chosen once at startup from CPUID (or the
// QUALIT_SIMD environment variable: "scalar", "avx2", "neon").
namespace qualit::kernels {

enum class Isa { scalar, avx2, neon };

struct KernelSet {
    Isa isa;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*squared_l2)(const double* a, const double* b, std::size_t n);
    // acc[i] += x[i]
    void (*accumulate)(double* acc, const double* x, std::size_t n);
    // popcount(a[i] & b[i]) summed over the words
    std::uint64_t (*and_popcount)(const std::uint64_t* a, const std::uint64_t* b, std::size_t n);
};

std::string_view isa_name(Isa isa);

// Kernel table for a specific ISA. Throws std::invalid_argument when the ISA
// was not compiled in or the running CPU lacks it.
const KernelSet& kernels_for(Isa isa);

// ISAs usable on this machine, scalar first.
std::vector<Isa> available_isas();

const KernelSet& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline double squared_l2(std::span<const double> a, std::span<const double> b) {
    return active().squared_l2(a.data(), b.data(), a.size());
}

inline void accumulate(std::span<double> acc, std::span<const double> x) {
    active().accumulate(acc.data(), x.data(), acc.size());
}

inline std::uint64_t and_popcount(std::span<const std::uint64_t> a,
                                  std::span<const std::uint64_t> b) {
    return active().and_popcount(a.data(), b.data(), a.size());
}

namespace detail {
extern const KernelSet scalar_set;
const KernelSet* avx2_set();  // nullptr when not compiled for x86-64
const KernelSet* neon_set();  // nullptr when not compiled for aarch64
}  // namespace detail

}  // namespace qualit::kernels
