#include "qualit/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace qualit::kernels {
namespace {

bool cpu_has(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            __builtin_cpu_init();
            return detail::avx2_set() != nullptr && __builtin_cpu_supports("avx2") &&
                   __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::neon:
            return detail::neon_set() != nullptr;
    }
    return false;
}

const KernelSet& select() {
    if (const char* forced = std::getenv("QUALIT_SIMD")) {
        const std::string name = forced;
        for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
            if (name == isa_name(isa) && cpu_has(isa)) return kernels_for(isa);
        }
    }
    for (Isa isa : {Isa::avx2, Isa::neon}) {
        if (cpu_has(isa)) return kernels_for(isa);
    }
    return detail::scalar_set;
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

const KernelSet& kernels_for(Isa isa) {
    if (!cpu_has(isa)) {
        throw std::invalid_argument("kernel set unavailable on this machine: " +
                                    std::string(isa_name(isa)));
    }
    switch (isa) {
        case Isa::avx2: return *detail::avx2_set();
        case Isa::neon: return *detail::neon_set();
        case Isa::scalar: break;
    }
    return detail::scalar_set;
}

std::vector<Isa> available_isas() {
    std::vector<Isa> out;
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
        if (cpu_has(isa)) out.push_back(isa);
    }
    return out;
}

const KernelSet& active() {
    static const KernelSet& chosen = select();
    return chosen;
}

}  // namespace qualit::kernels
