#include "asymcap/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace asymcap::kernels {

#if defined(ASYMCAP_HAVE_AVX2_BUILD)
const Ops* avx2_ops_impl();
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const Ops* avx2_ops() {
#if defined(ASYMCAP_HAVE_AVX2_BUILD)
    if (cpu_has_avx2()) return avx2_ops_impl();
#endif
    return nullptr;
}

namespace {
std::atomic<const Ops*> g_active{nullptr};

const Ops* pick_default() {
    if (const Ops* v = avx2_ops()) return v;
    return &scalar_ops();
}
}  // namespace

const Ops& active_ops() {
    const Ops* ops = g_active.load(std::memory_order_acquire);
    if (!ops) {
        ops = pick_default();
        g_active.store(ops, std::memory_order_release);
    }
    return *ops;
}

void select_backend(const std::string& name) {
    if (name == "auto") {
        g_active.store(pick_default(), std::memory_order_release);
    } else if (name == "scalar") {
        g_active.store(&scalar_ops(), std::memory_order_release);
    } else if (name == "avx2") {
        const Ops* v = avx2_ops();
        if (!v) throw std::runtime_error("avx2 backend not available on this machine");
        g_active.store(v, std::memory_order_release);
    } else {
        throw std::invalid_argument("unknown kernel backend: " + name);
    }
}

std::string active_backend() { return active_ops().name; }

}  // namespace asymcap::kernels
