#include <atomic>

#include "ssm/errors.hpp"
#include "ssm/kernels/gaussian.hpp"

namespace ssm::kernels {

#if !defined(SSM_HAVE_AVX2_TU)
const Backend& avx2_backend() {
    throw Error("AVX2 kernel backend was not compiled into this build");
}
#endif

bool avx2_available() {
#if defined(SSM_HAVE_AVX2_TU)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

std::atomic<const Backend*> g_active{nullptr};

const Backend* detect() {
    if (avx2_available()) return &avx2_backend();
    return &scalar_backend();
}

}  // namespace

void select_backend(BackendKind kind) {
    switch (kind) {
        case BackendKind::auto_detect:
            g_active.store(detect());
            break;
        case BackendKind::scalar:
            g_active.store(&scalar_backend());
            break;
        case BackendKind::avx2:
            if (!avx2_available()) throw Error("AVX2 kernels unavailable on this machine");
            g_active.store(&avx2_backend());
            break;
    }
}

const Backend& active() {
    const Backend* backend = g_active.load(std::memory_order_relaxed);
    if (!backend) {
        backend = detect();
        g_active.store(backend);
    }
    return *backend;
}

}  // namespace ssm::kernels
