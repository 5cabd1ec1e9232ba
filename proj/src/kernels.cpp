#include "sweetspot/kernels.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace sweetspot::kernels {

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "unknown";
}

bool backend_available(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(SWEETSPOT_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Backend::neon:
#if defined(SWEETSPOT_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

namespace {

Backend detect_backend() {
  if (const char* env = std::getenv("SWEETSPOT_BACKEND")) {
    Backend requested = Backend::scalar;
    bool known = true;
    if (std::strcmp(env, "scalar") == 0) {
      requested = Backend::scalar;
    } else if (std::strcmp(env, "avx2") == 0) {
      requested = Backend::avx2;
    } else if (std::strcmp(env, "neon") == 0) {
      requested = Backend::neon;
    } else {
      known = false;
    }
    if (known && backend_available(requested)) return requested;
    std::fprintf(stderr, "sweetspot: SWEETSPOT_BACKEND=%s is %s; auto-detecting\n", env,
                 known ? "not available on this machine" : "not a known backend");
  }
  if (backend_available(Backend::avx2)) return Backend::avx2;
  if (backend_available(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

std::atomic<Backend>& backend_state() {
  static std::atomic<Backend> state{detect_backend()};
  return state;
}

}  // namespace

Backend active_backend() { return backend_state().load(std::memory_order_relaxed); }

bool set_backend(Backend b) {
  if (!backend_available(b)) return false;
  backend_state().store(b, std::memory_order_relaxed);
  return true;
}

PassResult scan_pass(const double* cum, size_t count, size_t len, double shift) {
  switch (active_backend()) {
#if defined(SWEETSPOT_HAVE_AVX2)
    case Backend::avx2:
      return scan_pass_avx2(cum, count, len, shift);
#endif
#if defined(SWEETSPOT_HAVE_NEON)
    case Backend::neon:
      return scan_pass_neon(cum, count, len, shift);
#endif
    default:
      return scan_pass_scalar(cum, count, len, shift);
  }
}

}  // namespace sweetspot::kernels
