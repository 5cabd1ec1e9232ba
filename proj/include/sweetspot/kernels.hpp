#pragma once

#include <cstddef>

namespace sweetspot::kernels {

// One interval-length pass of the cumulative-sum scan. For positions
// i in [0, count), the interval statistic is
//   z[i] = cum[i + len] - cum[i] - shift
// and the pass returns the first position attaining the maximum. All
// backends perform the identical IEEE operations (two subtractions per
// position, no fused or reassociated arithmetic), so results are bit-exact
// across backends.
struct PassResult {
  size_t index;
  double z;
};

enum class Backend { scalar, avx2, neon };

const char* backend_name(Backend b);
bool backend_available(Backend b);

// Active backend: chosen at first use from CPU capabilities, overridable via
// the SWEETSPOT_BACKEND environment variable (scalar | avx2 | neon) or
// set_backend(). An unavailable choice is rejected.
Backend active_backend();
bool set_backend(Backend b);

PassResult scan_pass(const double* cum, size_t count, size_t len, double shift);

// Reference implementation, always available (used by equivalence tests).
PassResult scan_pass_scalar(const double* cum, size_t count, size_t len, double shift);

#if defined(SWEETSPOT_HAVE_AVX2)
PassResult scan_pass_avx2(const double* cum, size_t count, size_t len, double shift);
#endif
#if defined(SWEETSPOT_HAVE_NEON)
PassResult scan_pass_neon(const double* cum, size_t count, size_t len, double shift);
#endif

}  // namespace sweetspot::kernels
