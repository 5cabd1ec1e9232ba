#include "sweetspot/kernels.hpp"

#if defined(SWEETSPOT_HAVE_NEON)

#include <arm_neon.h>

#include <cstdint>
#include <limits>

namespace sweetspot::kernels {

// Two positions per iteration; same strict-greater lane semantics as the
// AVX2 kernel, so the reduced result is bit-exact with the scalar pass.
PassResult scan_pass_neon(const double* cum, size_t count, size_t len, double shift) {
  if (count < 4) return scan_pass_scalar(cum, count, len, shift);

  const float64x2_t vshift = vdupq_n_f64(shift);
  float64x2_t best_z = vdupq_n_f64(-std::numeric_limits<double>::infinity());
  uint64x2_t best_i = vdupq_n_u64(0);
  uint64x2_t idx = {0, 1};
  const uint64x2_t step = vdupq_n_u64(2);

  size_t i = 0;
  for (; i + 2 <= count; i += 2) {
    const float64x2_t hi = vld1q_f64(cum + i + len);
    const float64x2_t lo = vld1q_f64(cum + i);
    const float64x2_t z = vsubq_f64(vsubq_f64(hi, lo), vshift);
    const uint64x2_t gt = vcgtq_f64(z, best_z);
    best_z = vbslq_f64(gt, z, best_z);
    best_i = vbslq_u64(gt, idx, best_i);
    idx = vaddq_u64(idx, step);
  }

  double lane_z[2];
  uint64_t lane_i[2];
  vst1q_f64(lane_z, best_z);
  vst1q_u64(lane_i, best_i);

  size_t out_i = static_cast<size_t>(lane_i[0]);
  double out_z = lane_z[0];
  if (lane_z[1] > out_z || (lane_z[1] == out_z && lane_i[1] < out_i)) {
    out_z = lane_z[1];
    out_i = static_cast<size_t>(lane_i[1]);
  }
  for (; i < count; ++i) {
    const double z = cum[i + len] - cum[i] - shift;
    if (z > out_z) {
      out_z = z;
      out_i = i;
    }
  }
  return {out_i, out_z};
}

}  // namespace sweetspot::kernels

#endif  // SWEETSPOT_HAVE_NEON
