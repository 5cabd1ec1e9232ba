#include "sweetspot/kernels.hpp"

#if defined(SWEETSPOT_HAVE_AVX2)

#include <immintrin.h>

#include <cstdint>
#include <limits>

namespace sweetspot::kernels {

// Four positions per iteration. Each lane tracks the first maximum of its
// own position subsequence (strict-greater updates only); the horizontal
// reduction then takes the smallest position among lanes tied at the
// maximum, which is exactly the scalar first-maximum.
PassResult scan_pass_avx2(const double* cum, size_t count, size_t len, double shift) {
  if (count < 8) return scan_pass_scalar(cum, count, len, shift);

  const __m256d vshift = _mm256_set1_pd(shift);
  __m256d best_z = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  __m256i best_i = _mm256_setzero_si256();
  __m256i idx = _mm256_setr_epi64x(0, 1, 2, 3);
  const __m256i step = _mm256_set1_epi64x(4);

  size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d hi = _mm256_loadu_pd(cum + i + len);
    const __m256d lo = _mm256_loadu_pd(cum + i);
    const __m256d z = _mm256_sub_pd(_mm256_sub_pd(hi, lo), vshift);
    const __m256d gt = _mm256_cmp_pd(z, best_z, _CMP_GT_OQ);
    best_z = _mm256_blendv_pd(best_z, z, gt);
    best_i = _mm256_castpd_si256(
        _mm256_blendv_pd(_mm256_castsi256_pd(best_i), _mm256_castsi256_pd(idx), gt));
    idx = _mm256_add_epi64(idx, step);
  }

  alignas(32) double lane_z[4];
  alignas(32) uint64_t lane_i[4];
  _mm256_storeu_pd(lane_z, best_z);
  _mm256_storeu_si256(reinterpret_cast<__m256i*>(lane_i), best_i);

  size_t out_i = static_cast<size_t>(lane_i[0]);
  double out_z = lane_z[0];
  for (int l = 1; l < 4; ++l) {
    if (lane_z[l] > out_z || (lane_z[l] == out_z && lane_i[l] < out_i)) {
      out_z = lane_z[l];
      out_i = static_cast<size_t>(lane_i[l]);
    }
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

#endif  // SWEETSPOT_HAVE_AVX2
