#include "sweetspot/kernels.hpp"

namespace sweetspot::kernels {

PassResult scan_pass_scalar(const double* cum, size_t count, size_t len, double shift) {
  size_t best_i = 0;
  double best_z = cum[len] - cum[0] - shift;
  for (size_t i = 1; i < count; ++i) {
    const double z = cum[i + len] - cum[i] - shift;
    if (z > best_z) {
      best_z = z;
      best_i = i;
    }
  }
  return {best_i, best_z};
}

}  // namespace sweetspot::kernels
