#include "sweetspot/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "sweetspot/error.hpp"

namespace sweetspot {

double sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double mean(std::span<const double> v) {
  if (v.empty()) throw ContractError("mean of empty range");
  return sum(v) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) throw ContractError("variance needs at least two values");
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ContractError("quantile of empty range");
  if (q < 0.0 || q > 1.0) throw ContractError("quantile level outside [0, 1]");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double ks_distance_uniform(std::vector<double> sample) {
  if (sample.empty()) throw ContractError("KS distance of empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (size_t i = 0; i < sample.size(); ++i) {
    const double x = sample[i];
    d = std::max(d, (static_cast<double>(i) + 1.0) / n - x);
    d = std::max(d, x - static_cast<double>(i) / n);
  }
  return d;
}

double ks_critical_value(size_t n, double alpha) {
  if (n == 0) throw ContractError("KS critical value needs n >= 1");
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

double inverse_logit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ContractError("logit argument outside (0, 1)");
  return std::log(p / (1.0 - p));
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ContractError("normal quantile argument outside (0, 1)");
  // Acklam's coefficients.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley step against erfc.
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

BinomialBand binomial_band(size_t n, double p, double conf) {
  if (n == 0 || !(p > 0.0 && p < 1.0) || !(conf > 0.0 && conf < 1.0)) {
    throw ContractError("binomial_band: bad arguments");
  }
  const double tail = (1.0 - conf) / 2.0;
  std::vector<double> pmf(n + 1);
  // Log-space PMF to stay finite for large n.
  std::vector<double> logfact(n + 1, 0.0);
  for (size_t i = 1; i <= n; ++i) logfact[i] = logfact[i - 1] + std::log(static_cast<double>(i));
  for (size_t k = 0; k <= n; ++k) {
    const double lp = logfact[n] - logfact[k] - logfact[n - k] +
                      static_cast<double>(k) * std::log(p) +
                      static_cast<double>(n - k) * std::log1p(-p);
    pmf[k] = std::exp(lp);
  }
  size_t lo = 0;
  double cum = 0.0;
  while (lo <= n && cum + pmf[lo] <= tail) cum += pmf[lo++];
  size_t hi = n;
  cum = 0.0;
  while (hi > 0 && cum + pmf[hi] <= tail) cum += pmf[hi--];
  return {lo, hi};
}

std::vector<double> moving_average(std::span<const double> v, size_t window) {
  if (window % 2 == 0 || window == 0) throw ContractError("moving average window must be odd");
  if (window > v.size()) throw ContractError("moving average window exceeds sequence length");
  std::vector<double> out(v.size());
  const size_t half = window / 2;
  for (size_t i = 0; i < v.size(); ++i) {
    const size_t lo = i >= half ? i - half : 0;
    const size_t hi = std::min(v.size() - 1, i + half);
    double s = 0.0;
    for (size_t k = lo; k <= hi; ++k) s += v[k];
    out[i] = s / static_cast<double>(hi - lo + 1);
  }
  return out;
}

uint64_t fnv1a64_bytes(std::span<const unsigned char> bytes) {
  uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

uint64_t file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for digest: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return fnv1a64_bytes(bytes);
}

std::string digest_hex(uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(digest));
  return std::string(buf);
}

}  // namespace sweetspot
