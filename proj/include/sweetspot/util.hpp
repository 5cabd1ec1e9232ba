#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sweetspot {

// Left-to-right sum; the fixed order keeps aggregate results reproducible.
double sum(std::span<const double> v);
double mean(std::span<const double> v);
double sample_variance(std::span<const double> v);

// Linear-interpolation quantile on a sorted sample (R type 7). q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

// Kolmogorov-Smirnov distance between a sample and Uniform[0, 1].
double ks_distance_uniform(std::vector<double> sample);

// Asymptotic one-sample KS critical value at the given significance level.
double ks_critical_value(size_t n, double alpha);

// Standard normal quantile (Acklam's rational approximation plus one
// Halley refinement; good to ~1e-15 over (0, 1)).
double normal_quantile(double p);

double inverse_logit(double x);
double logit(double p);

// Exact central binomial acceptance band: the narrowest [lo, hi] counts with
// P(X < lo) <= (1-conf)/2 and P(X > hi) <= (1-conf)/2 for X ~ Bin(n, p),
// so the band covers with probability at least conf.
struct BinomialBand {
  size_t lo;
  size_t hi;
};
BinomialBand binomial_band(size_t n, double p, double conf);

// Centered moving average with window shrinking near the edges.
// window must be odd and >= 1; window == 1 returns the input unchanged.
std::vector<double> moving_average(std::span<const double> v, size_t window);

// FNV-1a over raw bytes; used for provenance digests of inputs and outputs.
uint64_t fnv1a64_bytes(std::span<const unsigned char> bytes);
uint64_t file_digest(const std::string& path);
std::string digest_hex(uint64_t digest);

}  // namespace sweetspot
