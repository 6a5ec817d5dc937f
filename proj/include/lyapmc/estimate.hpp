// Estimate record and the order-independent accumulator behind it.
#pragma once

#include <charconv>
#include <cmath>
#include <string>

#include "lyapmc/common.hpp"

namespace lyapmc {

struct Estimate {
  double mean = 0;
  double std_error = 0;  // sample sd / sqrt(n); "stderr" in the CSV schema
  i64 n = 0;
  double truncated_fraction = 0;
  u64 config_fingerprint = 0;
  i64 excluded = 0;        // environments dropped for infinite a
  bool bias_warning = false;  // set when a log-transform sits on a noisy mean
};

// (count, sum, sum of squares, truncation count): a commutative monoid, so
// any fold order gives the same estimate. The runner still folds blocks in
// index order to keep floating-point results bit-identical across worker
// counts.
struct Accumulator {
  i64 n = 0;
  double sum = 0;
  double sum_sq = 0;
  i64 truncated = 0;

  void add(double w, bool was_truncated) {
    ++n;
    sum += w;
    sum_sq += w * w;
    if (was_truncated) ++truncated;
  }

  void merge(const Accumulator& o) {
    n += o.n;
    sum += o.sum;
    sum_sq += o.sum_sq;
    truncated += o.truncated;
  }

  double mean() const { return n > 0 ? sum / static_cast<double>(n) : 0.0; }

  double std_error() const {
    if (n < 2) return 0.0;
    const double m = mean();
    double var = (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
    if (var < 0) var = 0;  // rounding guard
    return std::sqrt(var / static_cast<double>(n));
  }

  double truncated_fraction() const {
    return n > 0 ? static_cast<double>(truncated) / static_cast<double>(n) : 0.0;
  }
};

// Running mean/variance over scalar values (per-environment statistics).
struct Welford {
  i64 n = 0;
  double mean = 0;
  double m2 = 0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  double std_error() const {
    if (n < 2) return 0.0;
    return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  }
};

// Canonical key=value transcript hashed into a config fingerprint. Estimates
// with equal fingerprints are byte-identical reproducible by contract.
class Fingerprint {
 public:
  Fingerprint& field(const char* key, double v) { return raw(key, format_double(v)); }
  Fingerprint& field(const char* key, i64 v) { return raw(key, std::to_string(v)); }
  Fingerprint& field(const char* key, u64 v) { return raw(key, std::to_string(v)); }
  Fingerprint& field(const char* key, const std::string& v) { return raw(key, v); }

  Fingerprint& raw(const char* key, const std::string& v) {
    text_ += key;
    text_ += '=';
    text_ += v;
    text_ += ';';
    return *this;
  }

  u64 value() const { return fnv1a64(text_); }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

}  // namespace lyapmc
