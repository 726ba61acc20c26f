#include <algorithm>
#include <cmath>

#include "tinyad/errors.hpp"
#include "tinyad/features.hpp"

namespace tinyad {

const std::array<const char*, TimeFeatures::kCount>& TimeFeatures::names() {
  static const std::array<const char*, kCount> n{
      "min", "mean", "rms", "var", "std", "peak",
      "p2p", "crest", "skew", "kurt", "form", "pulse"};
  return n;
}

TimeFeatures time_features(std::span<const double> z) {
  const std::size_t n = z.size();
  if (n < 2) throw WindowError("time features need at least 2 samples, got " + std::to_string(n));
  TimeFeatures t;
  const auto [lo, hi] = std::minmax_element(z.begin(), z.end());
  t.min = *lo;
  t.p2p = *hi - *lo;
  double sum = 0, sq = 0;
  for (double v : z) {
    sum += v;
    sq += v * v;
    t.peak = std::max(t.peak, std::abs(v));
  }
  t.mean = sum / static_cast<double>(n);
  t.rms = std::sqrt(sq / static_cast<double>(n));
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : z) {
    const double d = v - t.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  t.var = m2 / static_cast<double>(n - 1);
  t.std = std::sqrt(t.var);

  auto ratio = [&](double num, double den) {
    if (std::abs(den) < kGuardEpsilon) {
      t.guarded = true;
      return 0.0;
    }
    return num / den;
  };
  t.crest = ratio(t.peak, t.rms);
  t.skew = ratio(m3 / static_cast<double>(n), t.std * t.std * t.std);
  t.kurt = ratio(m4 / static_cast<double>(n), t.var * t.var);
  t.form = ratio(t.rms, t.mean);
  t.pulse = ratio(t.peak, t.mean);
  return t;
}

}  // namespace tinyad
