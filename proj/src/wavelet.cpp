#include <cmath>

#include "tinyad/errors.hpp"
#include "tinyad/features.hpp"

namespace tinyad {

const char* wavelet_name(Wavelet w) { return w == Wavelet::Db1 ? "db1" : "db2"; }

std::vector<double> lowpass_filter(Wavelet w) {
  if (w == Wavelet::Db1) {
    const double r = 1.0 / std::sqrt(2.0);
    return {r, r};
  }
  const double s3 = std::sqrt(3.0);
  const double d = 4.0 * std::sqrt(2.0);
  return {(1 + s3) / d, (3 + s3) / d, (3 - s3) / d, (1 - s3) / d};
}

DwtLevels dwt(std::span<const double> z, Wavelet w, std::size_t levels) {
  if (levels == 0 || levels > 30 || z.size() < (std::size_t{1} << levels))
    throw WindowError("window of " + std::to_string(z.size()) + " samples is too short for " +
                      std::to_string(levels) + " wavelet levels");
  const auto h = lowpass_filter(w);
  const std::size_t taps = h.size();
  std::vector<double> g(taps);
  for (std::size_t j = 0; j < taps; ++j)
    g[j] = (j % 2 ? -1.0 : 1.0) * h[taps - 1 - j];

  DwtLevels out;
  std::vector<double> x(z.begin(), z.end());
  for (std::size_t lvl = 0; lvl < levels; ++lvl) {
    if (x.size() % 2) x.push_back(x.back());
    const std::size_t n = x.size();
    std::vector<double> a(n / 2), d(n / 2);
    for (std::size_t i = 0; i < n / 2; ++i) {
      double sa = 0, sd = 0;
      for (std::size_t j = 0; j < taps; ++j) {
        const double v = x[(2 * i + j) % n];
        sa += h[j] * v;
        sd += g[j] * v;
      }
      a[i] = sa;
      d[i] = sd;
    }
    out.details.push_back(std::move(d));
    x = std::move(a);
  }
  out.approx = std::move(x);
  return out;
}

WaveletFeatures dwt_energy(std::span<const double> z, Wavelet w, std::size_t levels) {
  const auto lv = dwt(z, w, levels);
  const double n = static_cast<double>(z.size());
  auto energy = [n](const std::vector<double>& v) {
    double e = 0;
    for (double c : v) e += c * c;
    return e / n;
  };
  WaveletFeatures f;
  for (const auto& d : lv.details) f.energy.push_back(energy(d));
  f.approx_energy = energy(lv.approx);
  return f;
}

}  // namespace tinyad
