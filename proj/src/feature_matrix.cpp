#include <algorithm>
#include <bit>
#include <sstream>

#include "tinyad/errors.hpp"
#include "tinyad/features.hpp"

namespace tinyad {

Domains Domains::parse(const std::string& list) {
  Domains d{false, false, false};
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "time") d.time = true;
    else if (item == "freq") d.freq = true;
    else if (item == "wavelet") d.wavelet = true;
    else if (item == "tri") d = Domains{};
    else throw Error("unknown feature domain '" + item + "' (expected time, freq, wavelet, tri)");
  }
  if (d.feature_count() == 0) throw Error("no feature domain selected");
  return d;
}

std::size_t feature_columns(std::size_t window, std::size_t subwindow, std::size_t stride) {
  if (stride == 0) throw WindowError("stride must be at least 1");
  if (subwindow < 8) throw WindowError("subwindow must be at least 8 samples");
  if (window < subwindow)
    throw WindowError("window " + std::to_string(window) + " is shorter than subwindow " +
                      std::to_string(subwindow));
  return (window - subwindow) / stride + 1;
}

FeatureMatrix build_feature_matrix(std::span<const double> series, std::size_t window,
                                   std::size_t subwindow, std::size_t stride,
                                   Domains domains, MpfVariant mpf) {
  const std::size_t cols = feature_columns(window, subwindow, stride);
  if (series.size() != window)
    throw WindowError("expected " + std::to_string(window) + " samples, got " +
                      std::to_string(series.size()));
  FeatureMatrix fm;
  fm.window = window;
  fm.subwindow = subwindow;
  fm.stride = stride;
  fm.padded_length = std::bit_ceil(subwindow);
  if (domains.time)
    for (auto n : TimeFeatures::names()) fm.names.emplace_back(n);
  if (domains.freq)
    for (auto n : FreqFeatures::names()) fm.names.emplace_back(n);
  if (domains.wavelet)
    for (auto w : {Wavelet::Db1, Wavelet::Db2})
      for (int l = 1; l <= 3; ++l) fm.names.push_back(std::string(wavelet_name(w)) + "_L" + std::to_string(l));

  const std::size_t rows = fm.names.size();
  fm.data = Tensor(Shape(1, {rows, cols}));
  fm.guarded.assign(cols, false);
  std::vector<double> column;
  for (std::size_t c = 0; c < cols; ++c) {
    const auto sub = series.subspan(c * stride, subwindow);
    column.clear();
    bool guarded = false;
    if (domains.time) {
      const auto t = time_features(sub);
      guarded |= t.guarded;
      for (double v : t.values()) column.push_back(v);
    }
    if (domains.freq) {
      FreqFeatures f;
      try {
        f = freq_features(psd(sub), mpf);
      } catch (const SilentWindowError&) {
        f = FreqFeatures{};
        f.guarded = true;
      }
      guarded |= f.guarded;
      for (double v : f.values()) column.push_back(v);
    }
    if (domains.wavelet)
      for (auto w : {Wavelet::Db1, Wavelet::Db2})
        for (double e : dwt_energy(sub, w, 3).energy) column.push_back(e);
    for (std::size_t r = 0; r < rows; ++r)
      fm.data.at(0, r, c) = static_cast<float>(column[r]);
    fm.guarded[c] = guarded;
  }
  return fm;
}

}  // namespace tinyad
