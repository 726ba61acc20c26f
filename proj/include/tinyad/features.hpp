#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tinyad/tensor.hpp"

namespace tinyad {

// Denominators below this magnitude yield a 0 feature and set `guarded`.
inline constexpr double kGuardEpsilon = 1e-12;

struct TimeFeatures {
  double min = 0, mean = 0, rms = 0, var = 0, std = 0, peak = 0, p2p = 0;
  double crest = 0, skew = 0, kurt = 0, form = 0, pulse = 0;
  bool guarded = false;

  static constexpr std::size_t kCount = 12;
  std::array<double, kCount> values() const {
    return {min, mean, rms, var, std, peak, p2p, crest, skew, kurt, form, pulse};
  }
  static const std::array<const char*, kCount>& names();
};

// Throws WindowError when z has fewer than 2 samples. Variance uses n-1.
TimeFeatures time_features(std::span<const double> z);

// One-sided periodogram on the zero-padded length: s[i] = |X_i|^2 / n_padded
// and f[i] = i / n_padded (cycles per sample), i = 0..n_padded/2.
struct Spectrum {
  std::vector<double> f;
  std::vector<double> s;
  std::size_t n_original = 0;
  std::size_t n_padded = 0;
};

Spectrum psd(std::span<const double> z);

struct FreqFeatures {
  double sp = 0, mpf = 0, sskew = 0, skurt = 0;
  bool guarded = false;

  static constexpr std::size_t kCount = 4;
  std::array<double, kCount> values() const { return {sp, mpf, sskew, skurt}; }
  static const std::array<const char*, kCount>& names();
};

enum class MpfVariant {
  Scaled,      // (1/k) Σ f·S / ΣS over the k retained bins
  Normalized,  // Σ f·S / ΣS
};

// The spectral mean and deviation used by sskew/skurt are taken under the
// normalized spectrum S/ΣS; the moment sums themselves weight by raw S.
// Throws SilentWindowError when ΣS = 0.
FreqFeatures freq_features(const Spectrum& spec, MpfVariant mpf = MpfVariant::Scaled);

enum class Wavelet { Db1, Db2 };
const char* wavelet_name(Wavelet w);
// Low-pass analysis filter; the high-pass is g[j] = (-1)^j h[L-1-j].
std::vector<double> lowpass_filter(Wavelet w);

struct DwtLevels {
  std::vector<std::vector<double>> details;  // level 1 first
  std::vector<double> approx;                // coarsest approximation
};

// Periodized Mallat cascade. An odd-length level is extended by repeating
// its last sample. Throws WindowError when z.size() < 2^levels.
DwtLevels dwt(std::span<const double> z, Wavelet w, std::size_t levels);

struct WaveletFeatures {
  std::vector<double> energy;  // Σ detail² / N per level, level 1 first
  double approx_energy = 0;    // Σ approx² / N at the coarsest level
};

WaveletFeatures dwt_energy(std::span<const double> z, Wavelet w, std::size_t levels = 3);

struct Domains {
  bool time = true;
  bool freq = true;
  bool wavelet = true;

  std::size_t feature_count() const {
    return (time ? TimeFeatures::kCount : 0) + (freq ? FreqFeatures::kCount : 0) +
           (wavelet ? 6 : 0);
  }
  // Parses a comma-separated list of "time", "freq", "wavelet" or "tri".
  static Domains parse(const std::string& list);
};

// Rows: [time 12 | freq 4 | db1 L1..L3 | db2 L1..L3] restricted to the
// selected domains. Columns: sub-windows, oldest first.
struct FeatureMatrix {
  Tensor data;  // shape [1, features, columns]
  std::size_t window = 0;
  std::size_t subwindow = 0;
  std::size_t stride = 0;
  std::size_t padded_length = 0;  // transform length used for the spectra
  std::vector<std::string> names;
  std::vector<bool> guarded;  // per column: some feature hit a guard

  std::size_t rows() const { return data.shape().extent(0); }
  std::size_t columns() const { return data.shape().extent(1); }
};

std::size_t feature_columns(std::size_t window, std::size_t subwindow, std::size_t stride);

// `series` must hold exactly `window` samples. Throws WindowError unless
// window >= subwindow >= 8 and stride >= 1.
FeatureMatrix build_feature_matrix(std::span<const double> series, std::size_t window,
                                   std::size_t subwindow, std::size_t stride,
                                   Domains domains = {},
                                   MpfVariant mpf = MpfVariant::Scaled);

}  // namespace tinyad
