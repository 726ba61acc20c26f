#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <mutex>

#include "tinyad/errors.hpp"
#include "tinyad/features.hpp"

namespace tinyad {

const std::array<const char*, FreqFeatures::kCount>& FreqFeatures::names() {
  static const std::array<const char*, kCount> n{"sp", "mpf", "sskew", "skurt"};
  return n;
}

namespace {

// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// fftw_malloc storage: every buffer has the same alignment, so plans of one
// length are identical across calls and threads.
template <typename T>
struct FftwFree {
  void operator()(T* p) const { fftw_free(p); }
};

template <typename T>
class Buffer {
 public:
  explicit Buffer(std::size_t n) : p_(static_cast<T*>(fftw_malloc(sizeof(T) * n))) {
    if (!p_) throw std::bad_alloc();
  }
  T* get() const { return p_.get(); }

 private:
  std::unique_ptr<T, FftwFree<T>> p_;
};

}  // namespace

Spectrum psd(std::span<const double> z) {
  if (z.size() < 2) throw WindowError("psd needs at least 2 samples");
  Spectrum s;
  s.n_original = z.size();
  s.n_padded = std::bit_ceil(z.size());
  const std::size_t bins = s.n_padded / 2 + 1;
  Buffer<double> in(s.n_padded);
  Buffer<fftw_complex> out(bins);
  std::fill_n(in.get(), s.n_padded, 0.0);
  std::copy(z.begin(), z.end(), in.get());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(s.n_padded), in.get(), out.get(), FFTW_ESTIMATE);
  }
  if (!plan) throw Error("fftw could not plan a transform of length " + std::to_string(s.n_padded));
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  const double n = static_cast<double>(s.n_padded);
  for (std::size_t i = 0; i <= s.n_padded / 2; ++i) {
    s.f.push_back(static_cast<double>(i) / n);
    s.s.push_back((out.get()[i][0] * out.get()[i][0] + out.get()[i][1] * out.get()[i][1]) / n);
  }
  return s;
}

FreqFeatures freq_features(const Spectrum& spec, MpfVariant mpf) {
  const std::size_t k = spec.s.size();
  if (k == 0 || spec.f.size() != k) throw Error("spectrum is empty or inconsistent");
  double total = 0, first = 0;
  FreqFeatures r;
  for (std::size_t i = 0; i < k; ++i) {
    total += spec.s[i];
    first += spec.f[i] * spec.s[i];
    r.sp += spec.f[i] * spec.f[i] * spec.f[i] * spec.s[i];
  }
  if (total == 0.0) throw SilentWindowError("spectrum has zero total power");
  const double fbar = first / total;
  r.mpf = mpf == MpfVariant::Scaled ? fbar / static_cast<double>(k) : fbar;

  double var = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = spec.f[i] - fbar;
    var += d * d * spec.s[i] / total;
  }
  const double sigma = std::sqrt(var);
  if (sigma < kGuardEpsilon) {
    r.guarded = true;
    return r;
  }
  for (std::size_t i = 0; i < k; ++i) {
    const double u = (spec.f[i] - fbar) / sigma;
    r.sskew += u * u * u * spec.s[i];
    r.skurt += u * u * u * u * spec.s[i];
  }
  return r;
}

}  // namespace tinyad
