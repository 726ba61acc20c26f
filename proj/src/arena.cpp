#include <algorithm>
#include <cctype>

#include "tinyad/errors.hpp"
#include "tinyad/scheduler.hpp"

namespace tinyad {

ExecMode ExecMode::parse(std::string_view name, std::size_t m) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (n == "naive") return naive();
  if (n == "inplace" || n == "in-place") return inplace();
  if (n == "patch" || n == "patchonly" || n == "patch-only") return patch_only(m);
  if (n == "tinyad") return tinyad(m);
  throw Error("unknown mode '" + std::string(name) +
              "' (expected naive, inplace, patch, tinyad)");
}

std::string ExecMode::str() const {
  switch (kind) {
    case Kind::Naive: return "Naive";
    case Kind::InPlace: return "InPlace";
    case Kind::PatchOnly: return "PatchOnly{" + std::to_string(patches) + "}";
    case Kind::TinyAD: return "TinyAD{" + std::to_string(patches) + "}";
  }
  return "?";
}

bool inplace_pays_off(std::size_t n, std::size_t k, std::size_t s_in,
                      std::size_t s_out) {
  const std::size_t mx = std::max(s_in, k * s_out);
  return (n + 1) * mx < n * s_in + n * k * s_out;
}

std::string_view slot_name(Slot s) {
  switch (s) {
    case Slot::InputPatch: return "input_patch";
    case Slot::ExchangeA: return "exchange_a";
    case Slot::ExchangeB: return "exchange_b";
    case Slot::TempBuffer: return "temp_buffer";
    case Slot::Params: return "params";
    case Slot::Holding: return "holding";
  }
  return "?";
}

std::span<float> Arena::reserve(Slot s, std::size_t elements) {
  const auto i = static_cast<std::size_t>(s);
  storage_[i].resize(elements);
  live_ -= bytes_[i];
  bytes_[i] = elements * kBytesPerElement;
  live_ += bytes_[i];
  touch();
  return storage_[i];
}

void Arena::account(Slot s, std::size_t bytes) {
  const auto i = static_cast<std::size_t>(s);
  live_ -= bytes_[i];
  bytes_[i] = bytes;
  live_ += bytes;
  touch();
}

void Arena::release(Slot s) {
  const auto i = static_cast<std::size_t>(s);
  live_ -= bytes_[i];
  bytes_[i] = 0;
  storage_[i].clear();
}

std::span<float> Arena::data(Slot s) { return storage_[static_cast<std::size_t>(s)]; }

void Arena::set_layer(long layer) {
  layer_ = layer;
  if (layer >= 0 && layer_peaks_.size() <= static_cast<std::size_t>(layer))
    layer_peaks_.resize(static_cast<std::size_t>(layer) + 1, 0);
  touch();
}

void Arena::touch() {
  high_water_ = std::max(high_water_, live_);
  if (layer_ >= 0) {
    auto& p = layer_peaks_[static_cast<std::size_t>(layer_)];
    p = std::max(p, live_);
  }
  if (budget_ && live_ > *budget_ && !violation_)
    violation_ = BudgetViolation{layer_, live_};
}

void Arena::reset() {
  for (auto& v : storage_) v.clear();
  bytes_.fill(0);
  live_ = 0;
  high_water_ = 0;
  layer_ = -1;
  layer_peaks_.clear();
  violation_.reset();
}

}  // namespace tinyad
