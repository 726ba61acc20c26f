#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "tinyad/tensor.hpp"

namespace tinyad {

// {"shape": [C, ...spatial], "data": [...]}, float32 values rendered as the
// shortest round-trip decimal.
std::string tensor_to_json(const Tensor& t);
Tensor tensor_from_json(std::string_view text);

Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const Tensor& t, const std::filesystem::path& path);

}  // namespace tinyad
