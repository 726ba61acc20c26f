#include "tinyad/tensor_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tinyad/errors.hpp"

namespace tinyad {

namespace {

using fjson = nlohmann::basic_json<std::map, std::vector, std::string, bool,
                                   std::int64_t, std::uint64_t, float>;

}  // namespace

std::string tensor_to_json(const Tensor& t) {
  fjson shape = fjson::array();
  shape.push_back(t.shape().channels());
  for (auto e : t.shape().spatial()) shape.push_back(e);
  fjson data = fjson::array();
  for (float v : t.data()) data.push_back(v);
  fjson out = fjson::object();
  out["shape"] = std::move(shape);
  out["data"] = std::move(data);
  return out.dump();
}

Tensor tensor_from_json(std::string_view text) {
  fjson j;
  try {
    j = fjson::parse(text);
  } catch (const fjson::parse_error& e) {
    throw ParseError(std::string("tensor file: ") + e.what(), 0, "");
  }
  if (!j.is_object() || !j.contains("shape") || !j.contains("data"))
    throw ParseError("tensor file needs \"shape\" and \"data\"", 0, "");
  const auto& s = j["shape"];
  if (!s.is_array() || s.size() < 2 || s.size() > 3)
    throw ParseError("tensor shape must be [C, L] or [C, H, W]", 0, "shape");
  std::vector<std::size_t> dims;
  for (const auto& d : s) {
    if (!d.is_number_integer() || d.get<std::int64_t>() <= 0)
      throw ParseError("tensor shape entries must be positive integers", 0, "shape");
    dims.push_back(static_cast<std::size_t>(d.get<std::int64_t>()));
  }
  const Shape shape(dims[0], std::vector<std::size_t>(dims.begin() + 1, dims.end()));
  const auto& d = j["data"];
  if (!d.is_array() || d.size() != shape.element_count())
    throw ParseError("tensor data must hold " + std::to_string(shape.element_count()) +
                         " numbers",
                     0, "data");
  std::vector<float> values;
  values.reserve(d.size());
  for (const auto& v : d) {
    if (!v.is_number()) throw ParseError("tensor data must be numeric", 0, "data");
    values.push_back(v.get<float>());
  }
  return Tensor(shape, std::move(values));
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open tensor file " + path.string(), 0, "");
  std::stringstream ss;
  ss << in.rdbuf();
  return tensor_from_json(ss.str());
}

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << tensor_to_json(t) << '\n';
}

}  // namespace tinyad
