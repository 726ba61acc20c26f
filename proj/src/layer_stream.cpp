#include "tinyad/layer_stream.hpp"

#include <map>

#include "json.hpp"
#include "tinyad/errors.hpp"

namespace tinyad {

void ResidencyTracker::load(std::size_t bytes) {
  resident_ += bytes;
  peak_ = std::max(peak_, resident_);
  emit();
}

void ResidencyTracker::release() {
  resident_ = 0;
  emit();
}

void ResidencyTracker::emit() {
  trace_.push_back(resident_);
  if (hook_) hook_(resident_);
}

const StreamedLayer* LayerStream::next() {
  release();
  if (cursor_ >= topology().layers.size()) return nullptr;
  current_.emplace(load(cursor_));
  ++cursor_;
  residency_.load(current_->param_bytes);
  return &*current_;
}

void LayerStream::release() {
  if (current_) {
    current_.reset();
    residency_.release();
  }
}

void LayerStream::rewind() {
  release();
  cursor_ = 0;
}

namespace {

// Minimal forward scanner over the model file used to find layer boundaries
// without materializing their contents.
class Scanner {
 public:
  explicit Scanner(std::istream& in) : in_(in) {}

  std::size_t pos() const { return pos_; }
  std::size_t line() const { return line_; }

  int peek() { return in_.peek(); }
  int get() {
    int c = in_.get();
    if (c == std::char_traits<char>::eof()) fail("unexpected end of file");
    ++pos_;
    if (c == '\n') ++line_;
    return c;
  }
  void skip_ws() {
    while (true) {
      int c = in_.peek();
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') get();
      else break;
    }
  }
  void expect(char ch) {
    skip_ws();
    int c = get();
    if (c != ch) fail(std::string("expected '") + ch + "'");
  }
  std::string read_string() {
    skip_ws();
    if (get() != '"') fail("expected a string key");
    std::string s;
    while (true) {
      int c = get();
      if (c == '\\') {
        s.push_back(char(c));
        c = get();
      } else if (c == '"') {
        break;
      }
      s.push_back(char(c));
    }
    return s;
  }
  // Skips one JSON value; appends its text to `capture` when non-null.
  void skip_value(std::string* capture) {
    skip_ws();
    auto put = [&](int c) {
      if (capture) capture->push_back(char(c));
    };
    int c = peek();
    if (c == '{' || c == '[') {
      int depth = 0;
      bool in_str = false, esc = false;
      do {
        c = get();
        put(c);
        if (in_str) {
          if (esc) esc = false;
          else if (c == '\\') esc = true;
          else if (c == '"') in_str = false;
        } else if (c == '"') {
          in_str = true;
        } else if (c == '{' || c == '[') {
          ++depth;
        } else if (c == '}' || c == ']') {
          --depth;
        }
      } while (depth > 0);
    } else if (c == '"') {
      put(get());
      bool esc = false;
      while (true) {
        c = get();
        put(c);
        if (esc) esc = false;
        else if (c == '\\') esc = true;
        else if (c == '"') break;
      }
    } else {
      while (true) {
        c = peek();
        if (c == ',' || c == '}' || c == ']' || c == ' ' || c == '\n' ||
            c == '\r' || c == '\t' || c == std::char_traits<char>::eof())
          break;
        put(get());
      }
    }
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError("line " + std::to_string(line_) + ": " + msg, line_, "");
  }

 private:
  std::istream& in_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace

FileLayerStream::FileLayerStream(const std::filesystem::path& path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw ParseError("cannot open model file " + path.string(), 0, "");

  Scanner sc(in_);
  std::map<std::string, std::string> header;
  bool saw_layers = false;
  sc.expect('{');
  sc.skip_ws();
  if (sc.peek() == '}') {
    sc.get();
  } else {
    while (true) {
      const auto key = sc.read_string();
      sc.expect(':');
      if (key == "layers") {
        saw_layers = true;
        sc.expect('[');
        sc.skip_ws();
        if (sc.peek() == ']') {
          sc.get();
        } else {
          while (true) {
            sc.skip_ws();
            const Span span{sc.pos(), 0, sc.line()};
            sc.skip_value(nullptr);
            spans_.push_back({span.offset, sc.pos() - span.offset, span.line});
            sc.skip_ws();
            const int c = sc.get();
            if (c == ']') break;
            if (c != ',') sc.fail("expected ',' or ']' in layers");
          }
        }
      } else {
        sc.skip_value(&header[key]);
      }
      sc.skip_ws();
      const int c = sc.get();
      if (c == '}') break;
      if (c != ',') sc.fail("expected ',' or '}'");
    }
  }
  if (!saw_layers) throw ParseError("missing layers array", 1, "layers");

  try {
    auto fv = nlohmann::json::parse(header.at("format_version"));
    if (!fv.is_number_integer()) throw std::out_of_range("");
    format_version_ = fv.get<int>();
  } catch (const std::exception&) {
    throw ParseError("missing or non-integer format_version", 1, "format_version");
  }
  if (format_version_ != kFormatVersion)
    throw ValidationError("unsupported format_version " + std::to_string(format_version_), -1);

  std::vector<std::size_t> dims;
  try {
    auto is = nlohmann::json::parse(header.at("input_shape"));
    for (const auto& d : is) {
      if (!d.is_number_integer() || d.get<long>() <= 0) throw std::out_of_range("");
      dims.push_back(d.get<std::size_t>());
    }
  } catch (const std::exception&) {
    throw ParseError("input_shape must be [C, L] or [C, H, W]", 1, "input_shape");
  }
  if (dims.size() < 2 || dims.size() > 3)
    throw ParseError("input_shape must be [C, L] or [C, H, W]", 1, "input_shape");
  topology_.input = Shape(dims[0], {dims.begin() + 1, dims.end()});

  // Validation pass: one layer materialized at a time.
  Shape cur = topology_.input;
  std::string text;
  for (std::size_t i = 0; i < spans_.size(); ++i) {
    in_.clear();
    in_.seekg(static_cast<std::streamoff>(spans_[i].offset));
    text.resize(spans_[i].length);
    in_.read(text.data(), static_cast<std::streamsize>(text.size()));
    LayerSpec spec = detail::layer_from_text(text, i, spans_[i].line, cur.rank());
    topology_.layers.push_back(infer_layer(spec, cur, i));
    cur = topology_.layers.back().out;
  }
}

StreamedLayer FileLayerStream::load(std::size_t index) {
  const auto& span = spans_.at(index);
  const long last_good = static_cast<long>(index) - 1;
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(span.offset));
  std::string text(span.length, '\0');
  in_.read(text.data(), static_cast<std::streamsize>(text.size()));
  if (!in_ || in_.gcount() != static_cast<std::streamsize>(text.size()))
    throw StreamError("read failure streaming layer " + std::to_string(index) +
                          " from " + path_.string(),
                      last_good);
  const auto& info = topology_.layers[index];
  StreamedLayer out;
  try {
    out.spec = detail::layer_from_text(text, index, span.line, info.in.rank());
    if (kind_of(out.spec) != info.kind) throw Error("layer type changed");
    infer_layer(out.spec, info.in, index);
  } catch (const Error& e) {
    throw StreamError("layer " + std::to_string(index) +
                          " changed or corrupted while streaming: " + e.what(),
                      last_good);
  }
  out.index = index;
  out.info = &info;
  out.serialized_bytes = span.length;
  out.param_bytes = info.param_bytes();
  return out;
}

ModelLayerStream::ModelLayerStream(const ModelSpec& model) : model_(model) {
  for (const auto& l : model_.layers)
    serialized_sizes_.push_back(serialize_layer(l).size());
}

StreamedLayer ModelLayerStream::load(std::size_t index) {
  StreamedLayer out;
  out.index = index;
  out.spec = model_.layers.at(index);
  out.info = &model_.topology.layers[index];
  out.serialized_bytes = serialized_sizes_[index];
  out.param_bytes = out.info->param_bytes();
  return out;
}

}  // namespace tinyad
