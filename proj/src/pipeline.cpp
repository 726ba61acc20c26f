#include "tinyad/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>

#include "tinyad/errors.hpp"

namespace tinyad {

const char* segment_name(Segment s) {
  switch (s) {
    case Segment::Train: return "train";
    case Segment::Validation: return "validation";
    case Segment::Test: return "test";
  }
  return "?";
}

Segment parse_segment(const std::string& s) {
  if (s == "train") return Segment::Train;
  if (s == "validation") return Segment::Validation;
  if (s == "test") return Segment::Test;
  throw Error("unknown segment '" + s + "'");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = b + s.size();
  if (*b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> f;
  std::size_t start = 0;
  while (true) {
    const auto c = line.find(',', start);
    f.push_back(trim(std::string_view(line).substr(start, c - start)));
    if (c == std::string::npos) break;
    start = c + 1;
  }
  return f;
}

}  // namespace

void split_dataset(SeriesDataset& d) {
  const std::size_t n = d.size();
  d.train_end = n * 6 / 10;
  d.val_end = d.train_end + n / 10;
}

SeriesDataset parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IngestError("empty file: missing header", 0);
  if (split_fields(line) != std::vector<std::string>{"timestamp", "value", "label"})
    throw IngestError("header must be 'timestamp,value,label'", 0);

  SeriesDataset d;
  std::vector<double> numeric;
  bool all_numeric = true;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto f = split_fields(line);
    if (f.size() != 3)
      throw IngestError("row " + std::to_string(row) + ": expected 3 fields, got " +
                            std::to_string(f.size()),
                        row);
    double v = 0;
    if (!parse_double(f[1], v) || !std::isfinite(v))
      throw IngestError("row " + std::to_string(row) + ": bad value '" + f[1] + "'", row);
    if (f[2] != "0" && f[2] != "1")
      throw IngestError("row " + std::to_string(row) + ": label must be 0 or 1, got '" +
                            f[2] + "'",
                        row);
    if (f[0].empty()) throw IngestError("row " + std::to_string(row) + ": empty timestamp", row);
    double ts = 0;
    if (all_numeric && !parse_double(f[0], ts)) all_numeric = false;
    numeric.push_back(ts);
    d.timestamps.push_back(f[0]);
    d.values.push_back(v);
    d.labels.push_back(f[2] == "1" ? 1 : 0);
  }
  if (d.values.empty()) throw IngestError("file has no data rows", 0);
  for (std::size_t i = 1; i < d.size(); ++i) {
    const bool increasing = all_numeric ? numeric[i] > numeric[i - 1]
                                        : d.timestamps[i] > d.timestamps[i - 1];
    if (!increasing)
      throw IngestError("row " + std::to_string(i + 1) + ": timestamp '" + d.timestamps[i] +
                            "' does not increase",
                        i + 1);
  }
  split_dataset(d);
  return d;
}

SeriesDataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string(), 0);
  return parse_csv(in);
}

InputRecipe InputRecipe::raw(const Shape& model_input) {
  if (model_input.channels() != 1 || model_input.rank() != 1)
    throw ShapeError("raw input needs a [1,L] model input, model expects " + model_input.str());
  InputRecipe r;
  r.window = model_input.extent(0);
  return r;
}

InputRecipe InputRecipe::features(const Shape& model_input, std::size_t window,
                                  std::size_t subwindow, std::size_t stride,
                                  Domains domains) {
  const std::size_t cols = feature_columns(window, subwindow, stride);
  const Shape want(1, {domains.feature_count(), cols});
  if (!(want == model_input))
    throw ShapeError("feature geometry gives " + want.str() + ", model expects " +
                     model_input.str());
  InputRecipe r;
  r.kind = Kind::Features;
  r.window = window;
  r.subwindow = subwindow;
  r.stride = stride;
  r.domains = domains;
  return r;
}

Tensor InputRecipe::make_input(std::span<const double> history) const {
  if (history.size() != window)
    throw ShapeError("history of " + std::to_string(history.size()) +
                     " samples, recipe expects " + std::to_string(window));
  if (kind == Kind::Features)
    return std::move(build_feature_matrix(history, window, subwindow, stride, domains, mpf).data);
  Tensor t(Shape(1, {window}));
  for (std::size_t i = 0; i < window; ++i) t.data()[i] = static_cast<float>(history[i]);
  return t;
}

std::size_t worker_count(std::size_t requested) {
  std::size_t n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TINYAD_THREADS")) {
    std::size_t cap = 0;
    const std::string s(env);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (ec == std::errc() && p == s.data() + s.size() && cap > 0) n = std::min(n, cap);
  }
  return n;
}

ScoreSeries predict_series(const ModelSpec& model, const SeriesDataset& data,
                           ExecMode mode, const InputRecipe& recipe, ScoreKind kind,
                           std::size_t threads) {
  const std::size_t l = recipe.window;
  if (model.topology.output().element_count() != 1)
    throw ShapeError("model must produce a single value, produces " +
                     model.topology.output().str());
  if (data.size() <= l)
    throw ShapeError("series of " + std::to_string(data.size()) +
                     " samples is not longer than the window " + std::to_string(l));
  const std::size_t count = data.size() - l;
  ScoreSeries s;
  s.t.resize(count);
  s.segment.resize(count);
  s.score.resize(count);
  s.label.resize(count);

  auto work = [&](std::size_t begin, std::size_t step) {
    ModelLayerStream stream(model);
    Arena arena;
    for (std::size_t i = begin; i < count; i += step) {
      const std::size_t t = l + i;
      const auto hist = std::span<const double>(data.values).subspan(t - l, l);
      const auto res = execute(stream, recipe.make_input(hist), mode, arena);
      const double err = static_cast<double>(res.output.data()[0]) - data.values[t];
      s.t[i] = t;
      s.segment[i] = data.segment_of(t);
      s.score[i] = kind == ScoreKind::Absolute ? std::abs(err) : err * err;
      s.label[i] = data.labels[t];
    }
  };

  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), count);
  if (workers == 1) {
    work(0, 1);
    return s;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        work(w, workers);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return s;
}

double Confusion::precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}
double Confusion::recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}
double Confusion::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

Confusion confusion(std::span<const std::uint8_t> predicted,
                    std::span<const std::uint8_t> labels) {
  if (predicted.size() != labels.size()) throw Error("prediction/label length mismatch");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predicted[i]) (labels[i] ? c.tp : c.fp)++;
    else (labels[i] ? c.fn : c.tn)++;
  }
  return c;
}

ThresholdChoice select_threshold(std::span<const double> scores,
                                 std::span<const std::uint8_t> labels) {
  if (scores.empty()) throw Error("threshold selection needs at least one score");
  if (scores.size() != labels.size()) throw Error("score/label length mismatch");
  const std::size_t positives = std::count(labels.begin(), labels.end(), 1);
  ThresholdChoice best;
  if (positives == 0) {
    best.tau = *std::max_element(scores.begin(), scores.end());
    best.no_positives = true;
    return best;
  }

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Ascending sweep: candidate τ flags every score above it. F1 is compared
  // exactly as the fraction 2tp / (2tp + fp + fn).
  std::size_t tp = positives, fp = scores.size() - positives;  // τ = -inf
  std::size_t best_num = 2 * tp, best_den = 2 * tp + fp;
  best.tau = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  while (i < order.size()) {
    const double v = scores[order[i]];
    while (i < order.size() && scores[order[i]] == v) {
      (labels[order[i]] ? tp : fp)--;
      ++i;
    }
    const double tau = i < order.size() ? v + (scores[order[i]] - v) / 2.0
                                        : std::numeric_limits<double>::infinity();
    const std::size_t fn = positives - tp;
    const std::size_t num = 2 * tp, den = 2 * tp + fp + fn;
    if (num * best_den >= best_num * den) {
      best_num = num;
      best_den = den;
      best.tau = tau;
    }
  }
  best.f1 = best_den == 0 ? 0.0 : static_cast<double>(best_num) / static_cast<double>(best_den);
  return best;
}

DetectionResult evaluate(std::span<const double> scores,
                         std::span<const std::uint8_t> labels, double tau) {
  DetectionResult r;
  r.tau = tau;
  r.predicted.reserve(scores.size());
  for (double s : scores) r.predicted.push_back(s > tau ? 1 : 0);
  r.counts = confusion(r.predicted, labels);
  r.precision = r.counts.precision();
  r.recall = r.counts.recall();
  r.f1 = r.counts.f1();
  return r;
}

DetectReport detect_from_scores(const ScoreSeries& s) {
  std::vector<double> vs, ts;
  std::vector<std::uint8_t> vl, tl;
  for (std::size_t i = 0; i < s.score.size(); ++i) {
    if (s.segment[i] == Segment::Validation) {
      vs.push_back(s.score[i]);
      vl.push_back(s.label[i]);
    } else if (s.segment[i] == Segment::Test) {
      ts.push_back(s.score[i]);
      tl.push_back(s.label[i]);
    }
  }
  if (vs.empty()) throw Error("no scored points in the validation segment");
  if (ts.empty()) throw Error("no scored points in the test segment");
  DetectReport r;
  r.threshold = select_threshold(vs, vl);
  r.test = evaluate(ts, tl, r.threshold.tau);
  r.validation_points = vs.size();
  return r;
}

void write_scores_csv(std::ostream& out, const ScoreSeries& s) {
  out << "t,segment,score,label\n";
  char buf[64];
  for (std::size_t i = 0; i < s.score.size(); ++i) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, s.score[i]);
    out << s.t[i] << ',' << segment_name(s.segment[i]) << ','
        << std::string_view(buf, static_cast<std::size_t>(p - buf)) << ','
        << int(s.label[i]) << '\n';
  }
}

ScoreSeries read_scores_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string(), 0);
  std::string line;
  if (!std::getline(in, line) ||
      split_fields(line) != std::vector<std::string>{"t", "segment", "score", "label"})
    throw IngestError("scores header must be 't,segment,score,label'", 0);
  ScoreSeries s;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto f = split_fields(line);
    double t = 0, score = 0;
    if (f.size() != 4 || !parse_double(f[0], t) || !parse_double(f[2], score) ||
        (f[3] != "0" && f[3] != "1"))
      throw IngestError("scores row " + std::to_string(row) + " is malformed", row);
    try {
      s.segment.push_back(parse_segment(f[1]));
    } catch (const Error&) {
      throw IngestError("scores row " + std::to_string(row) + ": unknown segment", row);
    }
    s.t.push_back(static_cast<std::size_t>(t));
    s.score.push_back(score);
    s.label.push_back(f[3] == "1" ? 1 : 0);
  }
  return s;
}

}  // namespace tinyad
