#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tinyad/features.hpp"
#include "tinyad/model.hpp"
#include "tinyad/scheduler.hpp"

namespace tinyad {

enum class Segment { Train, Validation, Test };
const char* segment_name(Segment s);
Segment parse_segment(const std::string& s);

// Rows in file order; split boundaries are chronological 60/10/30.
struct SeriesDataset {
  std::vector<std::string> timestamps;
  std::vector<double> values;
  std::vector<std::uint8_t> labels;
  std::size_t train_end = 0;  // [0, train_end) is training
  std::size_t val_end = 0;    // [train_end, val_end) is validation

  std::size_t size() const { return values.size(); }
  Segment segment_of(std::size_t t) const {
    return t < train_end ? Segment::Train : t < val_end ? Segment::Validation : Segment::Test;
  }
};

// Header must be `timestamp,value,label`. Timestamps must increase strictly;
// they compare numerically when every one parses as a number, otherwise as
// strings (ISO-8601 sorts correctly). Errors carry the 1-based data row.
SeriesDataset parse_csv(std::istream& in);
SeriesDataset load_csv(const std::filesystem::path& path);
void split_dataset(SeriesDataset& d);

// How a history window becomes a model input.
struct InputRecipe {
  enum class Kind { Raw, Features };
  Kind kind = Kind::Raw;
  std::size_t window = 0;  // L
  std::size_t subwindow = 0;
  std::size_t stride = 1;
  Domains domains;
  MpfVariant mpf = MpfVariant::Scaled;

  // Raw input [1, L] or feature matrix [1, F, T]. For feature inputs the
  // geometry must reproduce the model's input shape (ShapeError otherwise).
  static InputRecipe raw(const Shape& model_input);
  static InputRecipe features(const Shape& model_input, std::size_t window,
                              std::size_t subwindow, std::size_t stride,
                              Domains domains = {});
  Tensor make_input(std::span<const double> history) const;
};

enum class ScoreKind { Absolute, Squared };

struct ScoreSeries {
  std::vector<std::size_t> t;
  std::vector<Segment> segment;
  std::vector<double> score;
  std::vector<std::uint8_t> label;
};

// Worker count: `requested` (0 = hardware concurrency) capped by the
// TINYAD_THREADS environment variable when set.
std::size_t worker_count(std::size_t requested = 0);

// For every t >= L, predicts y_t from samples [t-L, t) and scores the error.
// Results do not depend on the worker count.
ScoreSeries predict_series(const ModelSpec& model, const SeriesDataset& data,
                           ExecMode mode, const InputRecipe& recipe,
                           ScoreKind kind = ScoreKind::Absolute, std::size_t threads = 1);

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision() const;
  double recall() const;
  double f1() const;
};

Confusion confusion(std::span<const std::uint8_t> predicted,
                    std::span<const std::uint8_t> labels);

struct ThresholdChoice {
  double tau = 0;
  double f1 = 0;
  bool no_positives = false;  // τ fell back to the maximum score
};

// Candidates: ±∞ and midpoints between consecutive distinct scores; the
// largest τ with the best pointwise F1 wins. Predicted label is score > τ.
ThresholdChoice select_threshold(std::span<const double> scores,
                                 std::span<const std::uint8_t> labels);

struct DetectionResult {
  double tau = 0;
  std::vector<std::uint8_t> predicted;
  Confusion counts;
  double precision = 0, recall = 0, f1 = 0;
};

DetectionResult evaluate(std::span<const double> scores,
                         std::span<const std::uint8_t> labels, double tau);

// Threshold from the validation rows, metrics on the test rows.
struct DetectReport {
  ThresholdChoice threshold;
  DetectionResult test;
  std::size_t validation_points = 0;
};
DetectReport detect_from_scores(const ScoreSeries& s);

void write_scores_csv(std::ostream& out, const ScoreSeries& s);
ScoreSeries read_scores_csv(const std::filesystem::path& path);

}  // namespace tinyad
