#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tinyad/audit.hpp"
#include "tinyad/errors.hpp"
#include "tinyad/features.hpp"
#include "tinyad/fixtures.hpp"
#include "tinyad/latsim.hpp"
#include "tinyad/layer_stream.hpp"
#include "tinyad/pipeline.hpp"
#include "tinyad/scheduler.hpp"
#include "tinyad/tensor_io.hpp"

namespace tinyad::cli {

namespace {

using J = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  bool no_timestamp = false;
  std::string json_path;  // "-" prints JSON instead of text
};

std::string now_iso() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string shortest(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string kb(std::size_t bytes) { return fixed(static_cast<double>(bytes) / 1000.0, 3) + " kB"; }

// JSON has no infinity; thresholds at ±∞ are written as strings.
J number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? J("inf") : J("-inf");
  return J(v);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << content;
}

void emit(J report, std::string text, const Common& c, std::ostream& out) {
  if (!c.no_timestamp) {
    const auto ts = now_iso();
    report["generated_at"] = ts;
    text = "# generated " + ts + "\n" + text;
  }
  if (c.json_path == "-") {
    out << report.dump(2) << '\n';
    return;
  }
  out << text;
  if (!c.json_path.empty()) write_file(c.json_path, report.dump(2) + "\n");
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_flag("--no-timestamp", c.no_timestamp, "Omit timestamps from reports");
  sub->add_option("--json", c.json_path, "Write the JSON report to this path ('-' for stdout)");
}

struct ModeFlags {
  std::string mode = "tinyad";
  std::size_t patches = 3;

  ExecMode get() const { return ExecMode::parse(mode, patches); }
};

void add_mode(CLI::App* sub, ModeFlags& m) {
  sub->add_option("--mode", m.mode, "Execution mode")
      ->check(CLI::IsMember({"naive", "inplace", "patch", "tinyad"}, CLI::ignore_case))
      ->capture_default_str();
  sub->add_option("--patches", m.patches, "Patch count m for patch modes")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

std::vector<ExecMode> comparison_modes(std::size_t m) {
  return {ExecMode::naive(), ExecMode::inplace(), ExecMode::patch_only(m), ExecMode::tinyad(m)};
}

std::string range_str(const Range& r) {
  return "[" + std::to_string(r.lo) + "," + std::to_string(r.hi) + ")";
}

std::string region_str(const Region& r) {
  std::string s;
  for (std::size_t i = 0; i < r.axes.size(); ++i) s += (i ? "x" : "") + range_str(r.axes[i]);
  return s;
}

J region_json(const Region& r) {
  J a = J::array();
  for (const auto& x : r.axes) a.push_back(J::array({x.lo, x.hi}));
  return a;
}

// ---- features -------------------------------------------------------------

struct FeaturesArgs {
  Common c;
  std::string data, out, tensor, domains = "tri", mpf = "scaled";
  std::size_t window = 0, subwindow = 0, stride = 1, hop = 0, start = 0, count = 0;
};

int cmd_features(const FeaturesArgs& a, std::ostream& out) {
  const auto ds = load_csv(a.data);
  const Domains domains = Domains::parse(a.domains);
  const MpfVariant mpf = a.mpf == "normalized" ? MpfVariant::Normalized : MpfVariant::Scaled;
  const std::size_t hop = a.hop ? a.hop : a.window;
  feature_columns(a.window, a.subwindow, a.stride);

  std::ostringstream csv;
  std::size_t windows = 0, guarded = 0, rows = 0, cols = 0, padded = 0;
  for (std::size_t s = a.start; s + a.window <= ds.size(); s += hop) {
    if (a.count && windows == a.count) break;
    const auto fm = build_feature_matrix(std::span<const double>(ds.values).subspan(s, a.window),
                                         a.window, a.subwindow, a.stride, domains, mpf);
    if (windows == 0) {
      rows = fm.rows();
      cols = fm.columns();
      padded = fm.padded_length;
      csv << "window,feature";
      for (std::size_t c = 0; c < cols; ++c) csv << ",c" << c;
      csv << '\n';
      if (!a.tensor.empty()) write_tensor(fm.data, a.tensor);
    }
    for (std::size_t r = 0; r < rows; ++r) {
      csv << windows << ',' << fm.names[r];
      for (std::size_t c = 0; c < cols; ++c) csv << ',' << shortest(fm.data.at(0, r, c));
      csv << '\n';
    }
    for (bool g : fm.guarded) guarded += g ? 1 : 0;
    ++windows;
  }
  if (windows == 0)
    throw WindowError("series of " + std::to_string(ds.size()) + " samples holds no window of " +
                      std::to_string(a.window) + " starting at " + std::to_string(a.start));

  J report{{"command", "features"},  {"windows", windows},   {"rows", rows},
           {"columns", cols},        {"window", a.window},   {"subwindow", a.subwindow},
           {"stride", a.stride},     {"hop", hop},           {"padded_length", padded},
           {"frequency_unit", "cycles/sample"},              {"guarded_columns", guarded}};
  if (a.out.empty()) {
    out << csv.str();
    if (!a.c.json_path.empty() && a.c.json_path != "-") emit(report, "", a.c, out);
    return kOk;
  }
  write_file(a.out, csv.str());
  std::string text = "features: " + std::to_string(windows) + " windows of " +
                     std::to_string(rows) + "x" + std::to_string(cols) + " (spectra on " +
                     std::to_string(padded) + "-point zero-padded transforms), " +
                     std::to_string(guarded) + " guarded columns -> " + a.out + "\n";
  emit(report, text, a.c, out);
  return kOk;
}

// ---- plan -----------------------------------------------------------------

struct PlanArgs {
  Common c;
  std::string model;
  std::size_t patches = 3;
};

J memory_json(const MemoryPlan& p) {
  return J{{"mode", p.mode.str()},
           {"peak_bytes", p.peak_bytes},
           {"dominant_layer", p.dominant_layer},
           {"holding_bytes", p.holding_bytes}};
}

int cmd_plan(const PlanArgs& a, std::ostream& out) {
  const auto model = parse_model(a.model);
  const auto& topo = model.topology;
  const auto plan = plan_patches(topo, a.patches);
  std::ostringstream t;
  J report{{"command", "plan"}, {"patches", a.patches}, {"trunk_layers", plan.trunk_layers}};
  if (plan.trunk_layers == 0) {
    t << "no convolutional trunk: patch modes run layer by layer\n";
  } else {
    const std::size_t tl = plan.trunk_layers;
    const auto& last = topo.layers[tl - 1];
    const std::size_t axis = split_axis(last.out);
    t << "trunk: layers 0.." << tl - 1 << ", split axis " << axis << " of "
      << last.out.str() << "\n";
    std::string fields;
    J patches = J::array();
    for (std::size_t p = 0; p < plan.m; ++p) {
      t << "patch " << p << ": output " << range_str(plan.outputs[p]) << "\n";
      J layers = J::array();
      for (std::size_t l = 0; l < tl; ++l) {
        t << "  layer " << l << " " << kind_name(topo.layers[l].kind) << ": input "
          << region_str(plan.in_regions[p][l]) << " -> output "
          << region_str(plan.out_regions[p][l]) << "\n";
        layers.push_back(J{{"layer", l},
                           {"input", region_json(plan.in_regions[p][l])},
                           {"output", region_json(plan.out_regions[p][l])}});
      }
      fields += (p ? "," : "") + range_str(plan.in_regions[p][0].axes[axis]);
      patches.push_back(J{{"output", J::array({plan.outputs[p].lo, plan.outputs[p].hi})},
                          {"layers", layers}});
    }
    t << "input fields: " << fields << "\n";
    t << "overlap elements per layer:";
    for (auto v : plan.overlap_elements) t << ' ' << v;
    t << "\noverlap MACs: " << plan.overlap_macs << "\n";
    report["split_axis"] = axis;
    report["patch_plan"] = patches;
    report["overlap_elements"] = plan.overlap_elements;
    report["overlap_macs"] = plan.overlap_macs;
  }
  t << "memory (float32, kB = 1000 bytes):\n";
  J mem = J::array();
  for (const auto& mode : comparison_modes(a.patches)) {
    const auto mp = activation_memory(topo, mode);
    t << "  " << mode.str() << ": peak " << kb(mp.peak_bytes) << ", dominant "
      << (mp.dominant_layer < 0 ? std::string("input") : "layer " + std::to_string(mp.dominant_layer))
      << "\n";
    mem.push_back(memory_json(mp));
  }
  report["memory"] = mem;
  emit(report, t.str(), a.c, out);
  return kOk;
}

// ---- audit ----------------------------------------------------------------

struct AuditArgs {
  Common c;
  std::string model;
  ModeFlags mode;
  std::optional<std::size_t> budget;
  std::optional<double> f1;
};

int cmd_audit(const AuditArgs& a, std::ostream& out) {
  const auto model = parse_model(a.model);
  const ExecMode primary = a.mode.get();
  const auto audit = audit_model(model.topology, comparison_modes(a.mode.patches));
  const ReportOptions opt{a.budget, a.f1};
  J report = audit_json(audit, opt);
  report["command"] = "audit";
  report["primary_mode"] = primary.str();
  std::string text = audit_table(audit, opt);

  const auto plan = activation_memory(model.topology, primary);
  const long dom = plan.dominant_layer;
  const std::string dom_str =
      dom < 0 ? "input load"
              : "layer " + std::to_string(dom) + " (" +
                    std::string(kind_name(model.topology.layers[static_cast<std::size_t>(dom)].kind)) + ")";
  text += primary.str() + ": peak " + kb(plan.peak_bytes) + ", dominant " + dom_str + "\n";
  int code = kOk;
  if (a.budget) {
    const bool ok = plan.peak_bytes <= *a.budget;
    text += std::string("budget ") + kb(*a.budget) + ": " + (ok ? "pass" : "FAIL") + "\n";
    report["budget_ok"] = ok;
    if (!ok) code = kBudget;
  }
  report["dominant_layer"] = dom;
  emit(report, text, a.c, out);
  return code;
}

// ---- run ------------------------------------------------------------------

struct RunArgs {
  Common c;
  std::string model, input, output;
  std::optional<std::uint32_t> seed;
  ModeFlags mode;
  std::optional<std::size_t> budget;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  FileLayerStream stream(a.model);
  const auto& topo = stream.topology();
  Tensor input;
  if (!a.input.empty()) {
    input = read_tensor(a.input);
  } else {
    std::mt19937 rng(*a.seed);
    std::uniform_real_distribution<float> d(-1.0f, 1.0f);
    input = Tensor(topo.input);
    for (auto& v : input.data()) v = d(rng);
  }
  const ExecMode mode = a.mode.get();
  Arena arena(a.budget);
  ExecResult res;
  try {
    res = execute(stream, input, mode, arena);
  } catch (const BudgetError& e) {
    err << "budget violation: " << e.what() << "\n";
    J report{{"command", "run"},
             {"mode", mode.str()},
             {"budget_bytes", e.budget_bytes()},
             {"violating_layer", e.layer()},
             {"live_bytes", e.live_bytes()}};
    emit(report, std::string("budget violation: ") + e.what() + "\n", a.c, out);
    return kBudget;
  }
  const auto analytic = activation_memory(topo, mode);
  if (!a.output.empty()) write_tensor(res.output, a.output);

  J values = J::array();
  const std::size_t shown = std::min<std::size_t>(res.output.data().size(), 16);
  for (std::size_t i = 0; i < shown; ++i) values.push_back(res.output.data()[i]);
  J report{{"command", "run"},
           {"mode", mode.str()},
           {"output_shape", res.output.shape().str()},
           {"peak_bytes", res.peak_bytes},
           {"analytic_peak_bytes", analytic.peak_bytes},
           {"macs", res.macs},
           {"param_resident_peak_bytes", res.param_peak_bytes},
           {"inplace_copied_bytes", res.inplace_copied_bytes},
           {"output_head", values}};
  if (a.budget) report["budget_bytes"] = *a.budget;
  std::ostringstream t;
  t << "mode " << mode.str() << ": output " << res.output.shape().str() << "\n"
    << "measured peak " << res.peak_bytes << " bytes (" << kb(res.peak_bytes)
    << "), analytic " << analytic.peak_bytes << " bytes\n"
    << "MACs " << res.macs << ", resident parameter peak " << res.param_peak_bytes
    << " bytes\n"
    << "output[0.." << shown << "):";
  for (std::size_t i = 0; i < shown; ++i) t << ' ' << shortest(res.output.data()[i]);
  t << "\n";
  emit(report, t.str(), a.c, out);
  return kOk;
}

// ---- detect / evaluate ------------------------------------------------------

struct DetectArgs {
  Common c;
  std::string model, data, scores;
  ModeFlags mode;
  std::size_t window = 0, subwindow = 0, stride = 1, threads = 0;
  std::string domains = "tri";
  bool squared = false;
};

J detection_json(const DetectReport& r) {
  return J{{"threshold", number_or_inf(r.threshold.tau)},
           {"validation_f1", r.threshold.f1},
           {"validation_points", r.validation_points},
           {"warning", r.threshold.no_positives
                           ? J("no anomalies in validation; threshold set to the maximum score")
                           : J(nullptr)},
           {"test_points", r.test.predicted.size()},
           {"precision", r.test.precision},
           {"recall", r.test.recall},
           {"f1", r.test.f1},
           {"tp", r.test.counts.tp},
           {"fp", r.test.counts.fp},
           {"fn", r.test.counts.fn},
           {"tn", r.test.counts.tn}};
}

std::string detection_text(const DetectReport& r) {
  std::ostringstream t;
  if (r.threshold.no_positives)
    t << "warning: no anomalies in validation; threshold set to the maximum score\n";
  t << "threshold " << shortest(r.threshold.tau) << " (validation F1 "
    << fixed(r.threshold.f1, 4) << ", " << r.validation_points << " points)\n"
    << "test: precision " << fixed(r.test.precision, 4) << ", recall "
    << fixed(r.test.recall, 4) << ", F1 " << fixed(r.test.f1, 4) << " (tp "
    << r.test.counts.tp << ", fp " << r.test.counts.fp << ", fn " << r.test.counts.fn
    << ", tn " << r.test.counts.tn << ")\n";
  return t.str();
}

int cmd_detect(const DetectArgs& a, std::ostream& out) {
  const auto model = parse_model(a.model);
  const auto ds = load_csv(a.data);
  const Shape& in = model.input_shape;
  InputRecipe recipe;
  if (in.rank() == 1) {
    recipe = InputRecipe::raw(in);
  } else {
    if (a.window == 0 || a.subwindow == 0)
      throw UsageError("a 2-D model input needs --window and --subwindow");
    recipe = InputRecipe::features(in, a.window, a.subwindow, a.stride, Domains::parse(a.domains));
  }
  const ExecMode mode = a.mode.get();
  const auto scores = predict_series(model, ds, mode, recipe,
                                     a.squared ? ScoreKind::Squared : ScoreKind::Absolute,
                                     worker_count(a.threads));
  if (!a.scores.empty()) {
    std::ofstream f(a.scores);
    if (!f) throw Error("cannot write " + a.scores);
    write_scores_csv(f, scores);
  }
  const auto r = detect_from_scores(scores);
  J report{{"command", "detect"},
           {"mode", mode.str()},
           {"window", recipe.window},
           {"score", a.squared ? "squared" : "absolute"},
           {"samples", ds.size()},
           {"split", {{"train", ds.train_end},
                      {"validation", ds.val_end - ds.train_end},
                      {"test", ds.size() - ds.val_end}}},
           {"scored_points", scores.score.size()}};
  report.update(detection_json(r));
  emit(report, "mode " + mode.str() + ", " + std::to_string(scores.score.size()) +
                   " scored points\n" + detection_text(r),
       a.c, out);
  return kOk;
}

struct EvaluateArgs {
  Common c;
  std::string scores;
  std::optional<double> threshold;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const auto s = read_scores_csv(a.scores);
  DetectReport r;
  if (a.threshold) {
    std::vector<double> ts;
    std::vector<std::uint8_t> tl;
    for (std::size_t i = 0; i < s.score.size(); ++i)
      if (s.segment[i] == Segment::Test) {
        ts.push_back(s.score[i]);
        tl.push_back(s.label[i]);
      }
    if (ts.empty()) throw Error("no test rows in " + a.scores);
    r.threshold.tau = *a.threshold;
    r.test = evaluate(ts, tl, *a.threshold);
  } else {
    r = detect_from_scores(s);
  }
  J report{{"command", "evaluate"}, {"threshold_given", a.threshold.has_value()}};
  report.update(detection_json(r));
  emit(report, detection_text(r), a.c, out);
  return kOk;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  Common c;
  std::string model, gantt;
  ModeFlags mode;
  bool per_patch = false;
  FlashModel flash;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const auto model = parse_model(a.model);
  const ExecMode mode = a.mode.get();
  const auto p = profile_model(model.topology, layer_file_bytes(model), mode, a.flash, a.per_patch);
  if (!a.gantt.empty()) {
    std::ostringstream g;
    g << "layer,resource,start,end\n";
    for (const auto* tl : {&p.single, &p.multi}) {
      const std::string tag = tl == &p.single ? "single" : "multi";
      for (const auto& e : tl->events)
        g << '"' << p.stages[e.stage].label << "\"," << tag << '-'
          << (e.compute ? "compute" : "loader") << ',' << shortest(e.start / 1000.0) << ','
          << shortest(e.end / 1000.0) << '\n';
    }
    write_file(a.gantt, g.str());
  }
  J stages = J::array();
  for (const auto& s : p.stages)
    stages.push_back(J{{"label", s.label}, {"prep_ms", s.prep / 1000.0}, {"fwd_ms", s.fwd / 1000.0}});
  J report{{"command", "simulate"},
           {"timing", "simulated, calibrated"},
           {"mode", mode.str()},
           {"parameter_reload", p.per_patch_reload ? "per-patch" : "per-layer"},
           {"flash", {{"page_size_bytes", a.flash.page_size},
                      {"t_read_us", a.flash.t_read_us},
                      {"decode_us_per_byte", a.flash.decode_us_per_byte},
                      {"mac_us", a.flash.mac_us},
                      {"copy_us_per_byte", a.flash.copy_us_per_byte}}},
           {"prep_ms", p.prep_total / 1000.0},
           {"fwd_ms", p.fwd_total / 1000.0},
           {"single_thread_ms", p.single_total() / 1000.0},
           {"multi_thread_ms", p.multi_total() / 1000.0},
           {"savings", p.savings()},
           {"stages", stages}};
  std::ostringstream t;
  t << "latency (simulated, calibrated), mode " << mode.str() << ", parameters reloaded "
    << (p.per_patch_reload ? "per patch" : "per layer") << "\n"
    << "data preparation " << fixed(p.prep_total / 1000.0, 2) << " ms, forward "
    << fixed(p.fwd_total / 1000.0, 2) << " ms\n"
    << "single-thread " << fixed(p.single_total() / 1000.0, 2) << " ms, multi-thread "
    << fixed(p.multi_total() / 1000.0, 2) << " ms (-" << fixed(100.0 * p.savings(), 1)
    << "%)\n";
  emit(report, t.str(), a.c, out);
  return kOk;
}

// ---- fixture ----------------------------------------------------------------

struct FixtureArgs {
  std::string name, out;
  std::uint32_t seed = 7;
};

int cmd_fixture(const FixtureArgs& a, std::ostream& out) {
  const auto model = build_trunk(reference_config(a.name), a.seed);
  save_model(model, a.out);
  out << "wrote " << a.name << " trunk (" << model.layers.size() << " layers, input "
      << model.input_shape.str() << ") to " << a.out << "\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Memory-budgeted CNN inference and anomaly detection toolchain", "tinyad"};
  app.require_subcommand(1);

  FeaturesArgs fa;
  auto* features = app.add_subcommand("features", "Extract feature matrices from a CSV series");
  add_common(features, fa.c);
  features->add_option("--data", fa.data, "CSV with timestamp,value,label")->required()->check(CLI::ExistingFile);
  features->add_option("--window", fa.window, "Window length")->required()->check(CLI::PositiveNumber);
  features->add_option("--subwindow", fa.subwindow, "Sub-window length")->required()->check(CLI::PositiveNumber);
  features->add_option("--stride", fa.stride, "Sub-window stride")->check(CLI::PositiveNumber)->capture_default_str();
  features->add_option("--hop", fa.hop, "Distance between windows (default: window)");
  features->add_option("--start", fa.start, "First sample of the first window");
  features->add_option("--count", fa.count, "Maximum number of windows (0: all)");
  features->add_option("--domains", fa.domains, "time,freq,wavelet or tri")->capture_default_str();
  features->add_option("--mpf", fa.mpf, "Mean power frequency form")
      ->check(CLI::IsMember({"scaled", "normalized"}))->capture_default_str();
  features->add_option("--out", fa.out, "CSV output path (default: stdout)");
  features->add_option("--tensor", fa.tensor, "Write the first window's matrix as a tensor file");

  PlanArgs pa;
  auto* plan = app.add_subcommand("plan", "Show the patch plan and memory plan");
  add_common(plan, pa.c);
  plan->add_option("--model", pa.model, "Model file")->required()->check(CLI::ExistingFile);
  plan->add_option("--patches", pa.patches, "Patch count m")->check(CLI::PositiveNumber)->capture_default_str();

  AuditArgs aa;
  auto* audit = app.add_subcommand("audit", "MAC, parameter and peak-memory report");
  add_common(audit, aa.c);
  audit->add_option("--model", aa.model, "Model file")->required()->check(CLI::ExistingFile);
  add_mode(audit, aa.mode);
  audit->add_option("--budget", aa.budget, "SRAM budget in bytes")->check(CLI::PositiveNumber);
  audit->add_option("--f1", aa.f1, "F1 score to include in the report")->check(CLI::Range(0.0, 1.0));

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Execute a model once");
  add_common(run_cmd, ra.c);
  run_cmd->add_option("--model", ra.model, "Model file")->required()->check(CLI::ExistingFile);
  auto* in_opt = run_cmd->add_option("--input", ra.input, "Input tensor file")->check(CLI::ExistingFile);
  auto* seed_opt = run_cmd->add_option("--seed", ra.seed, "Random input seed");
  in_opt->excludes(seed_opt);
  run_cmd->add_option("--output", ra.output, "Write the output tensor here");
  add_mode(run_cmd, ra.mode);
  run_cmd->add_option("--budget", ra.budget, "SRAM budget in bytes")->check(CLI::PositiveNumber);

  DetectArgs da;
  auto* detect = app.add_subcommand("detect", "Score a labeled series and evaluate F1");
  add_common(detect, da.c);
  detect->add_option("--model", da.model, "Model file")->required()->check(CLI::ExistingFile);
  detect->add_option("--data", da.data, "CSV with timestamp,value,label")->required()->check(CLI::ExistingFile);
  add_mode(detect, da.mode);
  detect->add_option("--window", da.window, "History length for feature inputs");
  detect->add_option("--subwindow", da.subwindow, "Sub-window length for feature inputs");
  detect->add_option("--stride", da.stride, "Sub-window stride")->check(CLI::PositiveNumber);
  detect->add_option("--domains", da.domains, "Feature domains")->capture_default_str();
  detect->add_flag("--squared", da.squared, "Score with squared instead of absolute error");
  detect->add_option("--threads", da.threads, "Worker threads (0: all cores; capped by TINYAD_THREADS)");
  detect->add_option("--scores", da.scores, "Write per-timestep scores CSV");

  EvaluateArgs ea;
  auto* eval = app.add_subcommand("evaluate", "Evaluate a scores CSV");
  add_common(eval, ea.c);
  eval->add_option("--scores", ea.scores, "Scores CSV from detect")->required()->check(CLI::ExistingFile);
  eval->add_option("--threshold", ea.threshold, "Fixed threshold (default: chosen on validation)");

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Simulate flash/SRAM inference latency");
  add_common(sim, sa.c);
  sim->add_option("--model", sa.model, "Model file")->required()->check(CLI::ExistingFile);
  add_mode(sim, sa.mode);
  sim->add_flag("--per-patch-reload", sa.per_patch, "Reload parameters for every patch");
  sim->add_option("--page-size", sa.flash.page_size, "Flash page size in bytes")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--t-read", sa.flash.t_read_us, "Page read time (us)")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--decode", sa.flash.decode_us_per_byte, "Decode time per byte (us)")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--mac-time", sa.flash.mac_us, "Time per MAC (us)")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--copy-cost", sa.flash.copy_us_per_byte, "In-place copy time per byte (us)")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--gantt", sa.gantt, "Write per-stage timeline CSV");

  FixtureArgs xa;
  auto* fixture = app.add_subcommand("fixture", "Write a reference trunk model with random weights");
  std::vector<std::string> names;
  for (const auto& c : reference_configs()) names.push_back(c.name);
  fixture->add_option("--name", xa.name, "Reference configuration")->required()->check(CLI::IsMember(names));
  fixture->add_option("--out", xa.out, "Model file to write")->required();
  fixture->add_option("--seed", xa.seed, "Weight seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*features) return cmd_features(fa, out);
    if (*plan) return cmd_plan(pa, out);
    if (*audit) return cmd_audit(aa, out);
    if (*run_cmd) {
      if (ra.input.empty() && !ra.seed) throw UsageError("run needs --input or --seed");
      return cmd_run(ra, out, err);
    }
    if (*detect) return cmd_detect(da, out);
    if (*eval) return cmd_evaluate(ea, out);
    if (*sim) return cmd_simulate(sa, out);
    if (*fixture) return cmd_fixture(xa, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const BudgetError& e) {
    err << "budget violation: " << e.what() << "\n";
    return kBudget;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace tinyad::cli
