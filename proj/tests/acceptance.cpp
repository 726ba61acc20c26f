// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "tinyad/audit.hpp"
#include "tinyad/features.hpp"
#include "tinyad/fixtures.hpp"
#include "tinyad/latsim.hpp"
#include "tinyad/layer_stream.hpp"
#include "tinyad/pipeline.hpp"
#include "tinyad/scheduler.hpp"

using namespace tinyad;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& why) {
    if (!ok) {
      if (pass) detail << " first failure: " << why << ";";
      pass = false;
    }
  }
};

int failures = 0;

void report(int id, const Outcome& o) {
  std::printf("criterion %2d: %s %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::vector<float> uniform(std::mt19937& rng, std::size_t n, float a = 1.0f) {
  std::uniform_real_distribution<float> u(-a, a);
  std::vector<float> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Shared by criteria 1, 2, 7 and 10.
struct SuiteStats {
  std::size_t models = 0, runs = 0;
  double worst_diff = 0;
  std::size_t peak_matches = 0;
  std::size_t overlap_matches = 0, overlap_checks = 0;
  std::size_t residency_ok = 0;
  std::size_t kinds_1d = 0, kinds_2d = 0, with_k2 = 0, max_len = 0;
  double seconds = 0;
};

SuiteStats equivalence_suite() {
  SuiteStats s;
  std::mt19937 rng(20240607);
  const std::size_t ms[] = {1, 2, 3, 5};
  const auto t0 = Clock::now();
  for (int trial = 0; trial < 240; ++trial) {
    const auto model = random_model(rng);
    const auto x = random_tensor(model.topology.input, rng);
    ++s.models;
    (model.topology.input.rank() == 1 ? s.kinds_1d : s.kinds_2d)++;
    s.max_len = std::max(s.max_len, model.topology.input.spatial().back());
    for (const auto& l : model.topology.layers)
      if (l.kind == LayerKind::DepthwiseConv && l.multiplier == 2) {
        ++s.with_k2;
        break;
      }
    std::size_t largest_layer = 0;
    for (const auto& l : model.topology.layers) largest_layer = std::max(largest_layer, l.param_bytes());

    const std::size_t m = ms[trial % 4];
    std::vector<ExecMode> modes{ExecMode::naive(), ExecMode::inplace(), ExecMode::patch_only(m),
                                ExecMode::tinyad(m)};
    Tensor base;
    std::uint64_t naive_macs = 0;
    for (const auto& mode : modes) {
      ModelLayerStream stream(model);
      Arena arena;
      const auto r = execute(stream, x, mode, arena);
      ++s.runs;
      if (mode.kind == ExecMode::Kind::Naive) {
        base = r.output;
        naive_macs = r.macs;
      } else {
        s.worst_diff = std::max(s.worst_diff, max_abs_diff(r.output, base));
      }
      s.peak_matches += r.peak_bytes == activation_memory(model.topology, mode).peak_bytes;
      bool resident = r.param_peak_bytes <= largest_layer;
      for (auto b : stream.residency().trace()) resident = resident && b <= largest_layer;
      s.residency_ok += resident;
      if (mode.kind == ExecMode::Kind::PatchOnly && r.plan) {
        ++s.overlap_checks;
        s.overlap_matches +=
            static_cast<std::int64_t>(r.macs) - static_cast<std::int64_t>(naive_macs) == r.plan->overlap_macs;
      }
    }
  }
  s.seconds = seconds_since(t0);
  return s;
}

void criterion1(const SuiteStats& s) {
  Outcome o;
  o.require(s.models >= 200, "fewer than 200 models");
  o.require(s.worst_diff <= 1e-5, "max_abs_diff above 1e-5");
  o.require(s.seconds <= 60.0, "runtime above 60 s");
  o.require(s.kinds_1d > 0 && s.kinds_2d > 0 && s.with_k2 > 0, "suite lacks 1-D, 2-D or K=2 cases");
  o.detail << s.models << " models (" << s.kinds_1d << " 1-D, " << s.kinds_2d << " 2-D, " << s.with_k2
           << " with K=2, longest input " << s.max_len << "), " << s.runs
           << " runs, worst max_abs_diff " << s.worst_diff << ", " << s.seconds << " s";
  report(1, o);
}

void criterion2(const SuiteStats& s) {
  Outcome o;
  o.require(s.peak_matches == s.runs, "analytic and measured peaks differ");
  o.detail << s.peak_matches << "/" << s.runs << " runs with analytic peak == measured high-water mark";
  report(2, o);
}

void criterion3() {
  Outcome o;
  const DepthwiseCase worked{4, 1, 10, 8, 3};
  const auto naive = naive_depthwise_elements(worked);
  const auto inplace = inplace_depthwise_elements(worked);
  o.require(naive == 84 && inplace == 62, "worked case is not 84 vs 62");

  // Measured: one depthwise layer, N=1024, K=1, 1-tap kernel so s_i = s_o.
  const std::size_t n = 1024, len = 1200;
  std::mt19937 rng(3);
  const auto model = make_model(Shape(n, {len}), {DepthwiseConv{{1}, {1}, 1, uniform(rng, n), uniform(rng, n)}});
  const auto x = random_tensor(model.topology.input, rng);
  Arena a;
  const auto rn = execute(model, x, ExecMode::naive(), a);
  const auto ri = execute(model, x, ExecMode::inplace(), a);
  const double measured = double(rn.peak_bytes) / double(ri.peak_bytes);
  const DepthwiseCase big{n, 1, len, len, 1};
  const double formula = double(naive_depthwise_elements(big)) / double(inplace_depthwise_elements(big));
  o.require(measured >= 1.99 && measured <= 2.0, "measured in-place factor outside [1.99, 2.00]");
  o.require(formula >= 1.99 && formula <= 2.0, "closed-form in-place factor outside [1.99, 2.00]");
  o.require(max_abs_diff(rn.output, ri.output) == 0.0, "in-place output differs");
  o.detail << "naive " << naive << " vs in-place " << inplace << " elements; N=1024 factor measured "
           << measured << ", closed form " << formula;
  report(3, o);
}

void criterion4() {
  Outcome o;
  // The depthwise layer must not be the final trunk layer, otherwise its
  // output goes straight to the holding buffer; a 1-channel pointwise
  // projection follows it.
  const std::size_t n = 1024, len = 1200;
  std::mt19937 rng(4);
  const auto model = make_model(Shape(n, {len}), {DepthwiseConv{{1}, {1}, 1, uniform(rng, n), uniform(rng, n)},
                                                  PointwiseConv{1, uniform(rng, n), uniform(rng, 1)}});
  const auto x = random_tensor(model.topology.input, rng);
  Arena a;
  const auto rn = execute(model, x, ExecMode::naive(), a);
  const auto rt = execute(model, x, ExecMode::tinyad(3), a);
  const double measured = double(rn.peak_bytes) / double(rt.peak_bytes);
  const DepthwiseCase c{n, 1, len, len, 1};
  const double formula = double(naive_depthwise_elements(c)) / tinyad_depthwise_elements(c, 3);
  o.require(measured >= 5.9 && measured <= 6.0, "measured TinyAD{3} factor outside [5.9, 6.0]");
  o.require(formula >= 5.9 && formula <= 6.0, "closed-form TinyAD{3} factor outside [5.9, 6.0]");
  o.require(max_abs_diff(rn.output, rt.output) <= 1e-5, "outputs differ");
  o.detail << "TinyAD{3} reduction measured " << measured << ", closed form " << formula;
  report(4, o);
}

void criterion5() {
  Outcome o;
  const auto t0 = Clock::now();
  for (const auto& cfg : reference_configs()) {
    const auto model = build_trunk(cfg, 7);
    std::mt19937 rng(5);
    const auto x = random_tensor(model.topology.input, rng);
    Arena a;
    const auto rn = execute(model, x, ExecMode::naive(), a);
    const auto rt = execute(model, x, ExecMode::tinyad(3), a);
    const double r = double(rn.peak_bytes) / double(rt.peak_bytes);
    o.require(r >= 2.0 && r <= 6.0, cfg.name + " ratio outside [2, 6]");
    o.detail << cfg.name << " " << r << " (" << rn.peak_bytes << "/" << rt.peak_bytes << " B); ";
  }
  const double secs = seconds_since(t0);
  o.require(secs <= 10.0, "runtime above 10 s");
  o.detail << secs << " s";
  report(5, o);
}

void criterion6() {
  Outcome o;
  for (const auto& cfg : reference_configs()) {
    const auto model = build_trunk(cfg, 7);
    const auto& dw = model.topology.layers[2];
    const auto& pw = model.topology.layers[3];
    const auto cmp = compare_separable(dw, pw);
    o.require(cmp.param_ratio() >= 0.1 && cmp.param_ratio() <= 0.5, cfg.name + " param ratio");
    o.require(cmp.mac_ratio() >= 0.1 && cmp.mac_ratio() <= 0.5, cfg.name + " MAC ratio");
    // Counter vs formula: executed MACs equal the analytic count.
    std::mt19937 rng(6);
    Arena a;
    const auto r = execute(model, random_tensor(model.topology.input, rng), ExecMode::naive(), a);
    o.require(r.macs == count_macs(model.topology).total, cfg.name + " MAC counter differs from formula");
    std::size_t taps = 1;
    for (auto k : dw.kernel) taps *= k;
    const std::size_t sep_formula = dw.multiplier * dw.in.channels() * (pw.out.channels() + taps);
    o.require(cmp.params_separable == sep_formula, cfg.name + " separable params differ from K·n_i·(n_o + taps)");
    o.detail << cfg.name << " params " << cmp.param_ratio() << " MACs " << cmp.mac_ratio() << "; ";
  }
  report(6, o);
}

void criterion7(const SuiteStats& s) {
  Outcome o;
  o.require(s.overlap_matches == s.overlap_checks, "overlap MACs differ from plan");
  std::mt19937 rng(7);
  const auto model = make_model(Shape(1, {1200}), {RegularConv{{3}, {1}, 32, uniform(rng, 96), uniform(rng, 32)},
                                                   RegularConv{{3}, {1}, 32, uniform(rng, 3072), uniform(rng, 32)}});
  const auto x = random_tensor(model.topology.input, rng);
  Arena a;
  const auto rn = execute(model, x, ExecMode::naive(), a);
  const auto rp = execute(model, x, ExecMode::patch_only(3), a);
  const auto extra = static_cast<std::int64_t>(rp.macs) - static_cast<std::int64_t>(rn.macs);
  const double overhead = double(extra) / double(rn.macs);
  o.require(extra == rp.plan->overlap_macs, "two-layer overlap differs from plan");
  o.require(overhead <= 0.01, "relative overhead above 1%");
  o.detail << s.overlap_matches << "/" << s.overlap_checks << " suite runs exact; 2-conv L=1200 m=3 overhead "
           << extra << " MACs (" << 100.0 * overhead << "%)";
  report(7, o);
}

void criterion8() {
  Outcome o;
  const auto t0 = Clock::now();
  {
    const std::vector<double> c{1, 1, 1, 1};
    const auto t = time_features(c);
    o.require(t.min == 1 && t.mean == 1 && t.rms == 1 && t.var == 0 && t.std == 0 && t.peak == 1 &&
                  t.p2p == 0 && t.crest == 1 && t.form == 1 && t.pulse == 1 && t.skew == 0 && t.kurt == 0,
              "constant window");
    std::vector<double> z(1000);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::sin(2 * std::numbers::pi * double(i) / 100.0);
    const auto s = time_features(z);
    o.require(std::abs(s.rms - std::sqrt(0.5)) <= 1e-3, "sinusoid rms");
    o.require(std::abs(s.mean) <= 1e-3, "sinusoid mean");
    o.require(std::abs(s.kurt - 1.5) <= 1e-2, "sinusoid kurtosis");
    const std::vector<double> dc(8, 2.0);
    const auto p = psd(dc);
    o.require(std::abs(p.s[0] - 32.0) <= 1e-12, "DC periodogram");
  }
  std::mt19937 rng(8);
  std::normal_distribution<double> g(0, 1);
  std::uniform_int_distribution<std::size_t> len(1, 64);
  double worst_parseval = 0, worst_dwt = 0;
  for (int i = 0; i < 1000; ++i) {
    // Lengths are multiples of 8 so every level of the 3-level cascade is even.
    std::vector<double> z(8 * len(rng));
    for (auto& v : z) v = g(rng);
    double e = 0;
    for (double v : z) e += v * v;
    const auto p = psd(z);
    double one_sided = p.s.front() + p.s.back();
    for (std::size_t k = 1; k + 1 < p.s.size(); ++k) one_sided += 2 * p.s[k];
    worst_parseval = std::max(worst_parseval, std::abs(one_sided - e) / e);
    for (auto w : {Wavelet::Db1, Wavelet::Db2}) {
      const auto we = dwt_energy(z, w);
      double parts = we.approx_energy;
      for (double v : we.energy) parts += v;
      const double total = e / double(z.size());
      worst_dwt = std::max(worst_dwt, std::abs(parts - total) / total);
    }
  }
  const double secs = seconds_since(t0);
  o.require(worst_parseval <= 1e-6, "Parseval");
  o.require(worst_dwt <= 1e-6, "DWT energy conservation");
  o.require(secs <= 30.0, "runtime above 30 s");
  o.detail << "closed forms ok; 1000 windows: worst Parseval rel err " << worst_parseval
           << ", worst DWT rel err " << worst_dwt << ", " << secs << " s";
  report(8, o);
}

void criterion9() {
  Outcome o;
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(0, 10);
  std::size_t bad = 0;
  const int profiles = 5000;
  for (int i = 0; i < profiles; ++i) {
    std::vector<Stage> st(1 + i % 24);
    double prep = 0, fwd = 0;
    for (auto& s : st) {
      s.prep = u(rng);
      s.fwd = u(rng);
      prep += s.prep;
      fwd += s.fwd;
    }
    const auto p = profile_stages(st);
    if (p.multi_total() > p.single_total() + 1e-9 || p.multi_total() < std::max(prep, fwd) - 1e-9) ++bad;
  }
  o.require(bad == 0, "random profile violates the envelope");
  struct Row {
    const char* name;
    double prep, fwd;
  };
  const Row rows[] = {{"Yahoo", 56.19, 48.16}, {"SWaT(1)", 49.33, 31.45}, {"SWaT(2)", 29.33, 15.42},
                      {"SWaT(3)", 34.40, 35.70}, {"SKAB", 97.64, 12.14}};
  o.detail << profiles << " random profiles within bounds; savings";
  for (const auto& r : rows) {
    // 11 stages: a 3-patch, 3-layer trunk reloaded per patch plus two tail layers.
    const auto p = profile_stages(uniform_stages(r.prep, r.fwd, 11));
    o.require(p.savings() >= 0.10 && p.savings() <= 0.45, std::string(r.name) + " savings outside [10%, 45%]");
    o.detail << " " << r.name << " " << 100.0 * p.savings() << "%";
  }
  report(9, o);
}

void criterion10(const SuiteStats& s) {
  Outcome o;
  o.require(s.residency_ok == s.runs, "resident parameters exceeded the largest layer");
  // File-backed streams on the reference trunks.
  std::size_t file_runs = 0, file_ok = 0;
  const auto dir = oracle::scratch_dir("acceptance_stream");
  for (const auto& cfg : reference_configs()) {
    const auto model = build_trunk(cfg, 7);
    save_model(model, dir / "m.json");
    std::size_t largest = 0;
    for (const auto& l : model.topology.layers) largest = std::max(largest, l.param_bytes());
    std::mt19937 rng(10);
    const auto x = random_tensor(model.topology.input, rng);
    for (const auto& mode : {ExecMode::naive(), ExecMode::inplace(), ExecMode::patch_only(3), ExecMode::tinyad(3)}) {
      FileLayerStream stream(dir / "m.json");
      std::size_t worst = 0;
      stream.residency().set_hook([&](std::size_t b) { worst = std::max(worst, b); });
      Arena a;
      execute(stream, x, mode, a);
      ++file_runs;
      file_ok += worst <= largest;
    }
  }
  o.require(file_ok == file_runs, "file stream exceeded the largest layer");
  o.detail << s.residency_ok << "/" << s.runs << " suite runs and " << file_ok << "/" << file_runs
           << " file-streamed runs within one layer";
  report(10, o);
}

void criterion11() {
  Outcome o;
  std::mt19937 rng(11);
  std::normal_distribution<double> noise(0, 0.05);
  std::bernoulli_distribution burst(0.004);
  std::ostringstream csv;
  csv << "timestamp,value,label\n";
  int anomaly_left = 0;
  for (std::size_t t = 0; t < 10000; ++t) {
    if (anomaly_left == 0 && burst(rng)) anomaly_left = 8;
    const bool a = anomaly_left > 0;
    if (anomaly_left > 0) --anomaly_left;
    const double v = std::sin(double(t) * 2 * std::numbers::pi / 50.0) + noise(rng) + (a ? 1.5 : 0.0);
    csv << t << ',' << v << ',' << (a ? 1 : 0) << '\n';
  }
  std::istringstream in(csv.str());
  const auto data = parse_csv(in);

  const std::size_t L = 64;
  const auto w = [&](std::size_t n, float a) { return uniform(rng, n, a); };
  const auto model = make_model(Shape(1, {L}), {RegularConv{{3}, {1}, 8, w(24, 0.5f), w(8, 0.1f)}, Relu{},
                                                DepthwiseConv{{3}, {1}, 1, w(24, 0.5f), w(8, 0.1f)},
                                                PointwiseConv{8, w(64, 0.3f), w(8, 0.1f)}, Relu{},
                                                MaxPool{{2}, {2}},
                                                Dense{1, w(8 * 30, 0.05f), w(1, 0.1f)}});
  const auto recipe = InputRecipe::raw(model.topology.input);
  const auto sn = predict_series(model, data, ExecMode::naive(), recipe, ScoreKind::Absolute, worker_count());
  const auto st = predict_series(model, data, ExecMode::tinyad(3), recipe, ScoreKind::Absolute, worker_count());
  const auto rn = detect_from_scores(sn);
  const auto rt = detect_from_scores(st);
  double worst = 0;
  for (std::size_t i = 0; i < sn.score.size(); ++i) worst = std::max(worst, std::abs(sn.score[i] - st.score[i]));
  std::size_t near_tau = 0;
  for (std::size_t i = 0; i < sn.score.size(); ++i)
    if (sn.segment[i] == Segment::Test && std::abs(sn.score[i] - rn.threshold.tau) <= 1e-5) ++near_tau;
  o.require(near_tau == 0, "a test score lies within 1e-5 of the threshold");
  o.require(rn.test.predicted == rt.test.predicted, "predicted labels differ");
  o.require(rn.test.f1 == rt.test.f1, "F1 differs");
  o.detail << data.size() << " samples, " << sn.score.size() << " scores, worst score diff " << worst
           << ", tau " << rn.threshold.tau << ", F1 " << rn.test.f1 << " (naive) / " << rt.test.f1
           << " (TinyAD{3})";
  report(11, o);
}

}  // namespace

// An escaping exception counts as a failure of that criterion.
void guarded(int id, const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    Outcome o;
    o.require(false, std::string("exception: ") + e.what());
    report(id, o);
  }
}

int main() {
  SuiteStats suite;
  bool suite_ok = true;
  try {
    suite = equivalence_suite();
  } catch (const std::exception& e) {
    std::printf("equivalence suite aborted: %s\n", e.what());
    suite_ok = false;
  }
  const auto needs_suite = [&](int id, const std::function<void()>& f) {
    if (suite_ok) {
      guarded(id, f);
    } else {
      Outcome o;
      o.require(false, "equivalence suite aborted");
      report(id, o);
    }
  };
  needs_suite(1, [&] { criterion1(suite); });
  needs_suite(2, [&] { criterion2(suite); });
  guarded(3, criterion3);
  guarded(4, criterion4);
  guarded(5, criterion5);
  guarded(6, criterion6);
  needs_suite(7, [&] { criterion7(suite); });
  guarded(8, criterion8);
  guarded(9, criterion9);
  needs_suite(10, [&] { criterion10(suite); });
  guarded(11, criterion11);
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
