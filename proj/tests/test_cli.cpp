#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "tinyad/fixtures.hpp"
#include "tinyad/tensor_io.hpp"

using namespace tinyad;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "tinyad");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string read(const std::filesystem::path& p) {
  std::ifstream f(p);
  return {std::istreambuf_iterator<char>(f), {}};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = oracle::scratch_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write_model(const ModelSpec& m, const std::string& name = "model.json") {
    save_model(m, path(name));
    return path(name);
  }

  std::string write_series(std::size_t n, const std::string& name = "series.csv") {
    std::mt19937 rng(3);
    std::normal_distribution<double> noise(0, 0.05);
    std::ofstream f(path(name));
    f << "timestamp,value,label\n";
    for (std::size_t t = 0; t < n; ++t) {
      const bool a = t % 97 == 50;
      f << t << ',' << std::sin(double(t) * 0.1) + noise(rng) + (a ? 2.0 : 0.0) << ',' << a << '\n';
    }
    return path(name);
  }

  std::filesystem::path dir_;
};

ModelSpec raw_predictor(std::size_t L) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<float> u(-0.3f, 0.3f);
  auto w = [&](std::size_t n) {
    std::vector<float> v(n);
    for (auto& x : v) x = u(rng);
    return v;
  };
  return make_model(Shape(1, {L}), {RegularConv{{3}, {1}, 4, w(12), w(4)}, Relu{},
                                    DepthwiseConv{{3}, {1}, 1, w(12), w(4)},
                                    PointwiseConv{4, w(16), w(4)}, Relu{},
                                    Dense{1, w(4 * (L - 4)), w(1)}});
}

}  // namespace

TEST_F(CliTest, NoArgumentsIsUsageError) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"bogus"}).code, cli::kUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
}

TEST_F(CliTest, MissingFileIsUsageError) {
  EXPECT_EQ(run({"plan", "--model", path("nope.json")}).code, cli::kUsage);
}

TEST_F(CliTest, PlanPrintsInputFields) {
  const auto m = make_model(Shape(1, {1200}), {RegularConv{{3}, {1}, 1, {1, 1, 1}, {0}},
                                               RegularConv{{3}, {1}, 1, {1, 1, 1}, {0}}});
  const auto r = run({"plan", "--model", write_model(m), "--patches", "3", "--no-timestamp"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("input fields: [0,403),[399,802),[798,1200)"), std::string::npos) << r.out;
  EXPECT_EQ(r.out.find("generated"), std::string::npos);
}

TEST_F(CliTest, PlanRejectsTooManyPatches) {
  const auto m = make_model(Shape(1, {10}), {RegularConv{{3}, {1}, 1, {1, 1, 1}, {0}}});
  EXPECT_EQ(run({"plan", "--model", write_model(m), "--patches", "9"}).code, cli::kDataError);
}

TEST_F(CliTest, MalformedModelIsDataError) {
  std::ofstream(path("bad.json")) << "{\"format_version\":1,";
  const auto r = run({"audit", "--model", path("bad.json")});
  EXPECT_EQ(r.code, cli::kDataError);
  EXPECT_NE(r.err.find("line"), std::string::npos);
}

TEST_F(CliTest, AuditBudgetFailureExitsThree) {
  const auto model = write_model(build_trunk(reference_config("SWaT(2)"), 7));
  const auto fail = run({"audit", "--model", model, "--mode", "naive", "--budget", "64000", "--no-timestamp"});
  EXPECT_EQ(fail.code, cli::kBudget);
  EXPECT_NE(fail.out.find("FAIL"), std::string::npos);
  EXPECT_NE(fail.out.find("dominant layer"), std::string::npos);
  const auto ok = run({"audit", "--model", model, "--mode", "naive", "--budget", "100000000", "--no-timestamp"});
  EXPECT_EQ(ok.code, cli::kOk);
}

TEST_F(CliTest, AuditJsonToStdout) {
  const auto model = write_model(build_trunk(reference_config("SKAB"), 7));
  const auto r = run({"audit", "--model", model, "--json", "-", "--no-timestamp"});
  ASSERT_EQ(r.code, cli::kOk);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["command"], "audit");
  EXPECT_EQ(j["modes"].size(), 4u);
  EXPECT_FALSE(j.contains("generated_at"));
}

TEST_F(CliTest, RunModesAgree) {
  const auto model = write_model(build_trunk(reference_config("SWaT(2)"), 7));
  ASSERT_EQ(run({"run", "--model", model, "--seed", "5", "--mode", "naive", "--output", path("a.json")}).code, 0);
  const auto t = run({"run", "--model", model, "--seed", "5", "--mode", "tinyad", "--patches", "3",
                      "--output", path("b.json"), "--json", "-", "--no-timestamp"});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_LE(max_abs_diff(read_tensor(path("a.json")), read_tensor(path("b.json"))), 1e-5);
  const auto j = nlohmann::json::parse(t.out);
  EXPECT_EQ(j["peak_bytes"], j["analytic_peak_bytes"]);
  const auto n = nlohmann::json::parse(
      run({"run", "--model", model, "--seed", "5", "--mode", "naive", "--json", "-", "--no-timestamp"}).out);
  EXPECT_GE(n["peak_bytes"].get<double>() / j["peak_bytes"].get<double>(), 2.0);
}

TEST_F(CliTest, FixtureWritesLoadableModel) {
  const auto r = run({"fixture", "--name", "SWaT(2)", "--out", path("f.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = parse_model(path("f.json"));
  EXPECT_EQ(serialize_model(m), serialize_model(build_trunk(reference_config("SWaT(2)"), 7)));
  EXPECT_EQ(run({"fixture", "--name", "nope", "--out", path("g.json")}).code, cli::kUsage);
}

TEST_F(CliTest, RunFromInputFile) {
  const auto m = build_trunk(reference_config("SKAB"), 7);
  std::mt19937 rng(4);
  const auto x = random_tensor(m.topology.input, rng);
  write_tensor(x, path("x.json"));
  const auto r = run({"run", "--model", write_model(m), "--input", path("x.json"), "--mode", "inplace",
                      "--output", path("y.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LE(max_abs_diff(read_tensor(path("y.json")), oracle::model(m, x)), 1e-5);
}

TEST_F(CliTest, RunNeedsExactlyOneInputSource) {
  const auto model = write_model(build_trunk(reference_config("SKAB"), 7));
  EXPECT_EQ(run({"run", "--model", model}).code, cli::kUsage);
  std::mt19937 rng(4);
  write_tensor(random_tensor(Shape(1, {4}), rng), path("x.json"));
  EXPECT_EQ(run({"run", "--model", model, "--seed", "1", "--input", path("x.json")}).code, cli::kUsage);
  // Wrong input shape is a data error.
  EXPECT_EQ(run({"run", "--model", model, "--input", path("x.json")}).code, cli::kDataError);
}

TEST_F(CliTest, RunBudgetViolationExitsThree) {
  const auto model = write_model(build_trunk(reference_config("SWaT(2)"), 7));
  const auto r = run({"run", "--model", model, "--seed", "1", "--mode", "naive", "--budget", "64000"});
  EXPECT_EQ(r.code, cli::kBudget);
  EXPECT_NE(r.err.find("budget"), std::string::npos);
}

TEST_F(CliTest, DetectAndEvaluate) {
  const auto model = write_model(raw_predictor(24));
  const auto data = write_series(600);
  const auto d = run({"detect", "--model", model, "--data", data, "--mode", "tinyad", "--scores",
                      path("scores.csv"), "--json", "-", "--no-timestamp", "--threads", "2"});
  ASSERT_EQ(d.code, 0) << d.err;
  const auto dj = nlohmann::json::parse(d.out);
  EXPECT_EQ(dj["scored_points"], 600 - 24);
  const auto e = run({"evaluate", "--scores", path("scores.csv"), "--json", "-", "--no-timestamp"});
  ASSERT_EQ(e.code, 0) << e.err;
  const auto ej = nlohmann::json::parse(e.out);
  EXPECT_EQ(ej["f1"], dj["f1"]);
  EXPECT_EQ(ej["threshold"], dj["threshold"]);
  const auto fixed = run({"evaluate", "--scores", path("scores.csv"), "--threshold", "1e9", "--json", "-"});
  EXPECT_EQ(nlohmann::json::parse(fixed.out)["tp"], 0);
}

TEST_F(CliTest, DetectBadCsvIsDataError) {
  std::ofstream(path("bad.csv")) << "timestamp,value,label\n1,0,0\n1,0,0\n";
  const auto model = write_model(raw_predictor(8));
  const auto r = run({"detect", "--model", model, "--data", path("bad.csv")});
  EXPECT_EQ(r.code, cli::kDataError);
  EXPECT_NE(r.err.find("row 2"), std::string::npos) << r.err;
}

TEST_F(CliTest, FeaturesCsvShape) {
  const auto data = write_series(400);
  const auto r = run({"features", "--data", data, "--window", "200", "--subwindow", "40", "--stride", "8",
                      "--count", "2", "--tensor", path("f.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header.rfind("window,feature,c0,", 0), 0u) << header;
  std::size_t rows = 0;
  for (std::string l; std::getline(lines, l);) rows += !l.empty() && l[0] != '#';
  EXPECT_EQ(rows, 2u * 22);
  EXPECT_EQ(read_tensor(path("f.json")).shape(), Shape(1, {22, 21}));
}

TEST_F(CliTest, SimulateReportsBothRegimes) {
  const auto model = write_model(build_trunk(reference_config("SWaT(2)"), 7));
  const auto r = run({"simulate", "--model", model, "--json", "-", "--gantt", path("g.csv"), "--no-timestamp"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_LE(j["multi_thread_ms"].get<double>(), j["single_thread_ms"].get<double>());
  EXPECT_EQ(j["parameter_reload"], "per-layer");
  EXPECT_EQ(read(path("g.csv")).rfind("layer,resource,start,end\n", 0), 0u);
  EXPECT_EQ(run({"simulate", "--model", model, "--mac-time", "0"}).code, cli::kUsage);
}

TEST_F(CliTest, NoTimestampOutputIsByteIdentical) {
  const auto model = write_model(build_trunk(reference_config("Yahoo"), 7));
  const std::vector<std::vector<std::string>> cmds{
      {"audit", "--model", model, "--no-timestamp"},
      {"plan", "--model", model, "--no-timestamp"},
      {"simulate", "--model", model, "--no-timestamp", "--json", "-"},
      {"run", "--model", model, "--seed", "3", "--no-timestamp"},
  };
  for (const auto& c : cmds) {
    const auto a = run(c), b = run(c);
    EXPECT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
  }
  EXPECT_NE(run({"audit", "--model", model}).out.find("# generated"), std::string::npos);
}
