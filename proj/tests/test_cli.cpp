#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "geoctl/cli/bundled.hpp"
#include "geoctl/cli/commands.hpp"

using namespace geoctl;
using namespace geoctl::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const auto d = fs::temp_directory_path() / ("geoctl_cli_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

std::string write_model(const ModelFile& m, const std::string& name) {
  const auto p = scratch_dir() / name;
  std::ofstream(p) << emit_model(m);
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

struct Result {
  int code;
  std::string out, err;
};

Result call(const std::string& cmd, const Options& o) {
  std::ostringstream out, err;
  const int code = run(cmd, o, out, err);
  return {code, out.str(), err.str()};
}

Options on(const std::string& model) {
  Options o;
  o.model = model;
  return o;
}

const std::string& m5_path() {
  static const std::string p = write_model(m5_model(), "m5.json");
  return p;
}

std::vector<std::vector<double>> csv_rows(const std::string& text, std::vector<std::string>* header = nullptr) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (header) *header = cli::detail::split(line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> r;
    for (const auto& c : cli::detail::split(line)) r.push_back(std::stod(c));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST(ModelFile, BundledModelsRoundTrip) {
  for (const auto& m : bundled_models()) {
    const auto back = parse_model(emit_model(m));
    EXPECT_EQ(back, m) << m.name;
    EXPECT_EQ(emit_model(back), emit_model(m));
  }
}

TEST(ModelFile, ShippedFilesMatchBundled) {
  for (const auto& m : bundled_models()) {
    const auto path = fs::path(GEOCTL_SOURCE_DIR) / "models" / (m.name + ".json");
    ASSERT_TRUE(fs::exists(path)) << path;
    EXPECT_EQ(load_model(path.string()), m);
  }
}

TEST(ModelFile, JsonSyntaxErrorPosition) {
  try {
    parse_model("{\n  \"name\": \"a\",\n  \"dimension\": 3,,\n}");
    FAIL();
  } catch (const ModelFileError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 18u);
  }
}

TEST(ModelFile, ExpressionErrorPosition) {
  std::string text = emit_model(m5_model());
  const auto at = text.find("\"x1*x2\"");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 7, "\"x1*)x2\"");
  const std::size_t line = 1 + std::count(text.begin(), text.begin() + at, '\n');
  const std::size_t col = at - text.rfind('\n', at);
  try {
    parse_model(text);
    FAIL();
  } catch (const ModelFileError& e) {
    EXPECT_EQ(e.line(), line);
    EXPECT_GT(e.column(), col);
    EXPECT_LE(e.column(), col + 8);
  }
}

TEST(ModelFile, SemanticChecks) {
  auto m = m5_model();
  m.metric = {"X1", "Q"};
  EXPECT_THROW(parse_model(emit_model(m)), ModelFileError);
  std::string text = emit_model(m5_model());
  text.replace(text.find("\"radius\""), 8, "\"radios\"");
  EXPECT_THROW(parse_model(text), ModelFileError);
}

TEST(Cli, AnalyzeFreeNilpotent) {
  const auto r = call("analyze", on(m5_path()));
  ASSERT_EQ(r.code, ok) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["growth"], Json::array({2, 3, 5}));
  EXPECT_TRUE(j["cartan"].get<bool>());
  EXPECT_TRUE(j["bracket_generating"].get<bool>());
}

TEST(Cli, AnalyzeInvolutive) {
  const auto r = call("analyze", on(write_model(involutive_model(), "inv.json")));
  ASSERT_EQ(r.code, ok);
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["growth"], Json::array({2, 2}));
  EXPECT_FALSE(j["cartan"].get<bool>());
}

TEST(Cli, BadModelIsExitTwo) {
  const auto p = scratch_dir() / "bad.json";
  std::ofstream(p) << "{\"name\": \"x\",\n \"dimension\": }";
  const auto r = call("analyze", on(p.string()));
  EXPECT_EQ(r.code, parse);
  const auto j = Json::parse(r.err);
  EXPECT_EQ(j["line"], 2);
  EXPECT_EQ(call("analyze", on((scratch_dir() / "missing.json").string())).code, parse);
}

TEST(Cli, AbnormalGeodesicIsStraightLine) {
  auto o = on(m5_path());
  o.kind = "abnormal";
  o.covector = "0,0,0,0,1";
  o.step = 0.01;
  const auto r = call("geodesic", o);
  ASSERT_EQ(r.code, ok) << r.err;
  std::vector<std::string> h;
  const auto rows = csv_rows(r.out, &h);
  EXPECT_EQ(h[0], "t");
  EXPECT_EQ(h[1], "x1");
  EXPECT_EQ(h[6], "p_x1");
  ASSERT_GT(rows.size(), 10u);
  for (const auto& row : rows) {
    EXPECT_NEAR(std::abs(row[1]), row[0], 1e-9);
    for (int i = 2; i <= 5; ++i) EXPECT_NEAR(row[i], 0.0, 1e-12);
  }
}

TEST(Cli, AbnormalCovectorPrecondition) {
  auto o = on(m5_path());
  o.kind = "abnormal";
  o.covector = "1,0,0,0,1";
  const auto r = call("geodesic", o);
  EXPECT_EQ(r.code, precondition);
  EXPECT_EQ(Json::parse(r.err)["constraint"], "<p,X1> = 0");
}

TEST(Cli, NormalGeodesicFiles) {
  auto o = on(m5_path());
  o.problem = "normal";
  o.out = (scratch_dir() / "normal").string();
  ASSERT_EQ(call("geodesic", o).code, ok);
  const auto j = Json::parse(slurp(o.out + ".json"));
  EXPECT_LE(j["drift"].get<double>(), 1e-10);
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_EQ(csv_rows(slurp(o.out + ".csv")).size(), j["samples"].get<std::size_t>());
}

TEST(Cli, QuotientAndProlong) {
  auto o = on(m5_path());
  o.keep = "0,1,2";
  auto r = call("quotient", o);
  ASSERT_EQ(r.code, ok) << r.err;
  EXPECT_LE(Json::parse(r.out)["trajectory_residual"].get<double>(), 1e-9);
  r = call("prolong", on(m5_path()));
  ASSERT_EQ(r.code, ok) << r.err;
  EXPECT_EQ(Json::parse(r.out)["rho"], "0");
  EXPECT_EQ(call("prolong", on(write_model(involutive_model(), "inv.json"))).code, degenerate);
}

TEST(Cli, DualityCheck) {
  auto r = call("duality-check", on(m5_path()));
  ASSERT_EQ(r.code, ok) << r.err;
  auto o = on(m5_path());
  o.tol = 1e-16;
  r = call("duality-check", o);
  EXPECT_EQ(r.code, tolerance);
  EXPECT_EQ(call("duality-check", on(write_model(involutive_model(), "inv.json"))).code, degenerate);
}

TEST(Cli, OutputIndependentOfJobs) {
  auto o = on(m5_path());
  o.problem = "steer";
  const auto a = call("steer", o);
  o.jobs = 3;
  const auto b = call("steer", o);
  ASSERT_EQ(a.code, ok) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, UnknownCommand) { EXPECT_EQ(call("frobnicate", Options{}).code, parse); }

TEST(CliBinary, ExitCodes) {
  const std::string bin = GEOCTL_CLI;
  auto status = [&](const std::string& args) {
    const int s = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("analyze --model " + m5_path()), 0);
  EXPECT_EQ(status("analyze --model " + m5_path() + " --no-such-flag"), 2);
  EXPECT_EQ(status("prolong --model " + write_model(involutive_model(), "inv.json")), 3);
  EXPECT_EQ(status("geodesic --model " + m5_path() + " --kind abnormal --covector 1,0,0,0,1"), 4);
}
