#include "rwl/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <json.hpp>

namespace rwl::cli {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::path(RWL_TEST_TMPDIR) / name;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::vector<std::string> kSmallWeakError = {
    "weak-error", "--n", "2,4", "--paths", "6000", "--batch-size", "1500", "--seed", "5"};

TEST(Cli, CsvLayout) {
  const auto r = run_cli({"lemma1", "--H", "0.3", "--n", "4,8,16", "--alpha", "0.1"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto lines = lines_of(r.out);
  ASSERT_GE(lines.size(), 6u);
  EXPECT_EQ(lines[0], kCsvVersionLine);
  EXPECT_EQ(lines[1].rfind("# config: {", 0), 0u);
  EXPECT_NE(lines[1].find("\"alpha\":0.1"), std::string::npos);
  EXPECT_EQ(lines[2], "alpha,H,n,variant,method,value");
  EXPECT_EQ(lines[3].rfind("0.1,0.3,4,interior,substituted,", 0), 0u);
  EXPECT_EQ(lines[5].rfind("0.1,0.3,16,", 0), 0u);
}

TEST(Cli, JsonLayout) {
  const auto r = run_cli({"gn", "--n", "2,4", "--b", "0,1", "--format", "json"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["format"], "rough-weak-lab v1");
  EXPECT_EQ(doc["subcommand"], "gn");
  EXPECT_TRUE(doc.contains("generated_at"));
  EXPECT_EQ(doc["config"]["H"], 0.25);
  ASSERT_EQ(doc["rows"].size(), 4u);
  EXPECT_EQ(doc["rows"][0]["n"], 2);
  EXPECT_TRUE(doc["rows"][0]["value"].is_number_float());
}

TEST(Cli, ConfigErrorsExitWithCodeTwo) {
  const std::vector<std::vector<std::string>> bad = {
      {"lemma1", "--H", "0.6"},
      {"lemma1", "--n", "8,4"},
      {"lemma1", "--variant", "middle"},
      {"gn", "--b", "1.5"},
      {"weak-error", "--f", "call:1"},
      {"weak-error", "--n", "3,4", "--ref-factor", "1"},
      {"cov", "--N", "0"},
      {"lemma1", "--no-such-flag"},
      {"frobnicate"},
      {"rate", "--in", temp_path("missing.csv").string()},
  };
  for (const auto& args : bad) {
    const auto r = run_cli(args);
    EXPECT_EQ(r.code, kConfigError) << args[0] << " " << (args.size() > 1 ? args[1] : "");
    EXPECT_EQ(r.err.rfind("ERROR:2:", 0), 0u) << r.err;
  }
}

TEST(Cli, QuadratureBudgetExhaustionExitsWithCodeThree) {
  const auto r = run_cli({"lemma1", "--n", "64", "--max-subdivisions", "1", "--rel-tol", "1e-14",
                          "--abs-tol", "1e-16"});
  EXPECT_EQ(r.code, kNumericalError);
  EXPECT_EQ(r.err.rfind("ERROR:3:", 0), 0u) << r.err;
}

TEST(Cli, UndefinedAitkenRateExitsWithCodeFourAfterWritingTable) {
  const auto r = run_cli({"oracle", "--n", "4", "--f", "poly:2"});
  EXPECT_EQ(r.code, kStatisticalError);
  EXPECT_EQ(r.err.rfind("ERROR:4:", 0), 0u) << r.err;
  EXPECT_EQ(lines_of(r.out).at(0), kCsvVersionLine);
}

TEST(Cli, WeakErrorIsReproducible) {
  auto with_threads = [](const char* t) {
    auto args = kSmallWeakError;
    args.insert(args.end(), {"--threads", t});
    return args;
  };
  const auto a = run_cli(with_threads("1"));
  const auto b = run_cli(with_threads("1"));
  const auto c = run_cli(with_threads("3"));
  ASSERT_EQ(a.code, kOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  // The config echo records no thread count, so the whole file matches.
  EXPECT_EQ(a.out, c.out);
  EXPECT_EQ(lines_of(a.out).at(2), "n,estimate,stderr,paths,reference_N,seed");
}

TEST(Cli, OutFileAndRateRoundTrip) {
  const auto csv = temp_path("weak.csv");
  auto args = kSmallWeakError;
  args.insert(args.end(), {"--out", csv.string()});
  const auto w = run_cli(args);
  ASSERT_EQ(w.code, kOk) << w.err;
  EXPECT_TRUE(w.out.empty());
  const auto written = lines_of(read_file(csv));
  std::string fit_line;
  for (const auto& line : written) {
    if (line.rfind("# fit: slope=", 0) == 0) fit_line = line;
  }
  ASSERT_FALSE(fit_line.empty());

  const auto r = run_cli({"rate", "--in", csv.string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto lines = lines_of(r.out);
  ASSERT_GE(lines.size(), 4u);
  EXPECT_EQ(lines[2], "slope,intercept,r_squared,excluded");
  const std::string slope = lines[3].substr(0, lines[3].find(','));
  EXPECT_EQ(fit_line.rfind("# fit: slope=" + slope + ",", 0), 0u) << fit_line;
}

TEST(Cli, RateReportsNoiseFloorFailure) {
  const auto csv = temp_path("noisy.csv");
  {
    std::ofstream out(csv);
    out << kCsvVersionLine << "\n"
        << "n,estimate,stderr,paths,reference_N,seed\n"
        << "2,0.001,0.01,100,16,1\n"
        << "4,0.3,0.01,100,16,1\n";
  }
  const auto r = run_cli({"rate", "--in", csv.string()});
  EXPECT_EQ(r.code, kStatisticalError);
  EXPECT_EQ(r.err.rfind("ERROR:4:", 0), 0u) << r.err;
}

TEST(Cli, ConfigFileFillsUnsetOptions) {
  const auto cfg = temp_path("lemma1.json");
  {
    std::ofstream out(cfg);
    out << R"({"H": 0.1, "n": [4, 8], "alpha": 0.1})";
  }
  const auto from_file = run_cli({"lemma1", "--config", cfg.string()});
  const auto from_flags = run_cli({"lemma1", "--H", "0.1", "--n", "4,8", "--alpha", "0.1"});
  ASSERT_EQ(from_file.code, kOk) << from_file.err;
  const auto a = lines_of(from_file.out);
  const auto b = lines_of(from_flags.out);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 2; k < a.size(); ++k) EXPECT_EQ(a[k], b[k]);

  const auto overridden = run_cli({"lemma1", "--config", cfg.string(), "--H", "0.3"});
  ASSERT_EQ(overridden.code, kOk) << overridden.err;
  EXPECT_EQ(lines_of(overridden.out).at(3).rfind("0.1,0.3,4,", 0), 0u);

  const auto bad = temp_path("bad.json");
  {
    std::ofstream out(bad);
    out << R"({"Hurst": 0.1})";
  }
  EXPECT_EQ(run_cli({"lemma1", "--config", bad.string()}).code, kConfigError);
}

TEST(Cli, CovarianceDump) {
  const auto r = run_cli({"cov", "--N", "3", "--H", "0.2"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto lines = lines_of(r.out);
  EXPECT_EQ(lines.at(2), "row,col,value");
  int rows = 0;
  for (const auto& line : lines) {
    if (!line.empty() && line[0] != '#' && line != "row,col,value") ++rows;
  }
  EXPECT_EQ(rows, 5 * 5);
  EXPECT_EQ(lines.at(3).rfind("0,0,", 0), 0u);
}

}  // namespace
}  // namespace rwl::cli
