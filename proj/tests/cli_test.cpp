#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cli.hpp"
#include "test_support.hpp"
#include "unml/csv.hpp"
#include "unml/genlogistic.hpp"

namespace unml::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "unml");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("unml_cli_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_dataset(const std::string& name, const Dataset& d) {
    const auto path = (dir_ / name).string();
    std::ofstream f(path);
    csv::write_dataset(f, d);
    return path;
  }
  std::string write_text(const std::string& name, const std::string& text) {
    const auto path = (dir_ / name).string();
    std::ofstream(path) << text;
    return path;
  }
  fs::path dir_;
};

TEST_F(CliTest, SelectReportsEveryK) {
  const auto in = write_dataset("blobs.csv", test::two_blobs(80, 2, 4.0, 1.0, 3));
  const auto r = invoke({"select", "-i", in, "--k-max", "3", "--restarts", "3", "--seed", "5"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["command"], "select");
  EXPECT_EQ(j["n"], 80);
  EXPECT_EQ(j["m"], 2);
  EXPECT_EQ(j["selected_K"], 2);
  EXPECT_EQ(j["eps1_policy"], "auto");
  ASSERT_EQ(j["entries"].size(), 3u);
  for (const auto& e : j["entries"]) {
    EXPECT_EQ(e["status"], "ok");
    EXPECT_EQ(e["assignment"].size(), 80u);
    for (int label : e["assignment"]) {
      EXPECT_GE(label, 1);
      EXPECT_LE(label, e["K"].get<int>());
    }
  }
}

TEST_F(CliTest, SelectIsByteIdenticalAcrossRunsAndWorkers) {
  const auto in = write_dataset("d.csv", test::random_dataset(60, 2, 9));
  const auto a = invoke({"select", "-i", in, "--seed", "3", "--workers", "1"});
  const auto b = invoke({"select", "-i", in, "--seed", "3", "--workers", "1"});
  const auto c = invoke({"select", "-i", in, "--seed", "3", "--workers", "4"});
  ASSERT_EQ(a.code, kOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
}

TEST_F(CliTest, SelectBitsUnit) {
  const auto in = write_dataset("d.csv", test::random_dataset(30, 1, 2));
  const auto nats = json::parse(invoke({"select", "-i", in, "--k-max", "2"}).out);
  const auto bits = json::parse(invoke({"select", "-i", in, "--k-max", "2", "--unit", "bits"}).out);
  EXPECT_EQ(bits["unit"], "bits");
  for (std::size_t i = 0; i < 2; ++i)
    EXPECT_NEAR(bits["entries"][i]["total"].get<double>(),
                nats["entries"][i]["total"].get<double>() * 1.442695040888963, 1e-9);
  EXPECT_EQ(invoke({"select", "-i", in, "--unit", "bytes"}).code, kInvalidConfig);
}

TEST_F(CliTest, SelectWritesOutputFile) {
  const auto in = write_text("d.csv", "x,y\n0,0\n1,0.5\n0.3,1\n2,2\n-1,0.2\n0.1,-0.4\n");
  const auto out = (dir_ / "report.json").string();
  const auto r = invoke({"select", "-i", in, "--header", "--k-max", "2", "-o", out});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(out);
  const auto j = json::parse(f);
  EXPECT_EQ(j["n"], 6);
}

TEST_F(CliTest, FixedEps1) {
  const auto in = write_dataset("d.csv", test::random_dataset(30, 2, 4));
  const auto r = invoke({"select", "-i", in, "--eps1", "1e-6", "--k-max", "2"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["eps1_policy"], "fixed");
  EXPECT_EQ(j["spec"]["eps1"][0], 1e-6);
  EXPECT_EQ(invoke({"select", "-i", in, "--eps1", "small"}).code, kInvalidConfig);
  EXPECT_EQ(invoke({"select", "-i", in, "--eps1", "0.5", "--eps2", "0.1"}).code, kInvalidConfig);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(invoke({"select", "-i", (dir_ / "missing.csv").string()}).code, kIoError);
  const auto in = write_dataset("d.csv", test::random_dataset(10, 2, 4));
  EXPECT_EQ(invoke({"select", "-i", in, "-o", (dir_ / "no" / "such" / "dir.json").string()}).code, kIoError);
  EXPECT_EQ(invoke({"select", "-i", in, "--k-min", "5", "--k-max", "6"}).code, kInvalidConfig);
  EXPECT_EQ(invoke({"select", "-i", in, "--eps2-cap", "0.5"}).code, kInvalidConfig);
  EXPECT_EQ(invoke({"select", "-i", in, "--margin", "0.5"}).code, kInvalidConfig);
  EXPECT_EQ(invoke({"select"}).code, kInvalidConfig);
  EXPECT_EQ(invoke({}).code, kInvalidConfig);
  EXPECT_EQ(invoke({"frobnicate"}).code, kInvalidConfig);
  EXPECT_EQ(invoke({"--help"}).code, kOk);
  const auto bad = write_text("bad.csv", "1,2\n3,x\n");
  const auto r = invoke({"select", "-i", bad});
  EXPECT_EQ(r.code, kInvalidConfig);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
  const auto flat = write_text("flat.csv", "1,1\n1,1\n1,1\n2,2\n");
  EXPECT_EQ(invoke({"select", "-i", flat, "--k-max", "1"}).code, kNumericalFailure);
}

TEST_F(CliTest, Genlog) {
  const auto x = genlog::sample(200, 2.0, 5);
  std::ostringstream text;
  for (double v : x) text << csv::format_double(v) << "\n";
  const auto in = write_text("x.csv", text.str());
  const auto r = invoke({"genlog", "-i", in, "--theta-min", "0.5", "--theta-max", "8"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["theta_hat"].get<double>(), genlog::mle(x));
  EXPECT_NEAR(j["codelength"].get<double>(), genlog::codelength(x, {0.5, 8.0}), 1e-9);
  EXPECT_EQ(invoke({"genlog", "-i", in, "--theta-min", "5", "--theta-max", "8"}).code, kInvalidConfig);
  EXPECT_EQ(invoke({"genlog", "-i", in, "--theta-min", "5"}).code, kInvalidConfig);
}

TEST_F(CliTest, Verify) {
  const auto r = invoke({"verify", "--m", "1", "--n", "3", "--samples", "100000", "--seed", "1"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_NEAR(j["exact"].get<double>(), 2.001568622037273, 1e-12);
  EXPECT_NEAR(j["quadrature"].get<double>(), 2.001568622037273, 1e-8);
  EXPECT_LT(j["estimate"].get<double>(), j["bound"].get<double>());
  EXPECT_EQ(invoke({"verify", "--samples", "100"}).code, kInvalidConfig);
  EXPECT_EQ(invoke({"verify", "--m", "3", "--n", "5"}).code, kInvalidConfig);
}

TEST_F(CliTest, ScaleCommand) {
  const auto raw = test::random_dataset(40, 2, 8);
  const auto in = write_dataset("d.csv", raw);
  const auto r = invoke({"scale", "-i", in});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto summary = json::parse(r.err);
  EXPECT_TRUE(summary["upper_constraints_met"].get<bool>());
  const double alpha = summary["alpha"];
  std::istringstream scaled(r.out);
  const auto d = csv::read_dataset(scaled);
  EXPECT_EQ(d.rows(), scale_dataset(raw, alpha).rows());
}

}  // namespace
}  // namespace unml::cli
