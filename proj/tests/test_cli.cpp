#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(COMPART_H2_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) out += buf.data();
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string fixture(const std::string& name) {
  return std::string(COMPART_H2_FIXTURE_DIR) + "/" + name;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "compart_h2_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Cli, SynthesizeSipmWritesReport) {
  const fs::path out = scratch("sipm.json");
  const CliRun r = run("synthesize --plant " + fixture("fourroom.json") + " --method sipm --k0 file:" +
                    fixture("fourroom_k0.json") + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = read_json(out);
  EXPECT_EQ(j["method"], "sipm");
  EXPECT_TRUE(j["converged"].get<bool>());
  EXPECT_NEAR(j["J"].get<double>(), 26.7744, 1e-3);
  ASSERT_EQ(j["trace"].size(), 11u);
  EXPECT_EQ(j["trace"][10]["t"].get<double>(), 1048576.0);
  EXPECT_EQ(j["K"].size(), 2u);
  EXPECT_EQ(j["K"][0].size(), 4u);
  for (const char* key : {"stationarity", "dual_feasibility", "primal_feasibility", "complementarity"}) {
    EXPECT_TRUE(j["kkt"].contains(key)) << key;
  }
}

TEST(Cli, RankOneStartMatchesFileStart) {
  const fs::path a = scratch("rank1.json");
  const fs::path b = scratch("file.json");
  ASSERT_EQ(run("synthesize --plant " + fixture("fourroom.json") + " --k0 rank1:" +
                fixture("fourroom_v.json") + " --out " + a.string()).code, 0);
  ASSERT_EQ(run("synthesize --plant " + fixture("fourroom.json") + " --k0 file:" +
                fixture("fourroom_k0.json") + " --out " + b.string()).code, 0);
  EXPECT_EQ(read_json(a)["K"], read_json(b)["K"]);
}

TEST(Cli, SynthesizeThenVerifyRoundTrip) {
  const fs::path out = scratch("roundtrip.json");
  ASSERT_EQ(run("synthesize --plant " + fixture("fourroom.json") + " --k0 file:" +
                fixture("fourroom_k0.json") + " --out " + out.string()).code, 0);
  const double j_report = read_json(out)["J"].get<double>();
  const CliRun v = run("verify --plant " + fixture("fourroom.json") + " --gain " + out.string());
  ASSERT_EQ(v.code, 0) << v.out;
  const auto pos = v.out.find("\nJ: ");
  ASSERT_NE(pos, std::string::npos) << v.out;
  const double j_verify = std::stod(v.out.substr(pos + 4));
  EXPECT_LE(std::abs(j_verify - j_report), 1e-10 * j_report);
}

TEST(Cli, MissingRequiredPlant) {
  const CliRun r = run("synthesize --k0 file:" + fixture("fourroom_k0.json"));
  EXPECT_EQ(r.code, 1) << r.out;
}

TEST(Cli, UnreadableAndMalformedInputs) {
  EXPECT_EQ(run("verify --plant /nonexistent/plant.json --gain " + fixture("zero_gain.json")).code, 1);
  const fs::path junk = scratch("junk.json");
  std::ofstream(junk) << "{ not json";
  const CliRun r = run("verify --plant " + junk.string() + " --gain " + fixture("zero_gain.json"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("error"), std::string::npos) << r.out;
}

TEST(Cli, VerifyReferenceOptimum) {
  const CliRun r = run("verify --plant " + fixture("fourroom.json") + " --gain " + fixture("fourroom_kf.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("schur: true"), std::string::npos);
  EXPECT_NE(r.out.find("compartmental: true"), std::string::npos);
  const auto pos = r.out.find("\nJ: ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_NEAR(std::stod(r.out.substr(pos + 4)), 26.7744, 1e-3);
}

TEST(Cli, VerifyZeroGain) {
  const CliRun r = run("verify --plant " + fixture("fourroom.json") + " --gain " + fixture("zero_gain.json"));
  EXPECT_EQ(r.code, 1);  // unit column sums: spectral radius 1
  EXPECT_NE(r.out.find("strictly feasible: false"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("schur: false"), std::string::npos) << r.out;
}

TEST(Cli, GradCheck) {
  const CliRun r = run("grad-check --plant " + fixture("fourroom.json") + " --gain " + fixture("fourroom_k0.json"));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("grad_J"), std::string::npos);
  EXPECT_NE(r.out.find("hessian_J"), std::string::npos);
}

TEST(Cli, InitReportsUnactuatedFailure) {
  const CliRun r = run("init --plant " + fixture("unactuated.json"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("phase-I failed"), std::string::npos) << r.out;
}

TEST(Cli, InitFromInteriorToy) {
  const fs::path out = scratch("toy_init.json");
  const CliRun r = run("init --plant " + fixture("toy.json") + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_GE(read_json(out)["min_slack"].get<double>(), 1e-3);
}

TEST(Cli, BenchScaleBlockDiagSingleCopy) {
  const fs::path out = scratch("bench.csv");
  const CliRun r = run("bench-scale --plant " + fixture("fourroom.json") + " --k0 file:" +
                    fixture("fourroom_k0.json") + " --nmax 1 --mode blockdiag --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  std::istringstream csv(slurp(out));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "N,method,seconds,J,outer_iters,total_inner_iters,final_grad_norm");
  int rows = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    ++rows;
    std::istringstream cells(line);
    std::string n, method, secs, j;
    std::getline(cells, n, ',');
    std::getline(cells, method, ',');
    std::getline(cells, secs, ',');
    std::getline(cells, j, ',');
    EXPECT_EQ(n, "1");
    EXPECT_NEAR(std::stod(j), 26.7744, 1e-3) << method;
  }
  EXPECT_EQ(rows, 2);
  const std::string status = slurp(out.parent_path() / "bench.status.csv");
  EXPECT_EQ(status.rfind("N,method,status,message", 0), 0u);
  EXPECT_TRUE(fs::exists(out.parent_path() / "bench_N1_sipm_trace.csv"));
}

}  // namespace
