#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "kagome/cli.hpp"
#include "kagome/io.hpp"

using namespace kagome;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "kagome");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("kagome_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }
  std::filesystem::path dir_;
};

}  // namespace

TEST(Manifest, DefaultsAndOverrides) {
  const auto m = parse_manifest(R"({"kind": "ed-spectrum", "n": 2})", {"kappa=0.5", "levels=3"});
  EXPECT_EQ(m.config["kappa"], 0.5);
  EXPECT_EQ(m.config["levels"], 3);
  EXPECT_EQ(m.config["omega_d"], 2.0);
  EXPECT_EQ(m.hash().size(), 64u);
  const auto same = parse_manifest(R"({"n": 2, "kind": "ed-spectrum", "kappa": 0.5, "levels": 3})");
  EXPECT_EQ(m.hash(), same.hash());
  const auto moved = parse_manifest(R"({"kind": "ed-spectrum", "n": 2, "kappa": 0.5, "levels": 3, "output": "x"})");
  EXPECT_EQ(m.hash(), moved.hash());
  nlohmann::json j = nlohmann::json::object();
  apply_override(j, "initial.phase=3.14");
  EXPECT_EQ(j["initial"]["phase"], 3.14);
  apply_override(j, "units=si");
  EXPECT_EQ(j["units"], "si");
}

TEST(Manifest, Rejections) {
  EXPECT_THROW(parse_manifest("{not json"), ParseError);
  EXPECT_THROW(parse_manifest(R"({"kind": "nope"})"), ParseError);
  EXPECT_THROW(parse_manifest(R"({"kind": "ed-spectrum"})"), ValidationError);
  EXPECT_THROW(parse_manifest(R"({"kind": "ed-spectrum", "n": 1, "extra": 1})"), ValidationError);
  EXPECT_THROW(parse_manifest(R"({"kind": "ed-spectrum", "n": "two"})"), ValidationError);
  EXPECT_THROW(parse_manifest(R"({"kind": "ed-spectrum", "n": 1, "units": "cgs"})"), ValidationError);
  nlohmann::json j = nlohmann::json::object();
  EXPECT_THROW(apply_override(j, "novalue"), ParseError);
}

TEST(Manifest, UnitConventions) {
  const auto topo = build_unit_cell();
  const auto r = manifest_params(parse_manifest(R"({"kind": "ed-spectrum", "n": 1, "kappa": 0.7})"), topo);
  EXPECT_NEAR(r.coupling(1, 2) / r.energy_unit(), 0.7, 1e-15);
  EXPECT_NEAR(r.omega_d, 2e7, 1e-6);
  const auto si = manifest_params(
      parse_manifest(R"({"kind": "ed-spectrum", "n": 1, "units": "si", "omega_d": 3e7, "kappa": 1e-27})"), topo);
  EXPECT_EQ(si.coupling(1, 2), 1e-27);
  EXPECT_EQ(si.omega_d, 3e7);
  const auto over = manifest_params(
      parse_manifest(R"({"kind": "ed-spectrum", "n": 1, "couplings": [[2, 4, 0.25]]})"), topo);
  EXPECT_NEAR(over.coupling(2, 4) / over.energy_unit(), 0.25, 1e-15);
  EXPECT_THROW(manifest_params(parse_manifest(R"({"kind": "ed-spectrum", "n": 1, "couplings": [[1, 7, 0.25]]})"), topo),
               ValidationError);
}

TEST(Manifest, EveryKindDescribes) {
  for (const auto& kind : manifest_kinds()) {
    EXPECT_NE(describe(kind).find("kind: " + kind), std::string::npos);
  }
  EXPECT_THROW(describe("bogus"), ParseError);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(ErrorKind::parse), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::validation), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::config), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::capacity), 4);
  EXPECT_EQ(exit_code_for(ErrorKind::numerical), 5);
}

TEST_F(CliTest, RunsAndReportsErrors) {
  const auto m = write("ed.json", R"({"kind": "ed-spectrum", "n": 2, "levels": 4})");
  EXPECT_EQ(invoke({"run", "ed-spectrum", "--manifest", m.string(), "--out", (dir_ / "o").string()}), 0);
  const auto csv = slurp(dir_ / "o" / "spectrum.csv");
  EXPECT_NE(csv.find("# config_hash: "), std::string::npos);
  const auto body = csv_body(csv);
  EXPECT_EQ(std::count(body.begin(), body.end(), '\n'), 5);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "o" / "summary.json"));

  EXPECT_EQ(invoke({"run", "dynamics", "--manifest", m.string()}), 3);
  EXPECT_EQ(invoke({"run", "ed-spectrum", "--manifest", write("bad.json", "[").string()}), 2);
  EXPECT_EQ(invoke({"run", "ed-spectrum", "--manifest", m.string(), "--set", "n=9", "--out", dir_.string()}), 4);
  const auto peps = write("p.json", R"({"kind": "peps-optimize", "n": 4})");
  EXPECT_EQ(invoke({"run", "peps-optimize", "--manifest", peps.string(), "--out", dir_.string()}), 4);
  EXPECT_EQ(invoke({"describe", "mu-scan"}), 0);
  EXPECT_EQ(invoke({"describe", "unknown"}), 2);
  EXPECT_EQ(invoke({"frobnicate"}), 2);
}

TEST_F(CliTest, OutputsAreReproducible) {
  const auto m = write("d.json", R"({"kind": "disorder-dynamics", "kappa1": 0.5, "kappa2": 1.5, "realizations": 4,
                                    "t_end": 5, "samples": 26, "seed": 8, "bounds_n": 1})");
  EXPECT_EQ(invoke({"run", "disorder-dynamics", "--manifest", m.string(), "--out", (dir_ / "a").string()}), 0);
  EXPECT_EQ(invoke({"run", "disorder-dynamics", "--manifest", m.string(), "--out", (dir_ / "b").string(), "--jobs", "2"}),
            0);
  for (const char* f : {"ensemble.csv", "midpoint.csv", "bounds.csv"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  EXPECT_EQ(invoke({"run", "disorder-dynamics", "--manifest", m.string(), "--out", (dir_ / "c").string(), "--seed", "9"}),
            0);
  EXPECT_NE(csv_body(slurp(dir_ / "a" / "ensemble.csv")), csv_body(slurp(dir_ / "c" / "ensemble.csv")));
}

TEST_F(CliTest, ScanAndTopologyKinds) {
  const auto scan = write("s.json", R"({"kind": "mu-scan", "start": -2, "stop": 0, "points": 9, "n_max": 3})");
  EXPECT_EQ(invoke({"run", "mu-scan", "--manifest", scan.string(), "--out", (dir_ / "s").string()}), 0);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "s" / "windows.csv"));
  const auto topo = write("t.json", R"({"kind": "topology-export"})");
  EXPECT_EQ(invoke({"run", "topology-export", "--manifest", topo.string(), "--out", (dir_ / "t").string()}), 0);
  const auto edges = slurp(dir_ / "t" / "edges.txt");
  EXPECT_EQ(std::count(edges.begin(), edges.end(), '\n'), 18);
}
