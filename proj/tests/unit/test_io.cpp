#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kagome/io.hpp"

using namespace kagome;

TEST(Io, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.0, -1.5, 1.0 / 3.0, 6.02214076e23, 1e-300, -2.4721359549995947}) {
    const auto text = format_double(v);
    EXPECT_EQ(std::stod(text), v) << text;
  }
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Io, CsvLayout) {
  CsvTable t;
  t.metadata = {{"seed", "4"}};
  t.header = {"a", "b"};
  t.add_row({"1", "2"});
  EXPECT_EQ(t.render(), "# seed: 4\na,b\n1,2\n");
  EXPECT_EQ(csv_body(t.render()), "a,b\n1,2\n");
  EXPECT_THROW(t.add_row({"1"}), std::exception);
}

TEST(Io, AtomicWriteReplacesContent) {
  const auto dir = std::filesystem::temp_directory_path() / "kagome_io_test";
  std::filesystem::create_directories(dir);
  write_atomic(dir / "x.txt", "first");
  write_atomic(dir / "x.txt", "second");
  std::ifstream in(dir / "x.txt");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), "second");
  EXPECT_FALSE(std::filesystem::exists(dir / "x.txt.tmp"));
  std::filesystem::remove_all(dir);
}

TEST(Io, CheckpointIsBitExact) {
  const auto topo = build_unit_cell();
  const auto state = init_random(PepsConfig::for_photons(2, topo, 4, 17), topo);
  const auto dir = std::filesystem::temp_directory_path() / "kagome_ckpt_test";
  std::filesystem::create_directories(dir);
  save_checkpoint(dir / "c.json", state);
  const auto back = load_checkpoint(dir / "c.json", topo);
  EXPECT_EQ(back.config.seed, state.config.seed);
  EXPECT_EQ(back.config.n_total, 2);
  for (int k = 1; k <= 12; ++k) {
    ASSERT_EQ(back.at(k).dims, state.at(k).dims);
    ASSERT_EQ(back.at(k).data.size(), state.at(k).data.size());
    EXPECT_EQ(std::memcmp(back.at(k).data.data(), state.at(k).data.data(),
                          sizeof(cplx) * state.at(k).data.size()),
              0);
  }
  std::filesystem::remove_all(dir);
}

TEST(Io, PlotIsSvg) {
  const auto svg = line_plot_svg("t", "x", "y", {{"s", {0, 1, 2}, {1, 0, 1}}});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}
