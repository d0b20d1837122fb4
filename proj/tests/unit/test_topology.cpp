#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <set>

#include "kagome/errors.hpp"
#include "kagome/topology.hpp"

using namespace kagome;

TEST(Topology, CountsAndDegrees) {
  const auto topo = build_unit_cell();
  EXPECT_EQ(topo.bonds().size(), 18u);
  for (int k = 1; k <= 12; ++k) {
    if (k % 2 == 0) {
      EXPECT_EQ(topo.role(k), SiteRole::inner);
      EXPECT_EQ(topo.degree(k), 4);
    } else {
      EXPECT_EQ(topo.role(k), SiteRole::outer);
      EXPECT_EQ(topo.degree(k), 2);
    }
  }
  EXPECT_TRUE(validate(topo).empty());
  EXPECT_TRUE(topo.connected());
}

TEST(Topology, RingAndChords) {
  const auto topo = build_unit_cell();
  for (int k = 1; k <= 12; ++k) EXPECT_TRUE(topo.has_bond(k, ring_next(k)));
  for (int k = 2; k <= 12; k += 2) EXPECT_TRUE(topo.has_bond(k, k % 12 + 2));
  EXPECT_FALSE(topo.has_bond(1, 3));
  EXPECT_FALSE(topo.has_bond(1, 7));
  EXPECT_FALSE(topo.has_bond(2, 8));
}

TEST(Topology, TrianglesHaveOneOuterTip) {
  const auto topo = build_unit_cell();
  const auto tris = topo.triangles();
  ASSERT_EQ(tris.size(), 6u);
  std::set<int> tips;
  for (const auto& t : tris) {
    int outer = 0;
    for (int k : t) {
      if (topo.role(k) == SiteRole::outer) {
        ++outer;
        tips.insert(k);
      }
    }
    EXPECT_EQ(outer, 1);
  }
  EXPECT_EQ(tips.size(), 6u);
}

TEST(Topology, SymmetriesMapBondsToBonds) {
  const auto topo = build_unit_cell();
  for (const auto& b : topo.bonds()) {
    EXPECT_TRUE(topo.has_bond(topo.rotate(b.a), topo.rotate(b.b)));
    EXPECT_TRUE(topo.has_bond(KagomeTopology::reflect(b.a), KagomeTopology::reflect(b.b)));
  }
  EXPECT_EQ(KagomeTopology::reflect(1), 1);
  EXPECT_EQ(KagomeTopology::reflect(7), 7);
  for (int k = 1; k <= 12; ++k) {
    EXPECT_EQ(topo.rotate(k, 6), k);
    EXPECT_EQ(KagomeTopology::reflect(KagomeTopology::reflect(k)), k);
  }
}

TEST(Topology, AdjacencySpectrum) {
  const auto topo = build_unit_cell();
  const Eigen::MatrixXd a = topo.adjacency();
  EXPECT_EQ((a - a.transpose()).norm(), 0.0);
  EXPECT_DOUBLE_EQ(a.sum(), 36.0);
  // Largest eigenvalue of the star: 1 + sqrt(5).
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  EXPECT_NEAR(es.eigenvalues().maxCoeff(), 1.0 + std::sqrt(5.0), 1e-12);
}

TEST(Topology, DetectsBrokenCells) {
  const auto topo = build_unit_cell();
  EXPECT_FALSE(validate(topo.without_bond(2, 4)).empty());
  EXPECT_FALSE(validate(topo.with_bond(1, 7)).empty());
  EXPECT_THROW(make_bond(3, 3), Error);
  EXPECT_THROW(topo.role(13), Error);
}

TEST(Topology, EdgeListHasOneLinePerBond) {
  const auto text = build_unit_cell().edge_list();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 18);
}
