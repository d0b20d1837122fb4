#include "kagome/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>

#include "kagome/errors.hpp"

namespace kagome {

namespace {

void check_site(int k) {
  if (!valid_site(k)) {
    throw ArgumentError("site " + std::to_string(k) + " outside 1..12");
  }
}

// Single replaceable table of the cell's bonds: ring plus inner hexagon.
std::vector<Bond> canonical_bonds() {
  std::vector<Bond> bonds;
  for (int k = 1; k <= kNumSites; ++k) bonds.push_back(make_bond(k, ring_next(k)));
  for (int k = 2; k <= kNumSites; k += 2) bonds.push_back(make_bond(k, (k + 1) % kNumSites + 1));
  return bonds;
}

}  // namespace

Bond make_bond(int a, int b) {
  check_site(a);
  check_site(b);
  if (a == b) throw ArgumentError("self-bond at site " + std::to_string(a));
  return a < b ? Bond{a, b} : Bond{b, a};
}

KagomeTopology::KagomeTopology(std::vector<Bond> bonds, std::array<SiteRole, kNumSites> roles,
                               std::array<Point2, kNumSites> coordinates,
                               std::array<int, kNumSites> rotation)
    : bonds_(std::move(bonds)),
      roles_(roles),
      coordinates_(coordinates),
      rotation_(rotation) {
  for (const Bond& b : bonds_) make_bond(b.a, b.b);
  for (int r : rotation_) check_site(r);
}

SiteRole KagomeTopology::role(int k) const {
  check_site(k);
  return roles_[k - 1];
}

Point2 KagomeTopology::coordinate(int k) const {
  check_site(k);
  return coordinates_[k - 1];
}

int KagomeTopology::rotate(int k, int times) const {
  check_site(k);
  for (int t = 0; t < times; ++t) k = rotation_[k - 1];
  return k;
}

int KagomeTopology::reflect(int k) {
  check_site(k);
  return (13 - k) % kNumSites + 1;
}

int KagomeTopology::degree(int k) const {
  check_site(k);
  return static_cast<int>(std::count_if(bonds_.begin(), bonds_.end(),
                                        [k](const Bond& b) { return b.a == k || b.b == k; }));
}

bool KagomeTopology::has_bond(int a, int b) const { return bond_index(a, b).has_value(); }

std::optional<std::size_t> KagomeTopology::bond_index(int a, int b) const {
  if (a == b || !valid_site(a) || !valid_site(b)) return std::nullopt;
  const Bond key = make_bond(a, b);
  auto it = std::find(bonds_.begin(), bonds_.end(), key);
  if (it == bonds_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - bonds_.begin());
}

std::vector<int> KagomeTopology::neighbors(int k) const {
  check_site(k);
  std::vector<int> out;
  for (const Bond& b : bonds_) {
    if (b.a == k) out.push_back(b.b);
    if (b.b == k) out.push_back(b.a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Eigen::MatrixXd KagomeTopology::adjacency() const {
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(kNumSites, kNumSites);
  for (const Bond& b : bonds_) {
    adj(b.a - 1, b.b - 1) = 1.0;
    adj(b.b - 1, b.a - 1) = 1.0;
  }
  return adj;
}

std::vector<std::array<int, 3>> KagomeTopology::triangles() const {
  std::vector<std::array<int, 3>> out;
  for (int i = 1; i <= kNumSites; ++i)
    for (int j = i + 1; j <= kNumSites; ++j)
      for (int k = j + 1; k <= kNumSites; ++k)
        if (has_bond(i, j) && has_bond(j, k) && has_bond(i, k)) out.push_back({i, j, k});
  return out;
}

bool KagomeTopology::connected() const {
  std::array<bool, kNumSites> seen{};
  std::queue<int> frontier;
  frontier.push(1);
  seen[0] = true;
  int count = 1;
  while (!frontier.empty()) {
    const int k = frontier.front();
    frontier.pop();
    for (int n : neighbors(k)) {
      if (!seen[n - 1]) {
        seen[n - 1] = true;
        ++count;
        frontier.push(n);
      }
    }
  }
  return count == kNumSites;
}

KagomeTopology KagomeTopology::with_bond(int a, int b) const {
  std::vector<Bond> bonds = bonds_;
  if (!has_bond(a, b)) bonds.push_back(make_bond(a, b));
  return KagomeTopology(std::move(bonds), roles_, coordinates_, rotation_);
}

KagomeTopology KagomeTopology::without_bond(int a, int b) const {
  std::vector<Bond> bonds = bonds_;
  const Bond key = make_bond(a, b);
  std::erase(bonds, key);
  return KagomeTopology(std::move(bonds), roles_, coordinates_, rotation_);
}

std::string KagomeTopology::edge_list() const {
  std::ostringstream out;
  for (const Bond& b : bonds_) out << b.a << ' ' << b.b << '\n';
  return out.str();
}

KagomeTopology build_unit_cell() {
  std::array<SiteRole, kNumSites> roles{};
  std::array<Point2, kNumSites> coords{};
  std::array<int, kNumSites> rotation{};
  // Inner sites on the unit hexagon, outer tips at radius sqrt(3); site 1 on
  // top, numbering runs clockwise.
  for (int k = 1; k <= kNumSites; ++k) {
    const bool outer = (k % 2) == 1;
    roles[k - 1] = outer ? SiteRole::outer : SiteRole::inner;
    const double angle = std::numbers::pi / 2.0 - (k - 1) * std::numbers::pi / 6.0;
    const double radius = outer ? std::numbers::sqrt3 : 1.0;
    coords[k - 1] = {radius * std::cos(angle), radius * std::sin(angle)};
    rotation[k - 1] = (k + 1) % kNumSites + 1;
  }
  return KagomeTopology(canonical_bonds(), roles, coords, rotation);
}

std::vector<Violation> validate(const KagomeTopology& topology) {
  std::vector<Violation> out;

  std::vector<int> bad_roles;
  for (int k = 1; k <= kNumSites; ++k) {
    const SiteRole expected = (k % 2 == 0) ? SiteRole::inner : SiteRole::outer;
    if (topology.role(k) != expected) bad_roles.push_back(k);
  }
  if (!bad_roles.empty()) out.push_back({"role: inner sites are even, outer sites odd", bad_roles});

  std::vector<int> bad_degree;
  for (int k = 1; k <= kNumSites; ++k) {
    const int want = topology.role(k) == SiteRole::outer ? 2 : 4;
    if (topology.degree(k) != want) bad_degree.push_back(k);
  }
  if (!bad_degree.empty()) out.push_back({"degree: outer sites 2, inner sites 4", bad_degree});

  const auto triangles = topology.triangles();
  bool triangle_ok = triangles.size() == 6;
  std::vector<int> triangle_sites;
  for (const auto& t : triangles) {
    const auto outers = std::count_if(t.begin(), t.end(), [&](int k) {
      return topology.role(k) == SiteRole::outer;
    });
    if (outers != 1) {
      triangle_ok = false;
      triangle_sites.insert(triangle_sites.end(), t.begin(), t.end());
    }
  }
  if (!triangle_ok) {
    out.push_back({"triangle-count: exactly 6 triangles of one outer and two inner sites (found " +
                       std::to_string(triangles.size()) + ")",
                   triangle_sites});
  }

  if (!topology.connected()) out.push_back({"connected", {}});

  std::vector<int> bad_rotation;
  for (const Bond& b : topology.bonds()) {
    if (!topology.has_bond(topology.rotate(b.a), topology.rotate(b.b))) {
      bad_rotation.push_back(b.a);
      bad_rotation.push_back(b.b);
    }
  }
  for (int k = 1; k <= kNumSites; ++k) {
    if (topology.role(topology.rotate(k)) != topology.role(k)) bad_rotation.push_back(k);
    if (topology.rotate(k, 6) != k) bad_rotation.push_back(k);
  }
  if (topology.rotate(1, 3) != 7) bad_rotation.push_back(1);
  if (!bad_rotation.empty()) {
    std::sort(bad_rotation.begin(), bad_rotation.end());
    bad_rotation.erase(std::unique(bad_rotation.begin(), bad_rotation.end()), bad_rotation.end());
    out.push_back({"rotation: 6-fold symmetry maps bonds to bonds and preserves roles", bad_rotation});
  }
  return out;
}

}  // namespace kagome
