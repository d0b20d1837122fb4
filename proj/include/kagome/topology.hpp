#pragma once

#include <Eigen/Dense>
#include <array>
#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kagome {

inline constexpr int kNumSites = 12;
inline constexpr int kNumBonds = 18;

enum class SiteRole { inner, outer };

/// Unordered site pair, stored with a < b. Sites are 1-based.
struct Bond {
  int a = 0;
  int b = 0;

  friend auto operator<=>(const Bond&, const Bond&) = default;
};

Bond make_bond(int a, int b);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// One failed structural invariant and the sites that witness it.
struct Violation {
  std::string invariant;
  std::vector<int> sites;
};

/// The 12-cavity kagome star: a 12-site ring with chords between
/// consecutive even (inner) sites. Odd sites are outer triangle tips.
class KagomeTopology {
 public:
  KagomeTopology(std::vector<Bond> bonds, std::array<SiteRole, kNumSites> roles,
                 std::array<Point2, kNumSites> coordinates,
                 std::array<int, kNumSites> rotation);

  int num_sites() const { return kNumSites; }
  std::span<const Bond> bonds() const { return bonds_; }
  SiteRole role(int k) const;
  Point2 coordinate(int k) const;

  /// 6-fold symmetry: shifts every site two positions clockwise.
  int rotate(int k, int times = 1) const;

  /// Mirror that fixes sites 1 and 7 (only meaningful for the canonical cell).
  static int reflect(int k);

  int degree(int k) const;
  bool has_bond(int a, int b) const;
  std::optional<std::size_t> bond_index(int a, int b) const;
  std::vector<int> neighbors(int k) const;
  Eigen::MatrixXd adjacency() const;

  /// Every 3-clique of the bond graph, each sorted ascending.
  std::vector<std::array<int, 3>> triangles() const;
  bool connected() const;

  KagomeTopology with_bond(int a, int b) const;
  KagomeTopology without_bond(int a, int b) const;

  /// One "k k'" line per bond.
  std::string edge_list() const;

 private:
  std::vector<Bond> bonds_;
  std::array<SiteRole, kNumSites> roles_;
  std::array<Point2, kNumSites> coordinates_;
  std::array<int, kNumSites> rotation_;
};

KagomeTopology build_unit_cell();

/// Empty iff every structural invariant of the unit cell holds.
std::vector<Violation> validate(const KagomeTopology& topology);

/// True if site k is a valid 1-based site id.
constexpr bool valid_site(int k) { return k >= 1 && k <= kNumSites; }

/// Next site along the 12-site ring (12 wraps to 1).
constexpr int ring_next(int k) { return k % kNumSites + 1; }
constexpr int ring_prev(int k) { return (k + kNumSites - 2) % kNumSites + 1; }

}  // namespace kagome
