#pragma once

#include <cstdint>
#include <map>

#include "kagome/fock.hpp"
#include "kagome/topology.hpp"

namespace kagome {

enum class DisorderDistribution { uniform };

/// Bond-resolved hopping disorder: every bond draws its own kappa from [kappa1, kappa2].
struct DisorderSpec {
  double kappa1 = 0.0;  ///< J
  double kappa2 = 0.0;  ///< J
  std::uint64_t master_seed = 0;
  int realizations = 1;
  DisorderDistribution distribution = DisorderDistribution::uniform;

  void validate() const;
};

/// Seed of realization `index`; a pure function of (master seed, index).
std::uint64_t realization_seed(const DisorderSpec& spec, int index);

/// One coupling per bond, drawn in bond order of `topology`.
std::map<Bond, double> sample_couplings(const DisorderSpec& spec, int index, const KagomeTopology& topology);

/// `base` with its couplings replaced by realization `index`.
HamiltonianParams disordered_params(const HamiltonianParams& base, const DisorderSpec& spec, int index,
                                    const KagomeTopology& topology);

/// Uniform double in [0, 1) from the top 53 bits.
inline double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

}  // namespace kagome
