#include "kagome/disorder.hpp"

#include <array>
#include <cmath>
#include <random>

#include "kagome/errors.hpp"

namespace kagome {

void DisorderSpec::validate() const {
  if (!std::isfinite(kappa1) || !std::isfinite(kappa2)) throw ConfigError("disorder interval must be finite");
  if (kappa1 < 0.0) throw ConfigError("disorder interval must be non-negative");
  if (kappa1 > kappa2) throw ConfigError("disorder interval needs kappa1 <= kappa2");
  if (realizations < 1) throw ConfigError("realization count must be >= 1");
}

std::uint64_t realization_seed(const DisorderSpec& spec, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(spec.master_seed), static_cast<std::uint32_t>(spec.master_seed >> 32),
                    static_cast<std::uint32_t>(index), 0x6b61u};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::map<Bond, double> sample_couplings(const DisorderSpec& spec, int index, const KagomeTopology& topology) {
  spec.validate();
  if (index < 0 || index >= spec.realizations) {
    throw ArgumentError("realization index " + std::to_string(index) + " outside 0.." +
                        std::to_string(spec.realizations - 1));
  }
  std::mt19937_64 rng(realization_seed(spec, index));
  std::map<Bond, double> out;
  for (const Bond& b : topology.bonds()) {
    const double u = unit_uniform(rng());
    out[b] = spec.kappa1 == spec.kappa2 ? spec.kappa1 : spec.kappa1 + (spec.kappa2 - spec.kappa1) * u;
  }
  return out;
}

HamiltonianParams disordered_params(const HamiltonianParams& base, const DisorderSpec& spec, int index,
                                    const KagomeTopology& topology) {
  HamiltonianParams p = base;
  p.couplings = sample_couplings(spec, index, topology);
  return p;
}

}  // namespace kagome
