#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "coopdiss/model.hpp"

namespace fixture {

using coopdiss::Complex;

/// N qubits sharing one collective channel with equal weights.
inline coopdiss::SystemSpec collective_qubits(std::size_t n, double kappa, std::vector<double> detunings = {},
                                              coopdiss::Frame frame = {}) {
  auto spec = coopdiss::qubit_chain(n, 1.0, std::move(detunings));
  spec.collective_channels.push_back({kappa, std::vector<Complex>(n, 1.0), {}});
  spec.frame = frame;
  return spec;
}

inline void add_local_decay(coopdiss::SystemSpec& spec, double alpha) {
  for (std::size_t j = 0; j < spec.emitters.size(); ++j) spec.local_channels.push_back({alpha, j, {}});
}

inline coopdiss::StateVector ket(const std::string& label, const coopdiss::DimsLayout& layout) {
  return coopdiss::build_state_vector(coopdiss::StateSpec::named(label), layout);
}

inline coopdiss::ComplexMatrix dm(const std::string& label, const coopdiss::DimsLayout& layout) {
  return coopdiss::ComplexMatrix::projector(ket(label, layout));
}

inline coopdiss::ComplexMatrix rho2_inf() {
  const coopdiss::DimsLayout l({2, 2});
  return 0.5 * (dm("psi_minus", l) + dm("00", l));
}

inline coopdiss::ComplexMatrix rho3_inf() {
  const coopdiss::DimsLayout l({2, 2, 2});
  return (1.0 / 3.0) * (2.0 * dm("psi2", l) + dm("000", l));
}

/// Two qubits with random detunings, a phased collective channel, local decay
/// and a weak drive; every rate and amplitude at most 0.1.
inline coopdiss::SystemSpec random_two_qubit(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto spec = coopdiss::qubit_chain(2, 1.0, {0.2 * u(rng) - 0.1, 0.2 * u(rng) - 0.1});
  spec.collective_channels.push_back(
      {0.1 * u(rng), {1.0, std::polar(1.0, 2 * M_PI * u(rng))}, {}});
  for (std::size_t j = 0; j < 2; ++j) spec.local_channels.push_back({0.1 * u(rng), j, {}});
  spec.drives.push_back({0.1 * u(rng), static_cast<std::size_t>(u(rng) * 2), {}, 0.0});
  return spec;
}

constexpr coopdiss::Frame lab{coopdiss::Frame::Kind::Lab, 1.0};

}  // namespace fixture
