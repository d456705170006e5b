#pragma once

// Von Neumann entropy of reduced states, its growth rate at t = 0 and the
// area-law bound  dS_A/dt|_0 <= c ||H_AE|| ln(min(dimA, dimE)).
//
// Entropies are in nats.

#include "arealaw/dynamics.hpp"
#include "arealaw/linalg.hpp"
#include "arealaw/model.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

namespace arealaw {

/// S = -sum lambda ln lambda over the spectrum, with eigenvalues clipped to
/// [0, 1] and 0 ln 0 = 0.
inline double von_neumann_entropy(const ComplexMatrix& rho) {
  const double tr_dev = std::abs(rho.trace() - Complex{1.0, 0.0});
  if (tr_dev > 1e-8) {
    std::ostringstream os;
    os << "von_neumann_entropy: trace deviates from 1 by " << tr_dev;
    throw std::invalid_argument(os.str());
  }
  const RealVector ev = hermitian_eig(rho, 1e-10).values;
  double s = 0.0;
  for (Index k = 0; k < ev.size(); ++k) {
    const double l = std::clamp(ev(k), 0.0, 1.0);
    if (l > 0.0) s -= l * std::log(l);
  }
  return s;
}

inline double von_neumann_entropy(const DensityMatrix& rho) {
  return von_neumann_entropy(rho.mat);
}

struct RateEstimate {
  double value = 0.0;           // Richardson-extrapolated dS/dt at 0
  double error_estimate = 0.0;  // |D(h) - D(h/2)|
  double step = 0.0;            // h actually used
  bool converged = true;        // error_estimate <= 1e-4
};

/// Default base step; scaled by 1/max(1, ||H||).
inline constexpr double kRateStep = 1e-4;

/// Central differences of S_A over +-h and +-h/2, Richardson-combined.
/// Non-convergence is reported through `converged`, never silently.
inline RateEstimate entanglement_rate_at_zero(const BipartiteSystem& sys,
                                              const InitialState& init,
                                              double base_step = kRateStep) {
  sys.validate();
  init.validate(sys.dim_a, sys.dim_e);
  const ComplexMatrix h = total_hamiltonian(sys);
  const HermitianEigen eig = hermitian_eig(h);
  const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
  const double step = base_step / scale;
  const ComplexMatrix rho0 = init.global_density();

  auto entropy_at = [&](double t) {
    ComplexVector phases(eig.values.size());
    for (Index k = 0; k < eig.values.size(); ++k) phases(k) = std::exp(-kI * eig.values(k) * t);
    const ComplexMatrix u = eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
    return von_neumann_entropy(partial_trace_env(u * rho0 * u.adjoint(), sys.dim_a, sys.dim_e));
  };
  auto central = [&](double hh) { return (entropy_at(hh) - entropy_at(-hh)) / (2.0 * hh); };

  const double d_full = central(step);
  const double d_half = central(step / 2.0);
  RateEstimate r;
  r.value = (4.0 * d_half - d_full) / 3.0;
  r.error_estimate = std::abs(d_full - d_half);
  r.step = step;
  r.converged = r.error_estimate <= 1e-4;
  return r;
}

struct KitaevReport {
  double rate = 0.0;
  double coupling_norm = 0.0;  // ||H_AE||
  double c = 2.0;
  Index delta_dim = 1;         // min(dimA, dimE)
  double bound_rhs = 0.0;      // c ||H_AE|| ln(delta)
  std::optional<double> ratio; // rate / (||H_AE|| ln delta), when defined
  bool satisfied = true;
};

/// Bound check for a given rate. With ln(delta) = 0 (or a vanishing
/// coupling) the bound degenerates to 0 and satisfied requires |rate| <= 1e-8.
inline KitaevReport kitaev_bound_check(double rate, double coupling_norm, Index dim_a,
                                       Index dim_e, double c = 2.0) {
  KitaevReport r;
  r.rate = rate;
  r.coupling_norm = coupling_norm;
  r.c = c;
  r.delta_dim = std::min(dim_a, dim_e);
  const double ln_delta = std::log(static_cast<double>(r.delta_dim));
  r.bound_rhs = c * coupling_norm * ln_delta;
  const double scale = coupling_norm * ln_delta;
  if (ln_delta > 0.0 && scale > 0.0) {
    r.ratio = rate / scale;
    r.satisfied = rate <= r.bound_rhs + 1e-8;
  } else {
    r.satisfied = std::abs(rate) <= 1e-8;
  }
  return r;
}

inline KitaevReport kitaev_bound_report(const BipartiteSystem& sys,
                                        const InitialState& init, double c = 2.0) {
  const RateEstimate rate = entanglement_rate_at_zero(sys, init);
  return kitaev_bound_check(rate.value, operator_norm(sys.h_ae), sys.dim_a, sys.dim_e, c);
}

struct ConstancyReport {
  double max_deviation = 0.0;  // max_t |S_A(t) - S_A(0)|
  bool constant = true;        // max_deviation <= 1e-8
};

inline ConstancyReport constant_entropy_check(const BipartiteSystem& sys,
                                              const InitialState& init,
                                              const TimeGrid& grid) {
  const std::vector<DensityMatrix> states = sweep(sys, init, grid);
  const double s0 = von_neumann_entropy(states.front());
  ConstancyReport r;
  for (const DensityMatrix& rho : states) {
    r.max_deviation = std::max(r.max_deviation, std::abs(von_neumann_entropy(rho) - s0));
  }
  r.constant = r.max_deviation <= 1e-8;
  return r;
}

/// Sampled entropy history together with the t = 0 rate and bound data.
struct EntropyTrace {
  std::vector<double> times;
  std::vector<double> entropy;  // nats
  double rate_at_zero = 0.0;
  double bound_rhs = 0.0;
  double c_constant = 2.0;
  Index delta_dim = 1;
};

inline EntropyTrace entropy_trace(const BipartiteSystem& sys, const InitialState& init,
                                  const TimeGrid& grid, double c = 2.0) {
  EntropyTrace tr;
  tr.times = grid.times;
  for (const DensityMatrix& rho : sweep(sys, init, grid)) {
    tr.entropy.push_back(von_neumann_entropy(rho));
  }
  const KitaevReport k = kitaev_bound_report(sys, init, c);
  tr.rate_at_zero = k.rate;
  tr.bound_rhs = k.bound_rhs;
  tr.c_constant = c;
  tr.delta_dim = k.delta_dim;
  return tr;
}

}  // namespace arealaw
