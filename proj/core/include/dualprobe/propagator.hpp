// propagator.hpp - time evolution under a constant generator and observables.

#pragma once

#include "dualprobe/master_equation.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace dualprobe {

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const { return times.size(); }
  /// Throws std::invalid_argument unless lengths agree and values are finite.
  void validate() const;
};

/// Long-time limit of a trajectory: the projection of the initial state onto
/// the kernel of the generator. For dissipative dynamics this is the steady
/// state; for undamped oscillations it is the time average.
struct Asymptote {
  DensityMatrix state;
  std::array<double, 3> sz{};  // Q1, Q2, TLS
};

struct Trajectory {
  StateSpace space{SpaceKind::ThreeSpin};
  std::vector<double> times;
  std::vector<DensityMatrix> states;  // lab basis; empty for closed-form trajectories
  TimeSeries sz_q1;
  TimeSeries sz_q2;
  TimeSeries sz_tls;
  std::optional<Asymptote> asymptote;

  std::size_t size() const { return times.size(); }
};

/// Uniform grid of `n_points` samples (n_points >= 2) over [0, t_max];
/// rho(t_k) = exp(G dt)^k rho0 with one matrix exponential.
Trajectory evolve(const Superoperator& gen, const DensityMatrix& rho0, double t_max, std::size_t n_points);

/// Kernel projection of rho0 (see Asymptote).
Asymptote asymptotic_state(const Superoperator& gen, const DensityMatrix& rho0);

/// Re Tr(rho obs). Throws if dimensions disagree, `obs` is not Hermitian, or
/// the imaginary residue exceeds 1e-10.
double expectation(const DensityMatrix& rho, const Operator& obs);

/// Tr sqrt((a - b)^2), i.e. the sum of absolute eigenvalues of a - b. No 1/2
/// prefactor: orthogonal pure states are at distance 2.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

struct TimeGrid {
  double t_max;
  std::size_t n_points;
};

/// t_max = max(20/g, 10/slowest nonzero decay rate of the generator), 4096 points.
TimeGrid default_time_grid(const Superoperator& gen, double g);

}  // namespace dualprobe
