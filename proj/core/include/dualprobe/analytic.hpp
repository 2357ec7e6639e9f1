// analytic.hpp - closed-form expectation values at zero detuning and their
// decomposition into damped exponentials.
//
// Every closed form is available twice: as a direct evaluator (complex
// arithmetic, one code path on both sides of each threshold) and as an
// ExpTermSet, the exact sum of terms c t^p e^{-gamma t} cos|sin(omega t)
// consumed by the effective-rate metrics and by the spectral round trips.

#pragma once

#include "dualprobe/master_equation.hpp"
#include "dualprobe/propagator.hpp"

#include <array>
#include <vector>

namespace dualprobe {

enum class Phase { Cos, Sin };

struct ExpTerm {
  double coefficient{0.0};
  double decay{0.0};      // gamma >= 0
  double frequency{0.0};  // omega >= 0
  Phase phase{Phase::Cos};
  int power{0};           // extra factor t^power (only at exact thresholds)

  double operator()(double t) const;
  bool is_constant() const { return decay == 0.0 && frequency == 0.0 && power == 0; }
};

struct ExpTermSet {
  std::vector<ExpTerm> terms;

  double operator()(double t) const;
  /// Sum of the constant terms (the t -> infinity value when all others decay).
  double constant() const;
  ExpTermSet without_constant() const;
  TimeSeries sample(const std::vector<double>& times) const;
};

/// Q1, Q2 and TLS sigma_z expectation values.
struct ObservableTerms {
  ExpTermSet q1;
  ExpTermSet q2;
  ExpTermSet tls;

  std::array<double, 3> operator()(double t) const { return {q1(t), q2(t), tls(t)}; }
  /// Closed-form trajectory on a uniform grid; the asymptote holds the constants.
  Trajectory sample(double t_max, std::size_t n_points, const StateSpace& space) const;
};

// All closed forms start from |up,down,down> and require delta = 0; a nonzero
// detuning raises RegimeError.

/// Full secular approximation, weak decoherence.
ObservableTerms weak_decoherence_two_qubit(const SystemParams& params, const DecoherenceRates& rates);
/// Purely transversal bath (Gamma_phi = 0), any Gamma_1.
ObservableTerms transversal_two_qubit(const SystemParams& params, double gamma_1);
/// Purely longitudinal bath (Gamma_1 = 0), any Gamma_phi.
ObservableTerms longitudinal_two_qubit(const SystemParams& params, double gamma_phi);
/// Single probe (g2 ignored), weak decoherence. The Q2 set is the constant -1.
ObservableTerms single_qubit_weak(const SystemParams& params, const DecoherenceRates& rates);
/// Single probe, purely transversal bath, any Gamma_1. The Q2 set is -1.
ObservableTerms single_qubit_transversal(const SystemParams& params, double gamma_1);

/// Direct evaluation of the same closed forms at time t.
std::array<double, 3> weak_decoherence_two_qubit_at(const SystemParams& params, const DecoherenceRates& rates,
                                                    double t);
std::array<double, 3> transversal_two_qubit_at(const SystemParams& params, double gamma_1, double t);
std::array<double, 3> longitudinal_two_qubit_at(const SystemParams& params, double gamma_phi, double t);
std::array<double, 3> single_qubit_weak_at(const SystemParams& params, const DecoherenceRates& rates, double t);
std::array<double, 3> single_qubit_transversal_at(const SystemParams& params, double gamma_1, double t);

struct DispersiveParameters {
  double omega_low;         // exact: sqrt(delta^2 + 4 g^2) - |delta|
  double omega_low_taylor;  // 2 g^2 / |delta|
  double gamma_low_taylor;  // g^2 (Gamma_1 + 12 Gamma_phi) / (6 delta^2)
};

/// Requires |delta| > 2g (RegimeError otherwise).
DispersiveParameters dispersive_parameters(const SystemParams& params, const DecoherenceRates& rates);

/// The three oscillation frequencies of the two-probe chain at detuning delta:
/// sqrt(delta^2+4g^2) - delta, sqrt(delta^2+4g^2) + delta, 2 sqrt(delta^2+4g^2).
std::array<double, 3> chain_frequencies(double delta, double g);

/// Single-probe oscillation frequency 2 sqrt(delta^2 + 4 g1^2).
double single_probe_frequency(double delta, double g1);

}  // namespace dualprobe
