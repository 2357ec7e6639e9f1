// metrics.hpp - scalar diagnostics of the probe dynamics: effective decay
// rates, the oscillation strength and its threshold map, trace-distance
// Markovianity and steady-state entanglement.

#pragma once

#include "dualprobe/analytic.hpp"
#include "dualprobe/master_equation.hpp"
#include "dualprobe/propagator.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace dualprobe {

// ---------------------------------------------------------------------------
// Effective decay rates
//
// gamma_eff = f(0) / int_0^inf f(t) dt for f = sum of the non-constant terms.
// Terms with frequency >= kOscillationCutoff count as oscillating: Plain mode
// rejects them, Average drops them, and the envelope modes replace the
// cosine/sine by +1 (upper) or -1 (lower) with the coefficient's magnitude.

enum class EffectiveRateMode { Plain, Average, EnvelopeUpper, EnvelopeLower };

inline constexpr double kOscillationCutoff = 0.1;

/// Throws std::invalid_argument when no non-constant terms are left after
/// classification, when Plain mode meets an oscillating term, or when a term
/// does not decay.
double effective_decay_rate(const ExpTermSet& terms, EffectiveRateMode mode);

enum class DecayChannel { Transversal, Longitudinal };

/// Closed forms valid in the strong regime at zero detuning:
///   transversal  (Gamma_1 > 8g, Gamma_phi = 0): 16g^2(g1^2+2g2^2)G1 / (16g^2 g1^2 + (g1^2+4g2^2) G1^2)
///   longitudinal (Gamma_phi > 4g, Gamma_1 = 0): 8g^2(g1^2+4g2^2) / ((g1^2+16g2^2) Gphi)
/// Throws RegimeError outside those conditions.
double effective_rate_strong(const SystemParams& params, const DecoherenceRates& rates, DecayChannel channel);

enum class RateRegime { Weak, Intermediate, Strong };

/// Strong beyond the straight line joining the exact axis thresholds
/// (Gamma_1/8g + Gamma_phi/4g >= 1). Intermediate where an effective rate is
/// a poor description: Gamma_1 >= 2g or Gamma_phi >= g below that line.
RateRegime classify_rate_regime(double g, const DecoherenceRates& rates);

// ---------------------------------------------------------------------------
// Oscillation strength

struct OscillationOptions {
  bool require_settled{true};
  double settle_tolerance{1e-6};
};

/// x(t) = <sz_TLS> - (<sz_Q1> + <sz_Q2>).
std::vector<double> excitation_imbalance(const Trajectory& traj);

/// True when x(t) stays within settle_tolerance * max(1, max|x - x_inf|) of
/// x_inf over the final 10% of the trajectory.
bool imbalance_settled(const Trajectory& traj, double settle_tolerance = 1e-6);

/// M = max(0, max_t x(t) - x_inf), x_inf from the trajectory's asymptote (its
/// last sample when there is none). Throws ConvergenceError for an unsettled
/// trajectory when options.require_settled.
double oscillation_strength(const Trajectory& traj, const OscillationOptions& options = {});

/// log10 of M, or kLogSentinel for M <= 1e-16.
inline constexpr double kLogSentinel = -16.0;
double log_strength(double m);

struct ThresholdPoint {
  double gamma_1;
  double gamma_phi;
};

/// (Gamma_1 = 8g, Gamma_phi = 0) and (Gamma_phi = 4g, Gamma_1 = 0).
std::pair<ThresholdPoint, ThresholdPoint> threshold_points(double g = 1.0);

/// The single-probe transversal threshold Gamma_1 = 8 g1.
double single_probe_threshold(double g1);

/// M for one pair of rates; the map and the crossing search call it per cell.
using StrengthFunction = std::function<double(double gamma_1, double gamma_phi)>;

/// Non-secular Bloch-Redfield strength on the single-excitation subspace
/// (or the full space), propagated until every decaying mode has settled.
StrengthFunction redfield_strength(const SystemParams& params, const StateSpace& space);

struct ThresholdMap {
  std::vector<double> gamma_1;    // columns
  std::vector<double> gamma_phi;  // rows
  std::vector<std::vector<double>> log10_m;  // [row][column]
};

/// Evaluates `strength` on the grid with `threads` workers (results are
/// independent of the thread count).
ThresholdMap threshold_map(const std::vector<double>& gamma_1, const std::vector<double>& gamma_phi,
                           const StrengthFunction& strength, unsigned threads = 1);

/// Below this M counts as zero when locating the threshold.
inline constexpr double kStrengthFloor = 1e-10;

/// Bisection along one axis (the other rate held at zero) for the point where
/// M first falls below kStrengthFloor, starting from the bracket [lo, hi].
/// Throws std::invalid_argument if the bracket does not straddle the floor.
double locate_crossing(const StrengthFunction& strength, DecayChannel axis, double lo, double hi,
                       double tolerance = 1e-4);

/// log10 M drop along the axis row/column of the map: the smallest value with
/// rate <= 0.9 * threshold minus the largest value with rate >= 1.1 * threshold.
double threshold_drop(const ThresholdMap& map, DecayChannel axis, double threshold);

// ---------------------------------------------------------------------------
// Markovianity

struct MarkovianityReport {
  std::vector<double> times;
  std::vector<double> distance;  // D(t) of the reduced two-qubit states (no 1/2)
  /// [t0, t1] intervals on which D increases.
  std::vector<std::pair<double, double>> intervals;
  double delta_d_up{0.0};           // first increase divided by D(0)
  double delta_d_up_absolute{0.0};  // first increase in D units
};

/// |up,down,down> and |down,up,down> on `space`.
std::pair<DensityMatrix, DensityMatrix> markovianity_states(const StateSpace& space);

/// Evolves both states, traces out the TLS and records D(t) on n_points
/// samples over [0, t_max]. Rises smaller than 1e-10 D(0) between samples are
/// treated as flat.
MarkovianityReport markovianity(const Superoperator& gen, const std::pair<DensityMatrix, DensityMatrix>& states,
                                double t_max, std::size_t n_points = 20000);

/// exp(-pi G1 / sqrt(64 g^2 - G1^2)) for G1 < 8g, else 0.
double delta_d_up_closed_form(double g, double gamma_1);

// ---------------------------------------------------------------------------
// Entanglement

/// Wootters concurrence of a two-qubit density matrix.
double concurrence(const DensityMatrix& rho);

/// Entanglement of formation from the concurrence.
double entanglement_of_formation(double concurrence);

struct DarkStateMetrics {
  double concurrence;       // of the dark state, 2 g1 g2 / g^2
  DensityMatrix steady_state;  // two-qubit state left after transversal decay from |up,down,down>
  double steady_concurrence;
  double eof;               // entanglement of formation of steady_state
};

/// Throws std::invalid_argument for g = 0.
DarkStateMetrics dark_state_metrics(double g1, double g2);

struct EofMaximum {
  double ratio;  // g1 / g2
  double eof;
};

/// Maximizes the steady-state entanglement of formation over g1/g2 in (0, max_ratio].
EofMaximum maximize_steady_eof(double max_ratio = 2.0);

}  // namespace dualprobe
