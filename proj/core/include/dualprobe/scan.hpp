// scan.hpp - probe geometry above a sample: couplings as a function of the
// scan position, decay-rate profiles and locating/characterizing one TLS.
//
// The probes sit at height h and move along the line joining them; probe 1 is
// at y - d_qq/2 and probe 2 at y + d_qq/2. A TLS at lateral position tls_y
// couples with g_j = g_ref / d_j^2.

#pragma once

#include "dualprobe/master_equation.hpp"
#include "dualprobe/metrics.hpp"
#include "dualprobe/spectral.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dualprobe {

struct ScanConfig {
  double h{1.0};
  double d_qq{3.0};
  std::vector<double> y_grid;
  double tls_y{0.0};
  double g_ref{1.0};
  DecoherenceRates rates{};
  double omega_q{1000.0};
  double delta{0.0};
  bool single_probe{false};  // only probe 1, located at y (g2 = 0)

  /// Throws std::invalid_argument unless h > 0, d_qq >= 0, g_ref > 0, the grid
  /// is non-empty and strictly increasing, and the rates are valid.
  void validate() const;
};

/// g_j = g_ref / (h^2 + (y -/+ d_qq/2 - tls_y)^2). In single-probe mode the
/// lone probe sits at y and g2 = 0.
std::pair<double, double> coupling_at_position(const ScanConfig& cfg, double y);

/// Copy of cfg with g_ref chosen so the largest single coupling over the grid
/// equals g_max.
ScanConfig normalized(ScanConfig cfg, double g_max);

/// Largest total coupling sqrt(g1^2 + g2^2) over the grid.
double max_total_coupling(const ScanConfig& cfg);

enum class ProfileKind { Coupling, DecayRate };

struct ScanPoint {
  double y{0.0};
  double g1{0.0};
  double g2{0.0};
  double gamma_eff{0.0};  // mean of both probes' rates (probe 1 alone in single-probe mode)
  double gamma_q1{0.0};
  double gamma_q2{0.0};
  bool strong{true};  // the strong-decoherence condition holds here
  std::optional<ExtractionResult> extraction;  // oscillating positions of a characterization scan
  std::optional<DetunedEstimate> detuned;
};

struct ScanProfile {
  ProfileKind kind{ProfileKind::DecayRate};
  bool single_probe{false};
  std::vector<ScanPoint> points;

  std::vector<double> ys() const;
  std::vector<double> gamma_eff() const;
  /// Extracted g where available, NaN elsewhere.
  std::vector<double> extracted_g() const;
};

struct DecayScanOptions {
  /// Flag positions outside the strong regime instead of throwing. Their rate
  /// is the Average-mode value of the simulated trajectory.
  bool allow_mixed{false};
  unsigned threads{1};
};

/// gamma_eff of probe j is the effective decay rate of <sigma_z^Qj> when Qj
/// starts excited and everything else is in the ground state. Closed forms
/// are used where they exist (delta = 0 and a single decoherence channel),
/// otherwise the rate comes from a propagated trajectory.
/// Throws RegimeError when a position is outside the strong regime and
/// options.allow_mixed is false.
ScanProfile scan_decay_profile(const ScanConfig& cfg, const DecayScanOptions& options = {});

/// f(0)/int f of <sigma_z^Q1> - its asymptote, from Redfield propagation on
/// the single-excitation subspace (trapezoid rule). Works in any regime.
double simulated_decay_rate(const SystemParams& params, const DecoherenceRates& rates);

/// Position of the local minimum of g between its two largest maxima, refined
/// by a parabola through the three smallest samples; with a single maximum,
/// the refined maximum. NaN entries are skipped.
/// Throws std::invalid_argument when the feature touches the end of the grid.
double locate_by_coupling_minimum(const std::vector<double>& ys, const std::vector<double>& g);

/// Centroid sum(y v) / sum(v) over the samples with v >= max(v) / 2.
/// Throws std::invalid_argument when those samples include an end of the grid.
double locate_by_centroid(const std::vector<double>& ys, const std::vector<double>& values);

/// Coupling profiles use the minimum of the extracted g; decay profiles use
/// the centroid of gamma_eff.
double locate_tls(const ScanProfile& profile);

/// Adds the non-zero lines of `other` that are not already in `base` (closer
/// than the larger HWHM). Used to combine the spectra of both probes.
PeakSet merge_peak_sets(PeakSet base, const PeakSet& other);

struct CharacterizationOptions {
  std::size_t n_points{8192};  // minimum samples per trajectory
  unsigned threads{1};
  FitOptions fit{};
};

struct TlsReport {
  double y{0.0};
  std::string method;  // "coupling-minimum" or "decay-centroid"
  /// Least-squares g_ref of the 1/d^2 model at the probe height h, given y.
  std::optional<double> g_ref;
  std::optional<double> delta;
  std::optional<double> gamma_1;
  std::optional<double> gamma_phi;
  std::size_t oscillating_positions{0};
  ScanProfile profile;
};

/// Simulates each probe starting excited at every position and extracts what
/// the spectra allow: frequencies from the union of both probes' lines, rates
/// and couplings from whichever probe shows the resonant pattern. When enough
/// positions oscillate to bracket the coupling minimum, the TLS is located
/// from g(y) and delta, Gamma_1, Gamma_phi are taken from
/// the position with the largest g. Otherwise only the position is reported,
/// located from the decay-rate profile.
TlsReport characterize_tls(const ScanConfig& cfg, const CharacterizationOptions& options = {});

}  // namespace dualprobe
