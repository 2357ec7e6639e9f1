// spectral.hpp - one-sided Fourier analysis, Lorentzian peak fitting and
// recovery of the chain parameters from a probe spectrum.
//
// The real part of the one-sided transform of c e^{-at} cos(bt) is
//   c a / (2 (a^2 + (w - b)^2)) + c a / (2 (a^2 + (w + b)^2)),
// so every damped cosine in a trajectory shows up as a Lorentzian whose
// position is its frequency and whose HWHM is its decay rate.

#pragma once

#include "dualprobe/errors.hpp"
#include "dualprobe/propagator.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace dualprobe {

struct Spectrum {
  std::vector<double> omegas;
  std::vector<double> values;  // Re of the one-sided transform
  double baseline{0.0};        // constant removed before transforming
  double tail_offset{0.0};     // max |x - baseline| over the final 10% of samples
  bool settled{true};          // tail_offset below 1e-4

  std::size_t size() const { return omegas.size(); }
};

/// n points evenly spaced over [lo, hi].
std::vector<double> linear_grid(double lo, double hi, std::size_t n);

/// 4096 points over [0, 8 g].
std::vector<double> default_frequency_grid(double g = 1.0);

/// Trapezoidal quadrature with high-order endpoint corrections after removing
/// `baseline` (defaults to the final sample). Throws std::invalid_argument for
/// non-uniform or too short series.
Spectrum one_sided_fourier(const TimeSeries& series, const std::vector<double>& omegas,
                           std::optional<double> baseline = std::nullopt);

/// Closed-form transform of c e^{-at} cos(bt).
double lorentzian_pair(double omega, double position, double hwhm, double weight = 1.0);

/// Closed-form transform of s e^{-at} sin(bt): the antisymmetric (dispersive)
/// companion of lorentzian_pair. Damped modes of a non-secular generator carry
/// both quadratures, so fit_peaks fits both.
double dispersive_pair(double omega, double position, double hwhm, double weight = 1.0);

struct Peak {
  double position{0.0};  // b >= 0
  double hwhm{0.0};      // a > 0
  double weight{0.0};    // c, the amplitude of the time-domain cosine
  double quadrature{0.0};  // s, amplitude of the accompanying e^{-at} sin(bt)
  double position_sigma{0.0};
  double hwhm_sigma{0.0};
  double weight_sigma{0.0};

  double height() const;  // Lorentzian part at omega = position
  double operator()(double omega) const;
};

enum class Regime { Oscillating, Decaying };

struct PeakSet {
  std::vector<Peak> peaks;  // ascending position
  double residual{0.0};     // rms misfit relative to the spectrum maximum
  int iterations{0};
  Regime regime{Regime::Decaying};  // Oscillating if any peak sits away from zero
};

/// Fit failed to converge; carries the best parameters found.
class FitError : public ConvergenceError {
 public:
  FitError(const std::string& what, PeakSet best) : ConvergenceError(what), best_(std::move(best)) {}
  const PeakSet& best() const { return best_; }

 private:
  PeakSet best_;
};

struct FitOptions {
  std::size_t max_peaks{6};
  double seed_floor{1e-3};  // maxima whose prominence is below this fraction of the global maximum are ignored
  int max_iterations{200};
};

/// Seeds one peak per sufficiently prominent local maximum (and per negative
/// local minimum, for cosines of negative amplitude) and refines all of
/// them jointly by Levenberg-Marquardt. A maximum at omega = 0 is fitted as a
/// pure decay (position pinned to zero, no sine quadrature). A flat spectrum
/// returns an empty set.
PeakSet fit_peaks(const Spectrum& spectrum, const FitOptions& options = {});

/// A peak counts as zero-frequency when its position is below half its width.
bool is_zero_frequency(const Peak& peak);

struct ExtractionResult {
  double g{0.0};
  double delta{0.0};
  double gamma_1{0.0};
  double gamma_phi{0.0};
  double g1{0.0};
  double g2{0.0};
  /// (g1, g2) pairs compatible with the peak weights; one entry when the
  /// weights single out the assignment, two (swapped) otherwise.
  std::vector<std::pair<double, double>> candidates;
  double residual{0.0};
  Regime regime{Regime::Oscillating};
  /// Relative disagreement between g from the top peak and from the middle one.
  double g_consistency{0.0};
};

/// Resonant spectrum of the first probe: peaks at 0, 2g and 4g.
/// Throws RegimeError when the peak pattern does not match.
ExtractionResult extract_on_resonance(const PeakSet& peaks);

struct DetunedEstimate {
  double g{0.0};
  double delta{0.0};  // |delta|; the sign is not visible in the spectrum
  std::vector<double> frequencies;  // resolved oscillation frequencies used
  bool third_checked{false};
};

/// g and |delta| from two or three of the frequencies
/// sqrt(delta^2+4g^2) -+ delta and 2 sqrt(delta^2+4g^2).
/// Throws RegimeError if fewer than two are resolved or the triple is inconsistent.
DetunedEstimate extract_detuned(const PeakSet& peaks);

}  // namespace dualprobe
