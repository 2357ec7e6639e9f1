#include "dualprobe/scan.hpp"

#include "dualprobe/analytic.hpp"
#include "dualprobe/errors.hpp"
#include "dualprobe/propagator.hpp"
#include "dualprobe/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dualprobe {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SystemParams params_at(const ScanConfig& cfg, double y) {
  const auto [g1, g2] = coupling_at_position(cfg, y);
  return {cfg.omega_q, cfg.delta, g1, g2};
}

SystemParams swapped(SystemParams p) {
  std::swap(p.g1, p.g2);
  return p;
}

bool has_closed_form(const ScanConfig& cfg) {
  return cfg.delta == 0.0 && (cfg.rates.gamma_1 == 0.0 || cfg.rates.gamma_phi == 0.0);
}

double trapezoid_rate(const TimeSeries& s, double baseline) {
  double area = 0.0;
  for (std::size_t k = 1; k < s.size(); ++k)
    area += 0.5 * (s.times[k] - s.times[k - 1]) * (s.values[k] + s.values[k - 1] - 2.0 * baseline);
  return (s.values.front() - baseline) / area;
}

// Rate of probe 1 for these couplings.
double probe_rate(const ScanConfig& cfg, const SystemParams& params, bool strong) {
  if (params.g() == 0.0) return 0.0;
  if (!has_closed_form(cfg)) return simulated_decay_rate(params, cfg.rates);
  const auto channel = cfg.rates.gamma_phi == 0.0 ? DecayChannel::Transversal : DecayChannel::Longitudinal;
  if (strong) return effective_rate_strong(params, cfg.rates, channel);
  const auto terms = channel == DecayChannel::Transversal ? transversal_two_qubit(params, cfg.rates.gamma_1)
                                                          : longitudinal_two_qubit(params, cfg.rates.gamma_phi);
  return effective_decay_rate(terms.q1, EffectiveRateMode::Average);
}

// Vertex of the parabola through three samples, kept inside their span.
double parabola_vertex(double x0, double f0, double x1, double f1, double x2, double f2) {
  const double d01 = (f1 - f0) / (x1 - x0), d12 = (f2 - f1) / (x2 - x1);
  const double curvature = (d12 - d01) / (x2 - x0);
  if (curvature == 0.0) return x1;
  // derivative of the Newton form: d01 + curvature (2x - x0 - x1) = 0
  return std::clamp(0.5 * (x0 + x1) - d01 / (2.0 * curvature), x0, x2);
}

}  // namespace

void ScanConfig::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("ScanConfig: h must be positive");
  if (!(d_qq >= 0.0) || !std::isfinite(d_qq)) throw std::invalid_argument("ScanConfig: d_qq must be non-negative");
  if (!(g_ref > 0.0) || !std::isfinite(g_ref)) throw std::invalid_argument("ScanConfig: g_ref must be positive");
  if (!std::isfinite(tls_y) || !std::isfinite(delta)) throw std::invalid_argument("ScanConfig: non-finite position");
  if (!(omega_q > 0.0)) throw std::invalid_argument("ScanConfig: omega_q must be positive");
  if (y_grid.empty()) throw std::invalid_argument("ScanConfig: empty y grid");
  for (std::size_t k = 0; k < y_grid.size(); ++k) {
    if (!std::isfinite(y_grid[k])) throw std::invalid_argument("ScanConfig: non-finite grid point");
    if (k > 0 && !(y_grid[k] > y_grid[k - 1])) throw std::invalid_argument("ScanConfig: y grid must increase");
  }
  rates.validate();
}

std::pair<double, double> coupling_at_position(const ScanConfig& cfg, double y) {
  auto at = [&](double probe_y) {
    const double lateral = probe_y - cfg.tls_y;
    return cfg.g_ref / (cfg.h * cfg.h + lateral * lateral);
  };
  if (cfg.single_probe) return {at(y), 0.0};
  return {at(y - 0.5 * cfg.d_qq), at(y + 0.5 * cfg.d_qq)};
}

ScanConfig normalized(ScanConfig cfg, double g_max) {
  cfg.validate();
  if (!(g_max > 0.0)) throw std::invalid_argument("normalized: g_max must be positive");
  double largest = 0.0;
  for (double y : cfg.y_grid) {
    const auto [g1, g2] = coupling_at_position(cfg, y);
    largest = std::max({largest, g1, g2});
  }
  cfg.g_ref *= g_max / largest;
  return cfg;
}

double max_total_coupling(const ScanConfig& cfg) {
  double largest = 0.0;
  for (double y : cfg.y_grid) largest = std::max(largest, params_at(cfg, y).g());
  return largest;
}

std::vector<double> ScanProfile::ys() const {
  std::vector<double> out;
  for (const auto& p : points) out.push_back(p.y);
  return out;
}

std::vector<double> ScanProfile::gamma_eff() const {
  std::vector<double> out;
  for (const auto& p : points) out.push_back(p.gamma_eff);
  return out;
}

std::vector<double> ScanProfile::extracted_g() const {
  std::vector<double> out;
  for (const auto& p : points) {
    if (p.extraction) out.push_back(p.extraction->g);
    else if (p.detuned) out.push_back(p.detuned->g);
    else out.push_back(kNaN);
  }
  return out;
}

double simulated_decay_rate(const SystemParams& params, const DecoherenceRates& rates) {
  params.validate();
  rates.validate();
  const double g = params.g();
  if (g == 0.0) throw std::invalid_argument("simulated_decay_rate: probe 1 is decoupled");
  const auto space = StateSpace::single_excitation();
  const auto gen = redfield_generator(params, coupling_from_rates(rates), space, SecularMode::None);
  const auto grid = default_time_grid(gen, g);
  // twice the default window leaves e^-20 of the slowest mode; the step
  // resolves both the coupling and the fastest rate
  const double t_max = 2.0 * grid.t_max;
  const double scale = std::max({g, std::abs(params.delta), rates.gamma_1 + rates.gamma_phi});
  const auto n = std::clamp<std::size_t>(static_cast<std::size_t>(t_max * scale / 0.005) + 1, 4096, 1 << 17);
  const auto traj = evolve(gen, space.pure_product_state({Site::Q1}), t_max, n);
  return trapezoid_rate(traj.sz_q1, traj.asymptote->sz[0]);
}

ScanProfile scan_decay_profile(const ScanConfig& cfg, const DecayScanOptions& options) {
  cfg.validate();
  ScanProfile profile{ProfileKind::DecayRate, cfg.single_probe, {}};
  profile.points.resize(cfg.y_grid.size());
  parallel_for(cfg.y_grid.size(), options.threads, [&](std::size_t i) {
    auto& point = profile.points[i];
    point.y = cfg.y_grid[i];
    const auto params = params_at(cfg, point.y);
    point.g1 = params.g1;
    point.g2 = params.g2;
    point.strong = classify_rate_regime(params.g(), cfg.rates) == RateRegime::Strong;
    if (!point.strong && !options.allow_mixed)
      throw RegimeError("scan_decay_profile: position " + std::to_string(point.y) +
                        " is outside the strong-decoherence regime");
    point.gamma_q1 = probe_rate(cfg, params, point.strong);
    if (cfg.single_probe) {
      point.gamma_eff = point.gamma_q1;
    } else {
      point.gamma_q2 = probe_rate(cfg, swapped(params), point.strong);
      point.gamma_eff = 0.5 * (point.gamma_q1 + point.gamma_q2);
    }
  });
  return profile;
}

double locate_by_coupling_minimum(const std::vector<double>& ys, const std::vector<double>& g) {
  if (ys.size() != g.size()) throw std::invalid_argument("locate_by_coupling_minimum: size mismatch");
  std::vector<std::size_t> valid;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (std::isfinite(g[k])) valid.push_back(k);
  if (valid.size() < 3) throw std::invalid_argument("locate_by_coupling_minimum: fewer than three samples");

  auto y = [&](std::size_t j) { return ys[valid[j]]; };
  auto v = [&](std::size_t j) { return g[valid[j]]; };
  const std::size_t n = valid.size();

  std::size_t top = 0;
  for (std::size_t j = 1; j < n; ++j)
    if (v(j) > v(top)) top = j;
  if (top == 0 || top == n - 1)
    throw std::invalid_argument("locate_by_coupling_minimum: maximum at the end of the scan");

  std::vector<std::size_t> maxima;
  for (std::size_t j = 1; j + 1 < n; ++j)
    if (v(j) >= v(j - 1) && v(j) > v(j + 1)) maxima.push_back(j);
  std::sort(maxima.begin(), maxima.end(), [&](std::size_t a, std::size_t b) { return v(a) > v(b); });

  auto refine = [&](std::size_t j) { return parabola_vertex(y(j - 1), v(j - 1), y(j), v(j), y(j + 1), v(j + 1)); };
  if (maxima.size() < 2) return refine(top);

  const auto [lo, hi] = std::minmax(maxima[0], maxima[1]);
  std::size_t bottom = lo + 1;
  for (std::size_t j = lo + 1; j < hi; ++j)
    if (v(j) < v(bottom)) bottom = j;
  if (bottom >= hi) return 0.5 * (y(lo) + y(hi));  // adjacent maxima: nothing in between
  return refine(bottom);
}

double locate_by_centroid(const std::vector<double>& ys, const std::vector<double>& values) {
  if (ys.size() != values.size() || ys.empty()) throw std::invalid_argument("locate_by_centroid: bad profile");
  const double peak = *std::max_element(values.begin(), values.end());
  if (!(peak > 0.0)) throw std::invalid_argument("locate_by_centroid: profile has no positive feature");
  double weighted = 0.0, total = 0.0;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    if (values[k] < 0.5 * peak) continue;
    if (k == 0 || k + 1 == ys.size())
      throw std::invalid_argument("locate_by_centroid: feature is not bracketed by the scan");
    weighted += ys[k] * values[k];
    total += values[k];
  }
  return weighted / total;
}

double locate_tls(const ScanProfile& profile) {
  if (profile.kind == ProfileKind::Coupling) return locate_by_coupling_minimum(profile.ys(), profile.extracted_g());
  return locate_by_centroid(profile.ys(), profile.gamma_eff());
}

// Adds the lines of `other` that `base` lacks. A weakly coupled probe misses
// the line mixing the two bright states, the strongly coupled one misses the
// dark-state line of the TLS-like mode, so together they show all three.
PeakSet merge_peak_sets(PeakSet base, const PeakSet& other) {
  for (const auto& peak : other.peaks) {
    if (is_zero_frequency(peak)) continue;
    const bool known = std::any_of(base.peaks.begin(), base.peaks.end(), [&](const Peak& p) {
      return std::abs(p.position - peak.position) < std::max(p.hwhm, peak.hwhm);
    });
    if (!known) base.peaks.push_back(peak);
  }
  if (other.regime == Regime::Oscillating) base.regime = Regime::Oscillating;
  base.residual = std::max(base.residual, other.residual);
  return base;
}

namespace {

PeakSet fit_or_best(const Spectrum& spectrum, const FitOptions& options) {
  try {
    return fit_peaks(spectrum, options);
  } catch (const FitError& e) {
    return e.best();
  }
}

// A probe that shows only one moving line reads it as the 4g line; the g
// from the combined lines of both probes rules that out.
std::optional<ExtractionResult> try_resonance(const PeakSet& peaks, double g) {
  try {
    auto result = extract_on_resonance(peaks);
    if (std::abs(result.g - g) <= 0.05 * g) return result;
  } catch (const RegimeError&) {
  }
  return std::nullopt;
}

}  // namespace

TlsReport characterize_tls(const ScanConfig& cfg, const CharacterizationOptions& options) {
  cfg.validate();
  // the instrument band, fixed for the whole scan: twice the highest line
  // 2 sqrt(delta^2 + 4 g^2) at the strongest coupling
  const double g_scale = max_total_coupling(cfg);
  const double omega_top = 4.0 * std::sqrt(cfg.delta * cfg.delta + 4.0 * g_scale * g_scale);
  const auto space = StateSpace::single_excitation();
  const auto gen_coupling = coupling_from_rates(cfg.rates);

  TlsReport report;
  report.profile.kind = ProfileKind::Coupling;
  report.profile.single_probe = cfg.single_probe;
  report.profile.points.resize(cfg.y_grid.size());

  parallel_for(cfg.y_grid.size(), options.threads, [&](std::size_t i) {
    auto& point = report.profile.points[i];
    point.y = cfg.y_grid[i];
    const auto params = params_at(cfg, point.y);
    point.g1 = params.g1;
    point.g2 = params.g2;
    point.strong = classify_rate_regime(params.g(), cfg.rates) == RateRegime::Strong;

    const auto gen = redfield_generator(params, gen_coupling, space, SecularMode::None);
    const double t_max = default_time_grid(gen, params.g()).t_max;
    // omega dt <= 1 across the band (1/2 at the highest line) keeps the
    // transform accurate; the frequency step follows the resolution pi / t_max
    const auto n_t = std::clamp<std::size_t>(static_cast<std::size_t>(t_max * omega_top) + 1, options.n_points,
                                             std::size_t{1} << 18);
    const auto omegas = linear_grid(
        0.0, omega_top,
        std::clamp<std::size_t>(static_cast<std::size_t>(omega_top * t_max / std::numbers::pi), 4096, 8192));

    const auto traj = evolve(gen, space.pure_product_state({Site::Q1}), t_max, n_t);
    const double baseline = traj.asymptote->sz[0];
    point.gamma_q1 = trapezoid_rate(traj.sz_q1, baseline);
    auto peaks = fit_or_best(one_sided_fourier(traj.sz_q1, omegas, baseline), options.fit);
    std::optional<PeakSet> mirrored_peaks;
    if (cfg.single_probe) {
      point.gamma_eff = point.gamma_q1;
    } else {
      const auto mirrored = evolve(gen, space.pure_product_state({Site::Q2}), t_max, n_t);
      point.gamma_q2 = trapezoid_rate(mirrored.sz_q2, mirrored.asymptote->sz[1]);
      point.gamma_eff = 0.5 * (point.gamma_q1 + point.gamma_q2);
      mirrored_peaks = fit_or_best(one_sided_fourier(mirrored.sz_q2, omegas, mirrored.asymptote->sz[1]), options.fit);
    }

    const auto combined = mirrored_peaks ? merge_peak_sets(peaks, *mirrored_peaks) : peaks;
    if (combined.regime != Regime::Oscillating) return;
    try {
      point.detuned = extract_detuned(combined);
    } catch (const RegimeError&) {
      return;  // the spectrum does not show the oscillation pattern here
    }
    if (point.detuned->delta > 1e-3 * point.detuned->g) return;
    point.extraction = try_resonance(peaks, point.detuned->g);
    if (point.extraction || !mirrored_peaks) return;
    if (auto other = try_resonance(*mirrored_peaks, point.detuned->g)) {
      // the second probe's spectrum has the roles of g1 and g2 exchanged
      std::swap(other->g1, other->g2);
      for (auto& [a, b] : other->candidates) std::swap(a, b);
      point.extraction = other;
    }
  });

  const auto ys = report.profile.ys();
  const auto g = report.profile.extracted_g();
  report.oscillating_positions = static_cast<std::size_t>(std::count_if(g.begin(), g.end(), [](double v) {
    return std::isfinite(v);
  }));

  bool located = false;
  if (report.oscillating_positions >= 3) {
    try {
      report.y = locate_by_coupling_minimum(ys, g);
      report.method = "coupling-minimum";
      located = true;
    } catch (const std::invalid_argument&) {
    }
  }
  if (!located) {
    report.profile.kind = ProfileKind::DecayRate;
    report.y = locate_by_centroid(ys, report.profile.gamma_eff());
    report.method = "decay-centroid";
    return report;
  }

  std::size_t best = 0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (std::isfinite(g[k]) && (!std::isfinite(g[best]) || g[k] > g[best])) best = k;
  const auto& closest = report.profile.points[best];
  report.delta = closest.detuned->delta;
  if (closest.extraction) {
    report.gamma_1 = closest.extraction->gamma_1;
    report.gamma_phi = closest.extraction->gamma_phi;
  }

  // g(y) = g_ref m(y) is linear in g_ref once the position is fixed
  ScanConfig located_cfg = cfg;
  located_cfg.tls_y = report.y;
  located_cfg.g_ref = 1.0;
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!std::isfinite(g[k])) continue;
    const double m = params_at(located_cfg, ys[k]).g();
    num += g[k] * m;
    den += m * m;
  }
  report.g_ref = num / den;
  return report;
}

}  // namespace dualprobe
