#include "dualprobe/metrics.hpp"

#include "dualprobe/errors.hpp"
#include "dualprobe/operators.hpp"
#include "dualprobe/parallel.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dualprobe {

namespace {

double factorial(int p) {
  double out = 1.0;
  for (int k = 2; k <= p; ++k) out *= k;
  return out;
}

// f(0) and int_0^inf f for one term taken literally.
std::pair<double, double> moments(const ExpTerm& term) {
  const std::complex<double> rate(term.decay, -term.frequency);
  const std::complex<double> integral = factorial(term.power) / std::pow(rate, term.power + 1);
  const bool cosine = term.phase == Phase::Cos;
  const double at_zero = (cosine && term.power == 0) ? term.coefficient : 0.0;
  return {at_zero, term.coefficient * (cosine ? integral.real() : integral.imag())};
}

void require_decay(const ExpTerm& term) {
  if (!(term.decay > 0.0))
    throw std::invalid_argument("effective_decay_rate: a non-constant term does not decay (rate " +
                                std::to_string(term.decay) + ")");
}

double require_g(const SystemParams& params) {
  params.validate();
  const double g = params.g();
  if (!(g > 0.0)) throw std::invalid_argument("coupling g must be positive");
  return g;
}

}  // namespace

double effective_decay_rate(const ExpTermSet& terms, EffectiveRateMode mode) {
  double at_zero = 0.0, integral = 0.0;
  std::size_t used = 0;
  for (const auto& term : terms.terms) {
    if (term.is_constant() || term.coefficient == 0.0) continue;
    const bool oscillating = term.frequency >= kOscillationCutoff;
    if (oscillating) {
      switch (mode) {
        case EffectiveRateMode::Plain:
          throw std::invalid_argument("effective_decay_rate: Plain mode requires non-oscillating terms");
        case EffectiveRateMode::Average:
          continue;
        case EffectiveRateMode::EnvelopeUpper:
        case EffectiveRateMode::EnvelopeLower: {
          require_decay(term);
          const double sign = mode == EffectiveRateMode::EnvelopeUpper ? 1.0 : -1.0;
          const double c = sign * std::abs(term.coefficient);
          if (term.power == 0) at_zero += c;
          integral += c * factorial(term.power) / std::pow(term.decay, term.power + 1);
          ++used;
          continue;
        }
      }
    }
    require_decay(term);
    const auto [f0, area] = moments(term);
    at_zero += f0;
    integral += area;
    ++used;
  }
  if (used == 0) throw std::invalid_argument("effective_decay_rate: no decaying terms left; the rate is undefined");
  if (at_zero == 0.0 || integral == 0.0)
    throw std::invalid_argument("effective_decay_rate: vanishing amplitude or area; the rate is undefined");
  return at_zero / integral;
}

double effective_rate_strong(const SystemParams& params, const DecoherenceRates& rates, DecayChannel channel) {
  rates.validate();
  const double g = require_g(params);
  if (params.delta != 0.0) throw RegimeError("effective_rate_strong: closed forms require zero detuning");
  const double gs = g * g;
  const double g1s = params.g1 * params.g1, g2s = params.g2 * params.g2;
  const double tiny = 1e-12 * g;
  if (channel == DecayChannel::Transversal) {
    if (!(rates.gamma_1 > 8 * g) || rates.gamma_phi > tiny)
      throw RegimeError("effective_rate_strong: transversal form needs Gamma_1 > 8g and Gamma_phi = 0");
    const double G = rates.gamma_1;
    return 16 * gs * (g1s + 2 * g2s) * G / (16 * gs * g1s + (g1s + 4 * g2s) * G * G);
  }
  if (!(rates.gamma_phi > 4 * g) || rates.gamma_1 > tiny)
    throw RegimeError("effective_rate_strong: longitudinal form needs Gamma_phi > 4g and Gamma_1 = 0");
  return 8 * gs * (g1s + 4 * g2s) / ((g1s + 16 * g2s) * rates.gamma_phi);
}

RateRegime classify_rate_regime(double g, const DecoherenceRates& rates) {
  if (!(g > 0.0)) throw std::invalid_argument("classify_rate_regime: g must be positive");
  rates.validate();
  if (rates.gamma_1 / (8 * g) + rates.gamma_phi / (4 * g) >= 1.0) return RateRegime::Strong;
  if (rates.gamma_1 >= 2 * g || rates.gamma_phi >= g) return RateRegime::Intermediate;
  return RateRegime::Weak;
}

// ---------------------------------------------------------------------------

std::vector<double> excitation_imbalance(const Trajectory& traj) {
  std::vector<double> x(traj.size());
  for (std::size_t k = 0; k < x.size(); ++k)
    x[k] = traj.sz_tls.values[k] - (traj.sz_q1.values[k] + traj.sz_q2.values[k]);
  return x;
}

namespace {

double asymptotic_imbalance(const Trajectory& traj, const std::vector<double>& x) {
  if (traj.asymptote) return traj.asymptote->sz[2] - (traj.asymptote->sz[0] + traj.asymptote->sz[1]);
  return x.back();
}

}  // namespace

bool imbalance_settled(const Trajectory& traj, double settle_tolerance) {
  if (traj.size() < 2) return false;
  const auto x = excitation_imbalance(traj);
  const double x_inf = asymptotic_imbalance(traj, x);
  double scale = 1.0;
  for (double v : x) scale = std::max(scale, std::abs(v - x_inf));
  const std::size_t tail = x.size() - std::max<std::size_t>(1, x.size() / 10);
  for (std::size_t k = tail; k < x.size(); ++k)
    if (std::abs(x[k] - x_inf) > settle_tolerance * scale) return false;
  return true;
}

double oscillation_strength(const Trajectory& traj, const OscillationOptions& options) {
  if (traj.size() < 2) throw std::invalid_argument("oscillation_strength: trajectory too short");
  if (options.require_settled && !imbalance_settled(traj, options.settle_tolerance))
    throw ConvergenceError("oscillation_strength: the excitation imbalance has not settled; extend t_max");
  const auto x = excitation_imbalance(traj);
  const double x_inf = asymptotic_imbalance(traj, x);
  return std::max(0.0, *std::max_element(x.begin(), x.end()) - x_inf);
}

double log_strength(double m) { return m > 1e-16 ? std::log10(m) : kLogSentinel; }

std::pair<ThresholdPoint, ThresholdPoint> threshold_points(double g) {
  if (!(g > 0.0)) throw std::invalid_argument("threshold_points: g must be positive");
  return {{8 * g, 0.0}, {0.0, 4 * g}};
}

double single_probe_threshold(double g1) {
  if (!(g1 > 0.0)) throw std::invalid_argument("single_probe_threshold: g1 must be positive");
  return 8 * g1;
}

StrengthFunction redfield_strength(const SystemParams& params, const StateSpace& space) {
  const double g = require_g(params);
  return [params, space, g](double gamma_1, double gamma_phi) {
    const DecoherenceRates rates{gamma_1, gamma_phi};
    const auto gen = redfield_generator(params, coupling_from_rates(rates), space, SecularMode::None);
    // three default windows: every decaying mode is down by e^{-30}, which
    // leaves room for the polynomial prefactor of degenerate modes
    const double t_max = 3.0 * default_time_grid(gen, g).t_max;
    const auto n = std::clamp<std::size_t>(static_cast<std::size_t>(t_max * g / 0.01) + 1, 4096, 32768);
    const auto traj = evolve(gen, space.pure_product_state({Site::Q1}), t_max, n);
    OscillationOptions options;
    options.require_settled = gamma_1 > 0.0 || gamma_phi > 0.0;
    return oscillation_strength(traj, options);
  };
}

ThresholdMap threshold_map(const std::vector<double>& gamma_1, const std::vector<double>& gamma_phi,
                           const StrengthFunction& strength, unsigned threads) {
  if (gamma_1.empty() || gamma_phi.empty()) throw std::invalid_argument("threshold_map: empty grid");
  ThresholdMap map{gamma_1, gamma_phi, {}};
  const std::size_t cols = gamma_1.size(), total = cols * gamma_phi.size();
  std::vector<double> cells(total);
  parallel_for(total, threads,
                       [&](std::size_t i) { cells[i] = log_strength(strength(gamma_1[i % cols], gamma_phi[i / cols])); });

  map.log10_m.resize(gamma_phi.size());
  for (std::size_t r = 0; r < gamma_phi.size(); ++r)
    map.log10_m[r].assign(cells.begin() + static_cast<std::ptrdiff_t>(r * cols),
                          cells.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols));
  return map;
}

double locate_crossing(const StrengthFunction& strength, DecayChannel axis, double lo, double hi, double tolerance) {
  if (!(hi > lo) || !(tolerance > 0.0)) throw std::invalid_argument("locate_crossing: need lo < hi and tolerance > 0");
  auto m = [&](double rate) {
    return axis == DecayChannel::Transversal ? strength(rate, 0.0) : strength(0.0, rate);
  };
  if (!(m(lo) >= kStrengthFloor) || !(m(hi) < kStrengthFloor))
    throw std::invalid_argument("locate_crossing: bracket does not straddle the strength floor");
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    (m(mid) >= kStrengthFloor ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double threshold_drop(const ThresholdMap& map, DecayChannel axis, double threshold) {
  std::vector<double> rates, values;
  if (axis == DecayChannel::Transversal) {
    std::size_t row = 0;
    for (std::size_t r = 1; r < map.gamma_phi.size(); ++r)
      if (std::abs(map.gamma_phi[r]) < std::abs(map.gamma_phi[row])) row = r;
    rates = map.gamma_1;
    values = map.log10_m[row];
  } else {
    std::size_t col = 0;
    for (std::size_t c = 1; c < map.gamma_1.size(); ++c)
      if (std::abs(map.gamma_1[c]) < std::abs(map.gamma_1[col])) col = c;
    rates = map.gamma_phi;
    for (const auto& row : map.log10_m) values.push_back(row[col]);
  }
  double weak = std::numeric_limits<double>::infinity(), strong = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (rates[i] <= 0.9 * threshold) weak = std::min(weak, values[i]);
    if (rates[i] >= 1.1 * threshold) strong = std::max(strong, values[i]);
  }
  if (!std::isfinite(weak) || !std::isfinite(strong))
    throw std::invalid_argument("threshold_drop: the map does not cover both sides of the threshold");
  return weak - strong;
}

// ---------------------------------------------------------------------------

std::pair<DensityMatrix, DensityMatrix> markovianity_states(const StateSpace& space) {
  if (!space.has_site(Site::Q2)) throw std::invalid_argument("markovianity_states: the space has no second qubit");
  return {space.pure_product_state({Site::Q1}), space.pure_product_state({Site::Q2})};
}

MarkovianityReport markovianity(const Superoperator& gen, const std::pair<DensityMatrix, DensityMatrix>& states,
                                double t_max, std::size_t n_points) {
  const auto& space = gen.basis().space;
  const auto a = evolve(gen, states.first, t_max, n_points);
  const auto b = evolve(gen, states.second, t_max, n_points);

  MarkovianityReport out;
  out.times = a.times;
  out.distance.resize(a.size());
  for (std::size_t k = 0; k < a.size(); ++k)
    out.distance[k] = trace_distance(partial_trace(a.states[k], space, {Site::Q1, Site::Q2}),
                                     partial_trace(b.states[k], space, {Site::Q1, Site::Q2}));

  const double d0 = out.distance.front();
  const double flat = 1e-10 * std::max(d0, 1e-300);
  std::size_t k = 0;
  const std::size_t n = out.distance.size();
  while (k + 1 < n) {
    if (out.distance[k + 1] - out.distance[k] > flat) {
      const std::size_t start = k;
      while (k + 1 < n && out.distance[k + 1] - out.distance[k] > flat) ++k;
      out.intervals.emplace_back(out.times[start], out.times[k]);
      if (out.intervals.size() == 1) out.delta_d_up_absolute = out.distance[k] - out.distance[start];
    } else {
      ++k;
    }
  }
  out.delta_d_up = d0 > 0.0 ? out.delta_d_up_absolute / d0 : 0.0;
  return out;
}

double delta_d_up_closed_form(double g, double gamma_1) {
  if (!(g > 0.0) || !(gamma_1 >= 0.0)) throw std::invalid_argument("delta_d_up_closed_form: invalid arguments");
  if (gamma_1 >= 8 * g) return 0.0;
  return std::exp(-std::numbers::pi * gamma_1 / std::sqrt(64 * g * g - gamma_1 * gamma_1));
}

// ---------------------------------------------------------------------------

double concurrence(const DensityMatrix& rho) {
  if (rho.rows() != 4 || rho.cols() != 4) throw std::invalid_argument("concurrence: expected a 4x4 density matrix");
  // With rho = W W^dagger, the Wootters lambdas are the singular values of
  // W^T (sy x sy) W; this avoids square roots of round-off sized eigenvalues.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()));
  const Eigen::VectorXd weights = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXcd w = es.eigenvectors() * weights.asDiagonal();
  const Eigen::MatrixXcd yy = kron(pauli::y(), pauli::y());
  const Eigen::MatrixXcd tau = w.transpose() * yy * w;
  const Eigen::VectorXd lambda = Eigen::JacobiSVD<Eigen::MatrixXcd>(tau).singularValues();
  return std::max(0.0, lambda(0) - lambda(1) - lambda(2) - lambda(3));
}

double entanglement_of_formation(double c) {
  if (!(c >= 0.0 && c <= 1.0 + 1e-12)) throw std::invalid_argument("entanglement_of_formation: concurrence outside [0, 1]");
  const double x = 0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - c * c)));
  auto h = [](double p) { return p <= 0.0 || p >= 1.0 ? 0.0 : -p * std::log2(p); };
  return h(x) + h(1.0 - x);
}

DarkStateMetrics dark_state_metrics(double g1, double g2) {
  const SystemParams params{1000.0, 0.0, g1, g2};
  const double g = require_g(params);

  Eigen::VectorXcd dark = Eigen::VectorXcd::Zero(4);  // two-qubit basis, index 2 b1 + b2
  dark(1) = g2 / g;
  dark(2) = -g1 / g;

  // Transversal decay from |up,down,down>; the limit does not depend on Gamma_1.
  const auto space = StateSpace::single_excitation();
  const auto gen = lindblad_generator(params, {g, 0.0}, space);
  const auto limit = asymptotic_state(gen, space.pure_product_state({Site::Q1}));

  DarkStateMetrics out;
  out.concurrence = concurrence(dark * dark.adjoint());
  out.steady_state = partial_trace(limit.state, space, {Site::Q1, Site::Q2});
  out.steady_concurrence = concurrence(out.steady_state);
  out.eof = entanglement_of_formation(std::min(1.0, out.steady_concurrence));
  return out;
}

EofMaximum maximize_steady_eof(double max_ratio) {
  if (!(max_ratio > 0.0)) throw std::invalid_argument("maximize_steady_eof: max_ratio must be positive");
  auto negative_eof = [](double ratio) { return -dark_state_metrics(ratio, 1.0).eof; };
  const auto [ratio, value] =
      boost::math::tools::brent_find_minima(negative_eof, 1e-6 * max_ratio, max_ratio, 40);
  return {ratio, -value};
}

}  // namespace dualprobe
