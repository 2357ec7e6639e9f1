#include "dualprobe/analytic.hpp"

#include "dualprobe/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace dualprobe {

double ExpTerm::operator()(double t) const {
  double v = coefficient * std::exp(-decay * t);
  if (power > 0) v *= std::pow(t, power);
  if (frequency != 0.0 || phase == Phase::Sin) v *= phase == Phase::Cos ? std::cos(frequency * t) : std::sin(frequency * t);
  return v;
}

double ExpTermSet::operator()(double t) const {
  double sum = 0.0;
  for (const auto& term : terms) sum += term(t);
  return sum;
}

double ExpTermSet::constant() const {
  double sum = 0.0;
  for (const auto& term : terms) {
    if (term.is_constant() && term.phase == Phase::Cos) sum += term.coefficient;
  }
  return sum;
}

ExpTermSet ExpTermSet::without_constant() const {
  ExpTermSet out;
  for (const auto& term : terms) {
    if (!(term.is_constant() && term.phase == Phase::Cos)) out.terms.push_back(term);
  }
  return out;
}

TimeSeries ExpTermSet::sample(const std::vector<double>& times) const {
  TimeSeries s;
  s.times = times;
  s.values.reserve(times.size());
  for (double t : times) s.values.push_back((*this)(t));
  return s;
}

Trajectory ObservableTerms::sample(double t_max, std::size_t n_points, const StateSpace& space) const {
  if (n_points < 2 || !(t_max > 0.0)) throw std::invalid_argument("sample: need t_max > 0 and at least two points");
  std::vector<double> times(n_points);
  const double dt = t_max / static_cast<double>(n_points - 1);
  for (std::size_t k = 0; k < n_points; ++k) times[k] = dt * static_cast<double>(k);
  Trajectory traj;
  traj.space = space;
  traj.times = times;
  traj.sz_q1 = q1.sample(times);
  traj.sz_q2 = q2.sample(times);
  traj.sz_tls = tls.sample(times);
  traj.asymptote = Asymptote{DensityMatrix(), {q1.constant(), q2.constant(), tls.constant()}};
  return traj;
}

namespace {

void require_resonance(const SystemParams& params) {
  params.validate();
  if (params.delta != 0.0) throw RegimeError("closed-form solutions exist only at zero detuning");
}

void require_rate(double r, const char* name) {
  if (!std::isfinite(r) || r < 0.0) throw std::invalid_argument(std::string(name) + " must be finite and nonnegative");
}

double require_g(const SystemParams& params) {
  const double g = params.g();
  if (!(g > 0.0)) throw std::invalid_argument("closed forms need a nonzero total coupling g");
  return g;
}

// mu^2 values this close to zero (relative to `scale`) are treated as the
// exact threshold, where the hyperbolic terms turn into polynomial factors.
bool at_threshold(double mu2, double scale) { return std::abs(mu2) <= 1e-14 * scale; }

double clamp_decay(double a) {
  if (a < 0.0 && a > -1e-9) return 0.0;
  return a;
}

// Emits the exact exponential decomposition of the hyperbolic building blocks.
class TermBuilder {
 public:
  TermBuilder(ExpTermSet& out, double scale) : out_(out), scale_(scale) {}

  void constant(double c) { out_.terms.push_back({c, 0.0, 0.0, Phase::Cos, 0}); }
  void exp(double c, double a) { out_.terms.push_back({c, clamp_decay(a), 0.0, Phase::Cos, 0}); }

  // c e^{-at} cosh(mu s t)
  void cosh(double c, double a, double mu2, double s) {
    if (at_threshold(mu2, scale_)) {
      exp(c, a);
    } else if (mu2 > 0.0) {
      const double nu = std::sqrt(mu2) * s;
      exp(0.5 * c, a - nu);
      exp(0.5 * c, a + nu);
    } else {
      out_.terms.push_back({c, clamp_decay(a), std::sqrt(-mu2) * s, Phase::Cos, 0});
    }
  }

  // c e^{-at} sinh(mu s t) / mu
  void sinhc(double c, double a, double mu2, double s) {
    if (at_threshold(mu2, scale_)) {
      out_.terms.push_back({c * s, clamp_decay(a), 0.0, Phase::Cos, 1});
    } else if (mu2 > 0.0) {
      const double mu = std::sqrt(mu2);
      exp(0.5 * c / mu, a - mu * s);
      exp(-0.5 * c / mu, a + mu * s);
    } else {
      const double nu = std::sqrt(-mu2);
      out_.terms.push_back({c / nu, clamp_decay(a), nu * s, Phase::Sin, 0});
    }
  }

  // c e^{-at} (cosh(mu s t) - 1) / mu^2
  void coshm1c(double c, double a, double mu2, double s) {
    if (at_threshold(mu2, scale_)) {
      out_.terms.push_back({0.5 * c * s * s, clamp_decay(a), 0.0, Phase::Cos, 2});
    } else {
      cosh(c / mu2, a, mu2, s);
      exp(-c / mu2, a);
    }
  }

 private:
  ExpTermSet& out_;
  double scale_;
};

// Direct evaluation helpers on complex mu. Near y = mu s t = 0 the removable
// singularities are evaluated by their Taylor series.
Complex sinh_over_y(Complex y) {
  // sinh(y)/y = sum y^{2k} / (2k+1)!
  const Complex y2 = y * y;
  Complex term = 1.0, sum = 1.0;
  for (int k = 1; k <= 7; ++k) {
    term *= y2 / static_cast<double>((2 * k) * (2 * k + 1));
    sum += term;
  }
  return sum;
}

Complex coshm1_over_y2(Complex y) {
  // (cosh(y) - 1)/y^2 = sum y^{2k} / (2k+2)!
  const Complex y2 = y * y;
  Complex term = 0.5, sum = 0.5;
  for (int k = 1; k <= 7; ++k) {
    term *= y2 / static_cast<double>((2 * k + 1) * (2 * k + 2));
    sum += term;
  }
  return sum;
}

constexpr double kSeriesRadius = 0.5;

// e^{-at} cosh(mu s t)
Complex ecosh(double a, Complex mu, double s, double t) {
  return 0.5 * (std::exp((-a + mu * s) * t) + std::exp((-a - mu * s) * t));
}

// e^{-at} sinh(mu s t) / mu
Complex esinhc(double a, Complex mu, double s, double t) {
  const Complex y = mu * s * t;
  if (std::abs(y) < kSeriesRadius) return std::exp(-a * t) * s * t * sinh_over_y(y);
  return 0.5 * (std::exp((-a + mu * s) * t) - std::exp((-a - mu * s) * t)) / mu;
}

// e^{-at} (cosh(mu s t) - 1) / mu^2
Complex ecoshm1c(double a, Complex mu, double s, double t) {
  const Complex y = mu * s * t;
  if (std::abs(y) < kSeriesRadius) return std::exp(-a * t) * (s * t) * (s * t) * coshm1_over_y2(y);
  return (ecosh(a, mu, s, t) - std::exp(-a * t)) / (mu * mu);
}

double real_part(Complex v) {
  if (std::abs(v.imag()) > 1e-10 * std::max(1.0, std::abs(v.real()))) {
    throw std::logic_error("closed form produced a complex value");
  }
  return v.real();
}

}  // namespace

ObservableTerms weak_decoherence_two_qubit(const SystemParams& params, const DecoherenceRates& rates) {
  require_resonance(params);
  rates.validate();
  const double g = require_g(params);
  const double g1s = params.g1 * params.g1, g2s = params.g2 * params.g2;
  const double g2_ = g * g, g4 = g2_ * g2_;
  const double G1 = rates.gamma_1, Gp = rates.gamma_phi;

  ObservableTerms out;
  out.q1.terms = {{(g2s * g2s - g1s * g1s - 2 * g1s * g2s) / g4, 0, 0},
                  {g1s * g1s / g4, G1 / 2, 0},
                  {4 * g1s * g2s / g4, G1 / 4 + Gp, 2 * g},
                  {g1s * g1s / g4, G1 / 2 + Gp, 4 * g}};
  out.q2.terms = {{-(g1s * g1s + g2s * g2s) / g4, 0, 0},
                  {g1s * g2s / g4, G1 / 2, 0},
                  {-4 * g1s * g2s / g4, G1 / 4 + Gp, 2 * g},
                  {g1s * g2s / g4, G1 / 2 + Gp, 4 * g}};
  out.tls.terms = {{-1, 0, 0}, {g1s / g2_, G1 / 2, 0}, {-g1s / g2_, G1 / 2 + Gp, 4 * g}};
  return out;
}

std::array<double, 3> weak_decoherence_two_qubit_at(const SystemParams& params, const DecoherenceRates& rates,
                                                    double t) {
  return weak_decoherence_two_qubit(params, rates)(t);
}

ObservableTerms transversal_two_qubit(const SystemParams& params, double gamma_1) {
  require_resonance(params);
  require_rate(gamma_1, "Gamma_1");
  const double g = require_g(params);
  const double g1s = params.g1 * params.g1, g2s = params.g2 * params.g2;
  const double gs = g * g, g4 = gs * gs;
  const double G = gamma_1;
  const double mu2 = G * G - 64 * gs;
  const double scale = G * G + 64 * gs;

  ObservableTerms out;
  {
    TermBuilder b(out.q1, scale);
    b.constant((g2s * g2s - g1s * g1s - 2 * g1s * g2s) / g4);
    b.coshm1c(64 * g1s * g1s / gs, G / 2, mu2, 0.5);
    b.cosh(2 * g1s * g1s / g4, G / 2, mu2, 0.5);
    b.sinhc(2 * g1s * g1s * G / g4, G / 2, mu2, 0.5);
    b.cosh(4 * g1s * g2s / g4, G / 4, mu2, 0.25);
    b.sinhc(4 * g1s * g2s * G / g4, G / 4, mu2, 0.25);
  }
  {
    TermBuilder b(out.q2, scale);
    b.constant(-(g1s * g1s + g2s * g2s) / g4);
    b.coshm1c(64 * g1s * g2s / gs, G / 2, mu2, 0.5);
    b.cosh(2 * g1s * g2s / g4, G / 2, mu2, 0.5);
    b.sinhc(2 * g1s * g2s * G / g4, G / 2, mu2, 0.5);
    b.cosh(-4 * g1s * g2s / g4, G / 4, mu2, 0.25);
    b.sinhc(-4 * g1s * g2s * G / g4, G / 4, mu2, 0.25);
  }
  {
    // 128 g1^2 e^{-G t/2} sinh^2(mu t/4)/mu^2 = 64 g1^2 e^{-G t/2} (cosh(mu t/2) - 1)/mu^2
    TermBuilder b(out.tls, scale);
    b.constant(-1.0);
    b.coshm1c(64 * g1s, G / 2, mu2, 0.5);
  }
  return out;
}

std::array<double, 3> transversal_two_qubit_at(const SystemParams& params, double gamma_1, double t) {
  require_resonance(params);
  require_rate(gamma_1, "Gamma_1");
  const double g = require_g(params);
  const double g1s = params.g1 * params.g1, g2s = params.g2 * params.g2;
  const double gs = g * g, g4 = gs * gs;
  const double G = gamma_1;
  const Complex mu = std::sqrt(Complex(G * G - 64 * gs, 0.0));

  const Complex fast = 64.0 / gs * ecoshm1c(G / 2, mu, 0.5, t) + 2.0 / g4 * ecosh(G / 2, mu, 0.5, t) +
                       2.0 * G / g4 * esinhc(G / 2, mu, 0.5, t);
  const Complex slow = 4.0 / g4 * (ecosh(G / 4, mu, 0.25, t) + G * esinhc(G / 4, mu, 0.25, t));
  const Complex tls_part = 128.0 * g1s * std::pow(esinhc(G / 4, mu, 0.25, t), 2);

  const double q1 = (g2s * g2s - g1s * g1s - 2 * g1s * g2s) / g4 + real_part(g1s * g1s * fast + g1s * g2s * slow);
  const double q2 = -(g1s * g1s + g2s * g2s) / g4 + real_part(g1s * g2s * fast - g1s * g2s * slow);
  const double tls = -1.0 + real_part(tls_part);
  return {q1, q2, tls};
}

ObservableTerms longitudinal_two_qubit(const SystemParams& params, double gamma_phi) {
  require_resonance(params);
  require_rate(gamma_phi, "Gamma_phi");
  const double g = require_g(params);
  const double g1s = params.g1 * params.g1, g2s = params.g2 * params.g2;
  const double gs = g * g, g4 = gs * gs;
  const double G = gamma_phi;
  const double mu2 = G * G - 4 * gs;
  const double mu3 = G * G - 16 * gs;
  const double scale = G * G + 16 * gs;

  ObservableTerms out;
  {
    TermBuilder b(out.q1, scale);
    b.constant((g2s * g2s - 2 * g1s * g2s) / g4);
    b.cosh(4 * g1s * g2s / g4, G, mu2, 1.0);
    b.sinhc(4 * g1s * g2s * G / g4, G, mu2, 1.0);
    b.cosh(g1s * g1s / g4, G, mu3, 1.0);
    b.sinhc(g1s * g1s * G / g4, G, mu3, 1.0);
  }
  {
    TermBuilder b(out.q2, scale);
    b.constant(-(g1s * g1s - g1s * g2s + g2s * g2s) / g4);
    b.cosh(-4 * g1s * g2s / g4, G, mu2, 1.0);
    b.sinhc(-4 * g1s * g2s * G / g4, G, mu2, 1.0);
    b.cosh(g1s * g2s / g4, G, mu3, 1.0);
    b.sinhc(g1s * g2s * G / g4, G, mu3, 1.0);
  }
  {
    TermBuilder b(out.tls, scale);
    b.constant(-g2s / gs);
    b.cosh(-g1s / gs, G, mu3, 1.0);
    b.sinhc(-g1s * G / gs, G, mu3, 1.0);
  }
  return out;
}

std::array<double, 3> longitudinal_two_qubit_at(const SystemParams& params, double gamma_phi, double t) {
  require_resonance(params);
  require_rate(gamma_phi, "Gamma_phi");
  const double g = require_g(params);
  const double g1s = params.g1 * params.g1, g2s = params.g2 * params.g2;
  const double gs = g * g, g4 = gs * gs;
  const double G = gamma_phi;
  const Complex mu2 = std::sqrt(Complex(G * G - 4 * gs, 0.0));
  const Complex mu3 = std::sqrt(Complex(G * G - 16 * gs, 0.0));

  const Complex f2 = ecosh(G, mu2, 1.0, t) + G * esinhc(G, mu2, 1.0, t);
  const Complex f3 = ecosh(G, mu3, 1.0, t) + G * esinhc(G, mu3, 1.0, t);
  const double q1 = (g2s * g2s - 2 * g1s * g2s) / g4 + real_part(g1s / g4 * (4 * g2s * f2 + g1s * f3));
  const double q2 = -(g1s * g1s - g1s * g2s + g2s * g2s) / g4 + real_part(g1s * g2s / g4 * (-4.0 * f2 + f3));
  const double tls = -g2s / gs - real_part(g1s / gs * f3);
  return {q1, q2, tls};
}

ObservableTerms single_qubit_weak(const SystemParams& params, const DecoherenceRates& rates) {
  require_resonance(params);
  rates.validate();
  const double g1 = params.g1;
  const double G1 = rates.gamma_1, Gp = rates.gamma_phi;
  ObservableTerms out;
  out.q1.terms = {{-1, 0, 0}, {1, G1 / 2, 0}, {1, G1 / 2 + Gp, 4 * g1}};
  out.q2.terms = {{-1, 0, 0}};
  out.tls.terms = {{-1, 0, 0}, {1, G1 / 2, 0}, {-1, G1 / 2 + Gp, 4 * g1}};
  return out;
}

std::array<double, 3> single_qubit_weak_at(const SystemParams& params, const DecoherenceRates& rates, double t) {
  return single_qubit_weak(params, rates)(t);
}

ObservableTerms single_qubit_transversal(const SystemParams& params, double gamma_1) {
  require_resonance(params);
  require_rate(gamma_1, "Gamma_1");
  const double g1s = params.g1 * params.g1;
  const double G = gamma_1;
  const double mu2 = G * G - 64 * g1s;
  const double scale = G * G + 64 * g1s;
  ObservableTerms out;
  {
    TermBuilder b(out.q1, scale);
    b.constant(-1.0);
    b.cosh(2.0, G / 2, mu2, 0.5);
    b.coshm1c(64 * g1s, G / 2, mu2, 0.5);
    b.sinhc(2 * G, G / 2, mu2, 0.5);
  }
  out.q2.terms = {{-1, 0, 0}};
  {
    TermBuilder b(out.tls, scale);
    b.constant(-1.0);
    b.coshm1c(64 * g1s, G / 2, mu2, 0.5);
  }
  return out;
}

std::array<double, 3> single_qubit_transversal_at(const SystemParams& params, double gamma_1, double t) {
  require_resonance(params);
  require_rate(gamma_1, "Gamma_1");
  const double g1s = params.g1 * params.g1;
  const double G = gamma_1;
  const Complex mu = std::sqrt(Complex(G * G - 64 * g1s, 0.0));
  const double q1 = -1.0 + real_part(2.0 * ecosh(G / 2, mu, 0.5, t) + 64 * g1s * ecoshm1c(G / 2, mu, 0.5, t) +
                                     2 * G * esinhc(G / 2, mu, 0.5, t));
  const double tls = -1.0 + real_part(128.0 * g1s * std::pow(esinhc(G / 4, mu, 0.25, t), 2));
  return {q1, -1.0, tls};
}

DispersiveParameters dispersive_parameters(const SystemParams& params, const DecoherenceRates& rates) {
  params.validate();
  rates.validate();
  const double g = params.g();
  const double d = std::abs(params.delta);
  if (d <= 2.0 * g * (1.0 + 1e-12)) throw RegimeError("dispersive formulas need |delta| > 2g");
  return {std::sqrt(d * d + 4 * g * g) - d, 2 * g * g / d,
          g * g * (rates.gamma_1 + 12 * rates.gamma_phi) / (6 * d * d)};
}

std::array<double, 3> chain_frequencies(double delta, double g) {
  const double s = std::sqrt(delta * delta + 4 * g * g);
  const double d = std::abs(delta);
  return {s - d, s + d, 2 * s};
}

double single_probe_frequency(double delta, double g1) { return 2.0 * std::sqrt(delta * delta + 4 * g1 * g1); }

}  // namespace dualprobe
