#include "dualprobe/spectral.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dualprobe {

namespace {

// Gregory end corrections: the integral equals the trapezoid sum plus
// h * sum_k kGregory[k-1] * (Delta^k f_0 + Delta^k f_rev_0).
constexpr std::array<double, 6> kGregory = {1.0 / 12.0,      -1.0 / 24.0,  19.0 / 720.0,
                                            -3.0 / 160.0,    863.0 / 60480.0, -275.0 / 24192.0};
constexpr std::size_t kMinSamples = 2 * (kGregory.size() + 1);
constexpr std::size_t kReseed = 512;

double uniform_step(const std::vector<double>& t) {
  const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  if (!(h > 0.0)) throw std::invalid_argument("one_sided_fourier: time grid must be increasing");
  for (std::size_t k = 1; k < t.size(); ++k) {
    const double expected = t.front() + h * static_cast<double>(k);
    if (std::abs(t[k] - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
      throw std::invalid_argument("one_sided_fourier: time grid is not uniform at index " + std::to_string(k));
  }
  return h;
}

// Forward differences Delta^1..Delta^6 at the head of `f` (7 values).
std::array<std::complex<double>, 6> head_differences(std::array<std::complex<double>, 7> f) {
  std::array<std::complex<double>, 6> out{};
  for (std::size_t order = 0; order < 6; ++order) {
    for (std::size_t j = 0; j + 1 < f.size() - order; ++j) f[j] = f[j + 1] - f[j];
    out[order] = f[0];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Peak model. An oscillating peak has parameters (b, a, c, s), a pure decay
// (a, c) with b = s = 0. Signs of b and a are folded with abs() so the
// optimizer works unconstrained.

struct Layout {
  std::vector<bool> pinned;  // true: zero-frequency peak
  std::vector<Eigen::Index> offset;

  explicit Layout(std::vector<bool> zero) : pinned(std::move(zero)) {
    Eigen::Index at = 0;
    for (bool z : pinned) {
      offset.push_back(at);
      at += z ? 2 : 4;
    }
    offset.push_back(at);
  }
  Eigen::Index size() const { return offset.back(); }
};

struct PeakParams {
  double b, a, c, s, sign_b, sign_a;
};

PeakParams read(const Layout& layout, const Eigen::VectorXd& p, std::size_t k) {
  const Eigen::Index o = layout.offset[k];
  if (layout.pinned[k]) return {0.0, std::abs(p[o]), p[o + 1], 0.0, 1.0, p[o] < 0 ? -1.0 : 1.0};
  return {std::abs(p[o]), std::abs(p[o + 1]), p[o + 2], p[o + 3], p[o] < 0 ? -1.0 : 1.0, p[o + 1] < 0 ? -1.0 : 1.0};
}

struct PeakModel : Eigen::DenseFunctor<double> {
  const Layout* layout;
  const std::vector<double>* omega;
  const std::vector<double>* data;

  PeakModel(const Layout& l, const std::vector<double>& w, const std::vector<double>& y)
      : Eigen::DenseFunctor<double>(static_cast<int>(l.size()), static_cast<int>(w.size())),
        layout(&l), omega(&w), data(&y) {}

  int operator()(const InputType& p, ValueType& r) const {
    for (Eigen::Index i = 0; i < values(); ++i) {
      const double w = (*omega)[static_cast<std::size_t>(i)];
      double model = 0.0;
      for (std::size_t k = 0; k < layout->pinned.size(); ++k) {
        const auto q = read(*layout, p, k);
        model += lorentzian_pair(w, q.b, q.a, q.c) + dispersive_pair(w, q.b, q.a, q.s);
      }
      r[i] = model - (*data)[static_cast<std::size_t>(i)];
    }
    return 0;
  }

  int df(const InputType& p, JacobianType& jac) const {
    for (Eigen::Index i = 0; i < values(); ++i) {
      const double w = (*omega)[static_cast<std::size_t>(i)];
      for (std::size_t k = 0; k < layout->pinned.size(); ++k) {
        const auto q = read(*layout, p, k);
        const double a2 = q.a * q.a;
        const double u = w - q.b, v = w + q.b;
        const double du = a2 + u * u, dv = a2 + v * v;
        const double lor = q.a / (2 * du) + q.a / (2 * dv);
        const double lor_a = (u * u - a2) / (2 * du * du) + (v * v - a2) / (2 * dv * dv);
        const Eigen::Index o = layout->offset[k];
        if (layout->pinned[k]) {
          jac(i, o) = q.c * lor_a * q.sign_a;
          jac(i, o + 1) = lor;
          continue;
        }
        const double lor_b = q.a * u / (du * du) - q.a * v / (dv * dv);
        const double dis = v / (2 * dv) - u / (2 * du);
        const double dis_b = (a2 - v * v) / (2 * dv * dv) + (a2 - u * u) / (2 * du * du);
        const double dis_a = q.a * u / (du * du) - q.a * v / (dv * dv);
        jac(i, o) = (q.c * lor_b + q.s * dis_b) * q.sign_b;
        jac(i, o + 1) = (q.c * lor_a + q.s * dis_a) * q.sign_a;
        jac(i, o + 2) = lor;
        jac(i, o + 3) = dis;
      }
    }
    return 0;
  }
};

struct Seed {
  double position, hwhm, weight, height;
  bool pinned;
};

// Distance from the maximum at `i` to where the spectrum first falls below half
// of it, walking in direction `dir`; linear interpolation between samples.
std::optional<double> half_width(const Spectrum& s, std::size_t i, int dir) {
  const double half = 0.5 * s.values[i];
  std::size_t j = i;
  while (true) {
    if (dir < 0 && j == 0) return std::nullopt;
    if (dir > 0 && j + 1 >= s.size()) return std::nullopt;
    const std::size_t next = dir > 0 ? j + 1 : j - 1;
    if (s.values[next] < half) {
      const double frac = (s.values[j] - half) / (s.values[j] - s.values[next]);
      return std::abs(s.omegas[j] + frac * (s.omegas[next] - s.omegas[j]) - s.omegas[i]);
    }
    // a rising edge before reaching half height means a neighbouring peak
    if (s.values[next] > s.values[j]) return std::nullopt;
    j = next;
  }
}

// Height of the maximum at `i` above the higher of the two valleys separating
// it from taller terrain (or from the grid edge).
double prominence(const Spectrum& s, std::size_t i) {
  const double v = s.values[i];
  double left = v;
  for (std::size_t j = i; j-- > 0;) {
    if (s.values[j] > v) break;
    left = std::min(left, s.values[j]);
  }
  double right = v;
  for (std::size_t j = i + 1; j < s.size(); ++j) {
    if (s.values[j] > v) break;
    right = std::min(right, s.values[j]);
  }
  if (i == 0) return v - right;
  return v - std::max(left, right);
}

std::vector<Seed> seed_peaks(const Spectrum& s, double floor, double step) {
  std::vector<Seed> seeds;
  const std::size_t n = s.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double v = s.values[i];
    if (v <= 0.0) continue;
    const bool left_ok = i == 0 || v > s.values[i - 1];
    if (!left_ok || !(v >= s.values[i + 1])) continue;
    if (prominence(s, i) < floor) continue;

    const auto left = half_width(s, i, -1);
    const auto right = half_width(s, i, +1);
    double hwhm = step;
    if (left && right) hwhm = std::min(*left, *right);
    else if (left) hwhm = *left;
    else if (right) hwhm = *right;
    hwhm = std::max(hwhm, step);

    const double position = s.omegas[i];
    // invert the peak height of the pair model at omega = position
    const double unit = lorentzian_pair(position, position, hwhm, 1.0);
    seeds.push_back({position, hwhm, v / unit, v, i == 0 && position == 0.0});
  }
  return seeds;
}

PeakSet unpack(const Layout& layout, const Eigen::VectorXd& p, const Eigen::MatrixXd& cov, double residual,
               int iterations, double step) {
  PeakSet out;
  out.residual = residual;
  out.iterations = iterations;
  auto sigma = [&](Eigen::Index i) { return cov.size() ? std::sqrt(std::max(0.0, cov(i, i))) : 0.0; };
  for (std::size_t k = 0; k < layout.pinned.size(); ++k) {
    const auto q = read(layout, p, k);
    const Eigen::Index o = layout.offset[k];
    Peak peak;
    peak.position = q.b;
    peak.hwhm = q.a;
    peak.weight = q.c;
    peak.quadrature = q.s;
    // Noise-free spectra give vanishing statistical errors; the grid and the
    // width set the resolution actually available for comparisons.
    const double floor = std::max(step, 0.05 * peak.hwhm);
    if (layout.pinned[k]) {
      peak.position_sigma = floor;
      peak.hwhm_sigma = std::max(sigma(o), floor);
      peak.weight_sigma = std::max(sigma(o + 1), 0.05 * std::abs(peak.weight));
    } else {
      peak.position_sigma = std::max(sigma(o), floor);
      peak.hwhm_sigma = std::max(sigma(o + 1), floor);
      peak.weight_sigma = std::max(sigma(o + 2), 0.05 * std::abs(peak.weight));
    }
    out.peaks.push_back(peak);
  }
  std::sort(out.peaks.begin(), out.peaks.end(), [](const Peak& x, const Peak& y) { return x.position < y.position; });
  out.regime = std::any_of(out.peaks.begin(), out.peaks.end(), [](const Peak& pk) { return !is_zero_frequency(pk); })
                   ? Regime::Oscillating
                   : Regime::Decaying;
  return out;
}

bool close(double x, double y, double tol) { return std::abs(x - y) <= tol; }

}  // namespace

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw std::invalid_argument("linear_grid: need n >= 2 and hi > lo");
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return out;
}

std::vector<double> default_frequency_grid(double g) {
  if (!(g > 0.0)) throw std::invalid_argument("default_frequency_grid: g must be positive");
  return linear_grid(0.0, 8.0 * g, 4096);
}

Spectrum one_sided_fourier(const TimeSeries& series, const std::vector<double>& omegas,
                           std::optional<double> baseline) {
  series.validate();
  const std::size_t n = series.size();
  if (n < kMinSamples)
    throw std::invalid_argument("one_sided_fourier: need at least " + std::to_string(kMinSamples) + " samples");
  const double h = uniform_step(series.times);

  Spectrum out;
  out.omegas = omegas;
  out.values.resize(omegas.size());
  out.baseline = baseline.value_or(series.values.back());

  std::vector<double> f(n);
  for (std::size_t k = 0; k < n; ++k) f[k] = series.values[k] - out.baseline;
  const std::size_t tail_start = n - std::max<std::size_t>(1, n / 10);
  for (std::size_t k = tail_start; k < n; ++k) out.tail_offset = std::max(out.tail_offset, std::abs(f[k]));
  out.settled = out.tail_offset < 1e-4;

  const double t0 = series.times.front();
  for (std::size_t j = 0; j < omegas.size(); ++j) {
    const double w = omegas[j];
    const std::complex<double> z = std::polar(1.0, -w * h);
    std::complex<double> phase;
    std::complex<double> sum = 0.0;
    std::array<std::complex<double>, 7> head{}, tail{};
    for (std::size_t k = 0; k < n; ++k) {
      if (k % kReseed == 0) phase = std::polar(1.0, -w * (series.times[k] - t0));
      else phase *= z;
      const std::complex<double> term = f[k] * phase;
      sum += term;
      if (k < head.size()) head[k] = term;
      if (k + tail.size() >= n) tail[n - 1 - k] = term;
    }
    sum -= 0.5 * (head[0] + tail[0]);
    const auto dh = head_differences(head);
    const auto dt = head_differences(tail);
    for (std::size_t order = 0; order < kGregory.size(); ++order) sum += kGregory[order] * (dh[order] + dt[order]);
    // the series starts at t0, so shift the phase origin back to t = 0
    out.values[j] = (h * sum * std::polar(1.0, -w * t0)).real();
  }
  return out;
}

double lorentzian_pair(double omega, double position, double hwhm, double weight) {
  const double a2 = hwhm * hwhm;
  const double u = omega - position, v = omega + position;
  return weight * (hwhm / (2 * (a2 + u * u)) + hwhm / (2 * (a2 + v * v)));
}

double dispersive_pair(double omega, double position, double hwhm, double weight) {
  const double a2 = hwhm * hwhm;
  const double u = omega - position, v = omega + position;
  return weight * (v / (2 * (a2 + v * v)) - u / (2 * (a2 + u * u)));
}

double Peak::height() const { return lorentzian_pair(position, position, hwhm, weight); }

double Peak::operator()(double omega) const {
  return lorentzian_pair(omega, position, hwhm, weight) + dispersive_pair(omega, position, hwhm, quadrature);
}

bool is_zero_frequency(const Peak& peak) { return peak.position < 0.5 * peak.hwhm; }

PeakSet fit_peaks(const Spectrum& spectrum, const FitOptions& options) {
  if (spectrum.omegas.size() != spectrum.values.size())
    throw std::invalid_argument("fit_peaks: omega and value arrays differ in length");
  if (spectrum.size() < 3) throw std::invalid_argument("fit_peaks: spectrum too short");
  if (options.max_peaks == 0) throw std::invalid_argument("fit_peaks: max_peaks must be positive");

  double vmax = 0.0;
  for (double v : spectrum.values) vmax = std::max(vmax, std::abs(v));
  if (!(vmax > 0.0)) return {};

  const double step = (spectrum.omegas.back() - spectrum.omegas.front()) / static_cast<double>(spectrum.size() - 1);
  auto seeds = seed_peaks(spectrum, options.seed_floor * vmax, step);
  // negative-going peaks (cosines with negative amplitude) seed from the mirrored spectrum
  Spectrum mirrored = spectrum;
  for (double& v : mirrored.values) v = -v;
  for (auto sd : seed_peaks(mirrored, options.seed_floor * vmax, step)) {
    sd.weight = -sd.weight;
    seeds.push_back(sd);
  }
  if (seeds.empty()) return {};
  if (seeds.size() > options.max_peaks) {
    std::partial_sort(seeds.begin(), seeds.begin() + static_cast<std::ptrdiff_t>(options.max_peaks), seeds.end(),
                      [](const Seed& x, const Seed& y) { return x.height > y.height; });
    seeds.resize(options.max_peaks);
  }

  std::vector<bool> pinned;
  for (const auto& sd : seeds) pinned.push_back(sd.pinned);
  const Layout layout(pinned);
  Eigen::VectorXd p(layout.size());
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    const Eigen::Index o = layout.offset[k];
    if (seeds[k].pinned) {
      p[o] = seeds[k].hwhm;
      p[o + 1] = seeds[k].weight;
    } else {
      p.segment(o, 4) << seeds[k].position, seeds[k].hwhm, seeds[k].weight, 0.0;
    }
  }

  PeakModel functor(layout, spectrum.omegas, spectrum.values);
  Eigen::LevenbergMarquardt<PeakModel> lm(functor);
  lm.setMaxfev(100 * (options.max_iterations + 1));
  lm.setXtol(1e-12);
  lm.setFtol(1e-14);

  const auto m = static_cast<double>(spectrum.size());
  auto rms = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(functor.values());
    functor(x, r);
    return std::sqrt(r.squaredNorm() / m) / vmax;
  };

  Eigen::VectorXd best = p;
  double best_residual = rms(p);
  int iterations = 0;
  auto status = lm.minimizeInit(p);
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters)
    throw FitError("fit_peaks: improper optimizer input", unpack(layout, best, {}, best_residual, 0, step));
  do {
    status = lm.minimizeOneStep(p);
    ++iterations;
    const double res = rms(p);
    if (res < best_residual) {
      best_residual = res;
      best = p;
    }
  } while (status == Eigen::LevenbergMarquardtSpace::Running && iterations < options.max_iterations);

  if (status == Eigen::LevenbergMarquardtSpace::Running ||
      status == Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation)
    throw FitError("fit_peaks: no convergence after " + std::to_string(iterations) + " iterations",
                   unpack(layout, best, {}, best_residual, iterations, step));

  // covariance s^2 (J^T J)^-1 at the solution
  Eigen::VectorXd r(functor.values());
  functor(best, r);
  Eigen::MatrixXd jac(functor.values(), best.size());
  functor.df(best, jac);
  const double dof = std::max(1.0, m - static_cast<double>(best.size()));
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(best.size(), best.size());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  if (lu.isInvertible()) cov = (r.squaredNorm() / dof) * lu.inverse();

  return unpack(layout, best, cov, best_residual, iterations, step);
}

ExtractionResult extract_on_resonance(const PeakSet& peaks) {
  std::vector<Peak> kept;
  double wmax = 0.0;
  for (const auto& p : peaks.peaks) wmax = std::max(wmax, p.weight);
  for (const auto& p : peaks.peaks)
    if (p.weight > 1e-3 * wmax) kept.push_back(p);

  std::optional<Peak> zero;
  std::vector<Peak> moving;
  for (const auto& p : kept) {
    if (is_zero_frequency(p)) {
      if (zero) throw RegimeError("extract_on_resonance: more than one zero-frequency peak");
      zero = p;
    } else {
      moving.push_back(p);
    }
  }
  if (moving.empty() || moving.size() > 2)
    throw RegimeError("extract_on_resonance: expected peaks at 2g and 4g, found " + std::to_string(moving.size()) +
                      " oscillating peak(s)");

  std::optional<Peak> mid;
  Peak high = moving.back();
  if (moving.size() == 2) {
    mid = moving.front();
    const double tol = 5 * std::hypot(2 * mid->position_sigma, high.position_sigma);
    if (!close(high.position, 2 * mid->position, std::max(tol, 0.05 * high.position)))
      throw RegimeError("extract_on_resonance: peak positions are not in the ratio 1:2");
  }

  ExtractionResult out;
  out.residual = peaks.residual;
  out.regime = peaks.regime;
  out.g = high.position / 4;
  out.g_consistency = mid ? std::abs(mid->position / 2 - out.g) / out.g : 0.0;

  // HWHM: zero peak Gamma_1/2, mid Gamma_1/4 + Gamma_phi, high Gamma_1/2 + Gamma_phi
  if (zero) {
    out.gamma_1 = 2 * zero->hwhm;
    out.gamma_phi = mid ? mid->hwhm - out.gamma_1 / 4 : high.hwhm - out.gamma_1 / 2;
  } else if (mid) {
    out.gamma_1 = 4 * (high.hwhm - mid->hwhm);
    out.gamma_phi = 2 * mid->hwhm - high.hwhm;
  } else {
    throw RegimeError("extract_on_resonance: cannot separate Gamma_1 from Gamma_phi with a single peak");
  }
  out.gamma_1 = std::max(0.0, out.gamma_1);
  out.gamma_phi = std::max(0.0, out.gamma_phi);

  // weights: zero and high peaks x^2, mid peak 4 x (1 - x), with x = g1^2/g^2
  const double outer = zero ? 0.5 * (zero->weight + high.weight) : high.weight;
  const double x_outer = std::clamp(std::sqrt(std::max(0.0, outer)), 0.0, 1.0);
  auto pair_for = [&](double x) { return std::make_pair(out.g * std::sqrt(x), out.g * std::sqrt(1 - x)); };

  if (!mid) {
    out.candidates = {pair_for(x_outer)};
  } else {
    const double disc = std::sqrt(std::max(0.0, 1 - std::clamp(mid->weight, 0.0, 1.0)));
    const double lo = 0.5 * (1 - disc), hi = 0.5 * (1 + disc);
    const double nearest = std::abs(x_outer - lo) < std::abs(x_outer - hi) ? lo : hi;
    if (close(lo, hi, 1e-3) || close(x_outer, nearest, 0.1)) {
      out.candidates = {pair_for(0.5 * (x_outer + nearest))};
    } else {
      out.candidates = {pair_for(hi), pair_for(lo)};
    }
  }
  out.g1 = out.candidates.front().first;
  out.g2 = out.candidates.front().second;
  return out;
}

DetunedEstimate extract_detuned(const PeakSet& peaks) {
  std::vector<Peak> moving;
  for (const auto& p : peaks.peaks)
    if (!is_zero_frequency(p)) moving.push_back(p);
  if (moving.size() > 3) {
    std::sort(moving.begin(), moving.end(),
              [](const Peak& x, const Peak& y) { return std::abs(x.weight) > std::abs(y.weight); });
    moving.resize(3);
  }
  std::sort(moving.begin(), moving.end(), [](const Peak& x, const Peak& y) { return x.position < y.position; });
  if (moving.size() < 2) throw RegimeError("extract_detuned: fewer than two oscillation frequencies resolved");

  DetunedEstimate out;
  for (const auto& p : moving) out.frequencies.push_back(p.position);

  const Peak& p1 = moving[0];
  const Peak& p2 = moving[1];
  if (moving.size() == 3) {
    const Peak& p3 = moving[2];
    const double sigma = std::sqrt(p1.position_sigma * p1.position_sigma + p2.position_sigma * p2.position_sigma +
                                   p3.position_sigma * p3.position_sigma);
    if (!close(p3.position, p1.position + p2.position, 5 * sigma))
      throw RegimeError("extract_detuned: third frequency is not the sum of the lower two");
    out.third_checked = true;
  } else {
    // At resonance the two lower frequencies merge into 2g and the top one is 4g.
    const double sigma = std::hypot(2 * p1.position_sigma, p2.position_sigma);
    if (close(p2.position, 2 * p1.position, 5 * sigma)) {
      out.g = p1.position / 2;
      out.delta = 0.0;
      return out;
    }
  }
  out.delta = 0.5 * (p2.position - p1.position);
  out.g = 0.5 * std::sqrt(p1.position * p2.position);
  return out;
}

}  // namespace dualprobe
