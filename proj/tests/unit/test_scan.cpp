#include "doctest.h"

#include "dualprobe/errors.hpp"
#include "dualprobe/propagator.hpp"
#include "dualprobe/scan.hpp"

#include <algorithm>
#include <cmath>

using namespace dualprobe;

namespace {

std::vector<double> grid(double lo, double step, int n) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(lo + step * k);
  return out;
}

ScanConfig base_config(double tls_y = 0.0) {
  ScanConfig cfg;
  cfg.h = 1.0;
  cfg.d_qq = 3.0;
  cfg.tls_y = tls_y;
  cfg.y_grid = grid(-5.0, 0.1, 101);
  return normalized(cfg, 1.0);
}

std::vector<double> total_coupling(const ScanConfig& cfg) {
  std::vector<double> g;
  for (double y : cfg.y_grid) {
    const auto [g1, g2] = coupling_at_position(cfg, y);
    g.push_back(std::hypot(g1, g2));
  }
  return g;
}

std::vector<std::size_t> local_maxima(const std::vector<double>& v) {
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k + 1 < v.size(); ++k)
    if (v[k] > v[k - 1] && v[k] >= v[k + 1]) out.push_back(k);
  return out;
}

// full width at half maximum of a sampled single bump, by linear interpolation
double fwhm(const std::vector<double>& ys, const std::vector<double>& v) {
  const auto top = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  const double half = 0.5 * v[top];
  std::size_t lo = top, hi = top;
  while (lo > 0 && v[lo - 1] >= half) --lo;
  while (hi + 1 < v.size() && v[hi + 1] >= half) ++hi;
  auto cross = [&](std::size_t a, std::size_t b) { return ys[a] + (half - v[a]) * (ys[b] - ys[a]) / (v[b] - v[a]); };
  return cross(hi, hi + 1) - cross(lo - 1, lo);
}

}  // namespace

TEST_CASE("couplings from the probe geometry") {
  ScanConfig cfg;
  cfg.h = 2.0;
  cfg.d_qq = 0.0;
  cfg.g_ref = 3.0;
  cfg.tls_y = 0.5;
  cfg.y_grid = {0.0};
  auto [g1, g2] = coupling_at_position(cfg, 0.5);
  CHECK(g1 == doctest::Approx(0.75));
  CHECK(g2 == doctest::Approx(0.75));

  cfg.d_qq = 3.0 * cfg.h;
  std::tie(g1, g2) = coupling_at_position(cfg, 0.5);
  CHECK(g1 == doctest::Approx(3.0 / (4.0 + 9.0)));
  CHECK(g2 == doctest::Approx(g1));

  std::tie(g1, g2) = coupling_at_position(cfg, 1e6);
  CHECK(g1 < 1e-11);
  CHECK(g2 < 1e-11);

  // mirror symmetry of the probe pair about the TLS
  for (double y : {-3.0, -0.4, 0.9, 2.5}) {
    CHECK(coupling_at_position(cfg, y).first == doctest::Approx(coupling_at_position(cfg, 2 * cfg.tls_y - y).second));
  }

  cfg.single_probe = true;
  CHECK(coupling_at_position(cfg, 0.5).second == 0.0);
}

TEST_CASE("coupling profile structure") {
  const auto cfg = base_config();
  std::vector<double> g1, g2;
  for (double y : cfg.y_grid) {
    const auto [a, b] = coupling_at_position(cfg, y);
    g1.push_back(a);
    g2.push_back(b);
  }
  const auto m1 = local_maxima(g1), m2 = local_maxima(g2);
  REQUIRE(m1.size() == 1);
  REQUIRE(m2.size() == 1);
  CHECK(std::abs(cfg.y_grid[m1[0]] - cfg.y_grid[m2[0]]) == doctest::Approx(cfg.d_qq).epsilon(0.1 / 3.0));
  CHECK(std::max(*std::max_element(g1.begin(), g1.end()), *std::max_element(g2.begin(), g2.end())) ==
        doctest::Approx(1.0));

  // the width follows the height
  std::vector<double> widths;
  for (double h : {1.0, 2.0, 4.0}) {
    ScanConfig wide = cfg;
    wide.h = h;
    wide.d_qq = 0.0;
    wide.y_grid = grid(-20.0, 0.01, 4001);
    std::vector<double> g;
    for (double y : wide.y_grid) g.push_back(coupling_at_position(wide, y).first);
    widths.push_back(fwhm(wide.y_grid, g));
  }
  CHECK(widths[0] == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(widths[1] / widths[0] == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(widths[2] / widths[0] == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("scan configuration validation") {
  auto cfg = base_config();
  CHECK_NOTHROW(cfg.validate());
  auto bad = cfg;
  bad.h = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.d_qq = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.g_ref = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.y_grid = {0.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.y_grid.clear();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.rates.gamma_1 = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(normalized(cfg, 0.0), std::invalid_argument);
}

TEST_CASE("simulated decay rate agrees with the closed forms") {
  for (const auto& params : {SystemParams{1000.0, 0.0, 0.7, 0.5}, SystemParams{1000.0, 0.0, 0.3, 0.0}}) {
    CHECK(simulated_decay_rate(params, {10.0, 0.0}) ==
          doctest::Approx(effective_rate_strong(params, {10.0, 0.0}, DecayChannel::Transversal)).epsilon(1e-6));
    CHECK(simulated_decay_rate(params, {0.0, 6.0}) ==
          doctest::Approx(effective_rate_strong(params, {0.0, 6.0}, DecayChannel::Longitudinal)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(simulated_decay_rate({1000.0, 0.0, 0.0, 0.0}, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("single-probe decay profile is one bump over the TLS") {
  auto cfg = base_config(0.3);
  cfg.single_probe = true;
  cfg = normalized(cfg, 1.0);
  cfg.rates = {10.0, 0.0};
  const auto profile = scan_decay_profile(cfg);
  const auto rates = profile.gamma_eff();
  const auto maxima = local_maxima(rates);
  REQUIRE(maxima.size() == 1);
  CHECK(std::abs(cfg.y_grid[maxima[0]] - cfg.tls_y) <= 0.1 + 1e-12);
  CHECK(std::abs(locate_tls(profile) - cfg.tls_y) <= 0.1);
  for (const auto& p : profile.points) {
    CHECK(p.strong);
    CHECK(p.g2 == 0.0);
  }
}

TEST_CASE("dual-probe decay profile has two lobes around the TLS") {
  auto cfg = base_config();
  cfg.rates = {10.0, 0.0};
  const auto profile = scan_decay_profile(cfg);
  const auto rates = profile.gamma_eff();
  const auto maxima = local_maxima(rates);
  REQUIRE(maxima.size() == 2);
  const std::size_t centre = 50;
  CHECK(cfg.y_grid[centre] == doctest::Approx(0.0).scale(1.0));
  CHECK(rates[centre] < 0.5 * rates[maxima[0]]);
  for (std::size_t k = 0; k < rates.size(); ++k) CHECK(rates[k] == doctest::Approx(rates[rates.size() - 1 - k]));
  CHECK(std::abs(locate_tls(profile)) <= 0.1);

  // the longitudinal channel locates the TLS as well
  cfg.rates = {0.0, 6.0};
  const auto longitudinal = scan_decay_profile(cfg, {.allow_mixed = false, .threads = 2});
  CHECK(std::abs(locate_tls(longitudinal)) <= 0.1);

  // a shifted TLS shifts the estimate
  auto shifted = base_config(0.7);
  shifted.rates = {10.0, 0.0};
  CHECK(std::abs(locate_tls(scan_decay_profile(shifted)) - 0.7) <= 0.1);
}

TEST_CASE("decay profile of a vanishing coupling") {
  auto cfg = base_config();
  cfg.g_ref = 1e-6;
  cfg.rates = {10.0, 0.0};
  for (double rate : scan_decay_profile(cfg).gamma_eff()) CHECK(rate < 1e-10);
}

TEST_CASE("mixed-regime scans need per-position flags") {
  auto cfg = base_config();
  cfg.y_grid = grid(-3.0, 0.5, 13);
  cfg = normalized(cfg, 1.0);
  cfg.rates = {5.0, 0.0};
  CHECK_THROWS_AS(scan_decay_profile(cfg), RegimeError);
  const auto profile = scan_decay_profile(cfg, {.allow_mixed = true});
  const auto weak = std::count_if(profile.points.begin(), profile.points.end(), [](const ScanPoint& p) {
    return !p.strong;
  });
  CHECK(weak > 0);
  CHECK(weak < static_cast<long>(profile.points.size()));
  for (const auto& p : profile.points) CHECK(p.gamma_eff > 0.0);

  // detuned TLS: no closed form, the rate comes from propagation
  cfg.rates = {10.0, 0.0};
  cfg.delta = 1.0;
  cfg.y_grid = {-1.0, 0.0, 1.0};
  const auto detuned = scan_decay_profile(cfg);
  const auto [g1, g2] = coupling_at_position(cfg, 0.0);
  CHECK(detuned.points[1].gamma_q1 ==
        doctest::Approx(simulated_decay_rate({1000.0, 1.0, g1, g2}, cfg.rates)).epsilon(1e-12));
}

TEST_CASE("locating from the coupling minimum") {
  const auto cfg = base_config(0.23);
  const auto g = total_coupling(cfg);
  const double estimate = locate_by_coupling_minimum(cfg.y_grid, g);
  CHECK(std::abs(estimate - 0.23) <= 0.1);

  // translation equivariance: shifting the profile shifts the estimate
  std::vector<double> shifted_y = cfg.y_grid;
  for (double& y : shifted_y) y += 1.7;
  CHECK(locate_by_coupling_minimum(shifted_y, g) == doctest::Approx(estimate + 1.7));

  // missing samples are skipped
  auto gaps = g;
  for (std::size_t k = 0; k < 20; ++k) gaps[k] = std::nan("");
  gaps[52] = std::nan("");
  CHECK(std::abs(locate_by_coupling_minimum(cfg.y_grid, gaps) - 0.23) <= 0.1);

  // one probe over the TLS: the maximum marks it
  auto overhead = cfg;
  overhead.d_qq = 0.0;
  CHECK(std::abs(locate_by_coupling_minimum(overhead.y_grid, total_coupling(overhead)) - 0.23) <= 0.1);

  // a feature running off the grid is rejected
  std::vector<double> half(cfg.y_grid.begin(), cfg.y_grid.begin() + 50);
  std::vector<double> half_g(g.begin(), g.begin() + 50);
  auto off_grid = base_config(3.0);
  CHECK_THROWS_AS(locate_by_coupling_minimum(half, total_coupling(off_grid)), std::invalid_argument);
  CHECK_THROWS_AS(locate_by_coupling_minimum({0.0, 1.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(locate_by_centroid({0.0, 1.0, 2.0}, {1.0, 0.2, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(locate_by_centroid({0.0, 1.0, 2.0}, {0.0, 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("both localization estimators agree") {
  for (double tls_y : {0.0, 0.37, -1.12}) {
    auto cfg = base_config(tls_y);
    cfg.rates = {10.0, 0.0};
    const double from_coupling = locate_by_coupling_minimum(cfg.y_grid, total_coupling(cfg));
    const double from_decay = locate_tls(scan_decay_profile(cfg));
    CAPTURE(tls_y);
    CHECK(std::abs(from_coupling - from_decay) <= 0.1);
  }
}

TEST_CASE("merging the lines of both probes") {
  PeakSet a, b;
  a.peaks = {Peak{0.0, 0.05, 1.0}, Peak{0.84, 0.01, 0.03}, Peak{5.67, 0.05, 0.5}};
  b.peaks = {Peak{0.0, 0.05, 1.4}, Peak{0.835, 0.01, 0.9}, Peak{4.83, 0.04, 0.01}};
  b.regime = Regime::Oscillating;
  a.regime = Regime::Decaying;
  a.residual = 1e-4;
  b.residual = 2e-4;
  const auto merged = merge_peak_sets(a, b);
  REQUIRE(merged.peaks.size() == 4);
  CHECK(merged.peaks.back().position == 4.83);
  CHECK(merged.regime == Regime::Oscillating);
  CHECK(merged.residual == 2e-4);
  const auto estimate = extract_detuned(merged);
  CHECK(estimate.third_checked);
}

TEST_CASE("characterizing a weakly decohering TLS") {
  ScanConfig cfg;
  cfg.h = 1.0;
  cfg.d_qq = 3.0;
  cfg.tls_y = 0.33;
  cfg.y_grid = grid(-3.0, 0.5, 13);
  cfg = normalized(cfg, 1.0);
  cfg.rates = {0.1, 0.05};
  const auto report = characterize_tls(cfg);
  CHECK(report.method == "coupling-minimum");
  CHECK(std::abs(report.y - cfg.tls_y) <= 0.5);
  CHECK(report.oscillating_positions == cfg.y_grid.size());
  REQUIRE(report.gamma_1);
  REQUIRE(report.gamma_phi);
  REQUIRE(report.g_ref);
  CHECK(*report.gamma_1 == doctest::Approx(0.1).epsilon(0.05));
  CHECK(*report.gamma_phi == doctest::Approx(0.05).epsilon(0.05));
  CHECK(*report.g_ref == doctest::Approx(cfg.g_ref).epsilon(0.05));
  CHECK(*report.delta == doctest::Approx(0.0).scale(1.0).epsilon(1e-3));
  for (const auto& p : report.profile.points) {
    REQUIRE(p.extraction);
    CHECK(p.extraction->g == doctest::Approx(std::hypot(p.g1, p.g2)).epsilon(0.05));
    CHECK(p.extraction->g1 * p.extraction->g2 == doctest::Approx(p.g1 * p.g2).epsilon(0.05));
  }
}

TEST_CASE("a strongly decohering TLS can only be located") {
  ScanConfig cfg;
  cfg.h = 1.0;
  cfg.d_qq = 3.0;
  cfg.tls_y = 0.2;
  cfg.y_grid = grid(-4.0, 0.4, 21);
  cfg = normalized(cfg, 1.0);
  cfg.rates = {10.0, 0.0};
  const auto report = characterize_tls(cfg);
  CHECK(report.method == "decay-centroid");
  CHECK(std::abs(report.y - cfg.tls_y) <= 0.4);
  CHECK(report.oscillating_positions == 0);
  CHECK_FALSE(report.g_ref);
  CHECK_FALSE(report.delta);
  CHECK_FALSE(report.gamma_1);
  CHECK_FALSE(report.gamma_phi);
  // the propagated rates reproduce the closed-form profile
  const auto closed = scan_decay_profile(cfg);
  for (std::size_t k = 0; k < cfg.y_grid.size(); ++k)
    CHECK(report.profile.points[k].gamma_eff == doctest::Approx(closed.points[k].gamma_eff).epsilon(1e-3));
}

TEST_CASE("a detuned TLS keeps the probes oscillating") {
  const auto space = StateSpace::single_excitation();
  auto min_q1 = [&](const SystemParams& params) {
    const auto gen = redfield_generator(params, coupling_from_rates({0.1, 0.0}), space, SecularMode::None);
    const auto traj = evolve(gen, space.pure_product_state({Site::Q1}), 60.0, 6001);
    return *std::min_element(traj.sz_q1.values.begin(), traj.sz_q1.values.end());
  };
  // the mediated exchange empties the first probe almost completely; a lone probe
  // only swaps part of its excitation, and less the further the detuning
  CHECK(min_q1({1000.0, 2.0, std::sqrt(0.5), std::sqrt(0.5)}) < -0.95);
  CHECK(min_q1({1000.0, 4.8, std::sqrt(0.5), std::sqrt(0.5)}) < -0.95);
  const double single_near = min_q1({1000.0, 2.0, 1.0, 0.0});
  const double single_far = min_q1({1000.0, 4.8, 1.0, 0.0});
  CHECK(single_near > -0.5);
  CHECK(single_far > 0.4);
  CHECK(single_far > single_near);

  ScanConfig cfg;
  cfg.h = 1.0;
  cfg.d_qq = 0.0;
  cfg.y_grid = {-0.5, 0.0, 0.5};
  cfg = normalized(cfg, std::sqrt(0.5));
  cfg.delta = 2.0;
  cfg.rates = {0.1, 0.0};
  const auto report = characterize_tls(cfg);
  CHECK(report.method == "coupling-minimum");
  CHECK(std::abs(report.y) <= 0.5);
  REQUIRE(report.delta);
  CHECK(*report.delta == doctest::Approx(2.0).epsilon(0.01));
  CHECK_FALSE(report.gamma_1);
  CHECK(*report.g_ref == doctest::Approx(cfg.g_ref).epsilon(0.01));
}
