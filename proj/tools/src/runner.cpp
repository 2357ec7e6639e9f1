#include "runner.hpp"

#include "dualprobe/errors.hpp"

#include <cmath>

namespace dualprobe::cli {

StateSpace state_space(const ScenarioConfig& cfg) {
  if (cfg.single_probe) return StateSpace::qubit_tls();
  return cfg.subspace == Subspace::Full ? StateSpace::three_spin() : StateSpace::single_excitation();
}

Superoperator build_generator(const ScenarioConfig& cfg) {
  const auto space = state_space(cfg);
  switch (cfg.engine) {
    case Engine::RedfieldFull:
      return redfield_generator(cfg.system, cfg.bath.bath_coupling(), space, SecularMode::None);
    case Engine::RedfieldSecular:
      return redfield_generator(cfg.system, cfg.bath.bath_coupling(), space, SecularMode::Full);
    case Engine::Lindblad:
      return lindblad_generator(cfg.system, cfg.bath.decoherence_rates(), space);
    case Engine::Analytic:
      break;
  }
  throw ConfigError("engine 'analytic' has no master-equation generator; pick redfield_full, "
                    "redfield_secular or lindblad");
}

double coupling_scale(const ScenarioConfig& cfg) {
  return cfg.single_probe ? cfg.system.g1 : cfg.system.g();
}

TimeGrid time_grid(const ScenarioConfig& cfg) {
  if (cfg.grid) return *cfg.grid;
  const double g = coupling_scale(cfg);
  if (!(g > 0.0)) throw ConfigError("system: a default time grid needs a nonzero coupling; give grid.t_max");
  return default_time_grid(lindblad_generator(cfg.system, cfg.bath.decoherence_rates(), state_space(cfg)), g);
}

ObservableTerms analytic_terms(const ScenarioConfig& cfg) {
  const auto rates = cfg.bath.decoherence_rates();
  if (cfg.system.delta != 0.0) throw RegimeError("analytic engine: the closed forms need zero detuning");
  if (cfg.single_probe) {
    if (rates.gamma_phi == 0.0) return single_qubit_transversal(cfg.system, rates.gamma_1);
    if (classify_rate_regime(cfg.system.g1, rates) != RateRegime::Weak)
      throw RegimeError("analytic engine: with both rates nonzero the single-probe form needs weak decoherence");
    return single_qubit_weak(cfg.system, rates);
  }
  if (rates.gamma_phi == 0.0) return transversal_two_qubit(cfg.system, rates.gamma_1);
  if (rates.gamma_1 == 0.0) return longitudinal_two_qubit(cfg.system, rates.gamma_phi);
  if (classify_rate_regime(cfg.system.g(), rates) != RateRegime::Weak)
    throw RegimeError("analytic engine: with both rates nonzero the closed form needs weak decoherence");
  return weak_decoherence_two_qubit(cfg.system, rates);
}

Trajectory simulate(const ScenarioConfig& cfg) {
  const auto grid = time_grid(cfg);
  const auto space = state_space(cfg);
  if (cfg.engine == Engine::Analytic) return analytic_terms(cfg).sample(grid.t_max, grid.n_points, space);
  return evolve(build_generator(cfg), space.pure_product_state({Site::Q1}), grid.t_max, grid.n_points);
}

std::vector<double> frequency_grid(const ScenarioConfig& cfg) {
  double top = 0.0;
  if (cfg.spectrum.omega_max) {
    top = *cfg.spectrum.omega_max;
  } else {
    const double g = coupling_scale(cfg), d = cfg.system.delta;
    top = 4.0 * std::sqrt(d * d + 4.0 * g * g);
  }
  if (!(top > 0.0)) throw ConfigError("spectrum: cannot choose a band for zero coupling; give spectrum.omega_max");
  return linear_grid(0.0, top, cfg.spectrum.n_points);
}

ScanConfig scan_config(const ScenarioConfig& cfg) {
  const auto& spec = *cfg.scan;
  ScanConfig scan;
  scan.h = spec.h;
  scan.d_qq = spec.d_qq;
  scan.y_grid = spec.y.values;
  scan.tls_y = spec.tls_y;
  scan.g_ref = spec.g_ref.value_or(1.0);
  scan.rates = cfg.bath.decoherence_rates();
  scan.omega_q = cfg.system.omega_q;
  scan.delta = cfg.system.delta;
  scan.single_probe = spec.single_probe;
  scan.validate();
  return spec.g_max ? normalized(scan, *spec.g_max) : scan;
}

std::string to_string(RateRegime regime) {
  switch (regime) {
    case RateRegime::Weak: return "weak";
    case RateRegime::Intermediate: return "intermediate";
    case RateRegime::Strong: return "strong";
  }
  return "unknown";
}

}  // namespace dualprobe::cli
