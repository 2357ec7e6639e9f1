// runner.hpp - turns a scenario into a state space, a generator and a
// trajectory. The probe dynamics always start from the first probe excited.

#pragma once

#include "config.hpp"

#include "dualprobe/analytic.hpp"
#include "dualprobe/metrics.hpp"
#include "dualprobe/scan.hpp"
#include "dualprobe/spectral.hpp"

namespace dualprobe::cli {

StateSpace state_space(const ScenarioConfig& cfg);

/// Master-equation generator for the configured engine. Throws ConfigError
/// for the analytic engine, which has no generator.
Superoperator build_generator(const ScenarioConfig& cfg);

/// Configured grid, or the default grid of the dissipative dynamics.
TimeGrid time_grid(const ScenarioConfig& cfg);

/// Closed-form observables for the analytic engine. Throws RegimeError when
/// no closed form covers the scenario (nonzero detuning, or both rates
/// nonzero outside the weak regime).
ObservableTerms analytic_terms(const ScenarioConfig& cfg);

Trajectory simulate(const ScenarioConfig& cfg);

/// Total coupling, g1 alone for a single probe.
double coupling_scale(const ScenarioConfig& cfg);

/// Frequency grid for the spectrum of the first probe: the configured band or
/// twice the highest line 2 sqrt(delta^2 + 4 g^2).
std::vector<double> frequency_grid(const ScenarioConfig& cfg);

ScanConfig scan_config(const ScenarioConfig& cfg);

std::string to_string(RateRegime regime);

}  // namespace dualprobe::cli
