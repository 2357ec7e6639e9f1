// config.hpp - JSON scenario files for the command-line front end.
//
// All rates and frequencies are in units of the coupling scale chosen by the
// user (the shipped examples use g = 1). Unknown keys are rejected so that a
// misspelt field cannot silently fall back to a default.

#pragma once

#include "dualprobe/master_equation.hpp"
#include "dualprobe/model.hpp"
#include "dualprobe/propagator.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dualprobe::cli {

/// Malformed file or invalid field; the message names the line or the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Engine { RedfieldFull, RedfieldSecular, Lindblad, Analytic };
enum class Subspace { Full, SingleExcitation };

std::string to_string(Engine engine);
Engine parse_engine(const std::string& name);  // throws ConfigError

/// Either {"min", "max", "n"} (inclusive, n >= 2) or {"values": [...]}.
struct Range {
  std::vector<double> values;
};

/// Exactly one of the two forms is set.
struct BathSpec {
  std::optional<DecoherenceRates> rates;
  std::optional<BathCoupling> coupling;

  DecoherenceRates decoherence_rates() const;
  BathCoupling bath_coupling() const;
};

struct ThresholdSpec {
  Range gamma_1;
  Range gamma_phi;
  bool crossings{true};
};

struct EffectiveRateSpec {
  Range gamma_1;
};

enum class ScanMode { Geometry, Decay, Characterize };

struct ScanSpec {
  double h{1.0};
  double d_qq{3.0};
  double tls_y{0.0};
  Range y;
  std::optional<double> g_ref;
  std::optional<double> g_max;
  bool single_probe{false};
  ScanMode mode{ScanMode::Decay};
  bool allow_mixed{false};
};

struct SpectrumSpec {
  std::optional<double> omega_max;
  std::size_t n_points{4096};
};

struct MarkovSpec {
  std::optional<double> t_max;
  std::size_t n_points{20000};
};

struct ScenarioConfig {
  std::string units{"g"};
  SystemParams system{};
  bool single_probe{false};
  BathSpec bath{};
  Engine engine{Engine::RedfieldFull};
  Subspace subspace{Subspace::SingleExcitation};
  std::optional<TimeGrid> grid;

  SpectrumSpec spectrum{};
  std::optional<Range> delta_sweep;
  std::optional<ThresholdSpec> threshold;
  std::optional<EffectiveRateSpec> effective_rate;
  std::optional<ScanSpec> scan;
  MarkovSpec markov{};
};

/// Parses JSON text. `source` names the input in diagnostics.
ScenarioConfig parse_config(const std::string& text, const std::string& source = "config");
ScenarioConfig load_config(const std::string& path);

}  // namespace dualprobe::cli
