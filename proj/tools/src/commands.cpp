#include "commands.hpp"

#include "output.hpp"
#include "runner.hpp"

#include "dualprobe/errors.hpp"
#include "dualprobe/parallel.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>

namespace dualprobe::cli {
namespace {

using nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ScenarioConfig load(const CommandOptions& opts) {
  if (!opts.config) throw ConfigError("this command needs --config PATH");
  auto cfg = load_config(*opts.config);
  if (opts.engine) cfg.engine = parse_engine(*opts.engine);
  return cfg;
}

std::string space_name(const StateSpace& space) {
  switch (space.kind()) {
    case SpaceKind::ThreeSpin: return "full";
    case SpaceKind::SingleExcitation: return "single_excitation";
    case SpaceKind::QubitTls: return "qubit_tls";
  }
  return "unknown";
}

ordered_json scenario_json(const ScenarioConfig& cfg) {
  const auto rates = cfg.bath.decoherence_rates();
  ordered_json j;
  j["units"] = cfg.units;
  j["engine"] = to_string(cfg.engine);
  j["space"] = space_name(state_space(cfg));
  j["system"] = {{"omega_q", cfg.system.omega_q},
                 {"g1", cfg.system.g1},
                 {"g2", cfg.system.g2},
                 {"delta", cfg.system.delta}};
  j["rates"] = {{"gamma_1", rates.gamma_1}, {"gamma_phi", rates.gamma_phi}};
  return j;
}

ordered_json peak_json(const Peak& p) {
  return {{"position", p.position},         {"hwhm", p.hwhm},
          {"weight", p.weight},             {"quadrature", p.quadrature},
          {"position_sigma", p.position_sigma}, {"hwhm_sigma", p.hwhm_sigma},
          {"weight_sigma", p.weight_sigma}};
}

struct FitOutcome {
  PeakSet peaks;
  bool converged{true};
  std::string message;
};

FitOutcome fit(const Spectrum& spectrum) {
  try {
    return {fit_peaks(spectrum), true, {}};
  } catch (const FitError& e) {
    return {e.best(), false, e.what()};
  }
}

double fitted_value(const PeakSet& peaks, double omega) {
  double sum = 0.0;
  for (const auto& p : peaks.peaks) sum += p(omega);
  return sum;
}

std::string regime_name(Regime r) { return r == Regime::Oscillating ? "oscillating" : "decaying"; }

/// Positions of the resolved oscillation lines, zero-frequency peaks dropped.
std::vector<double> line_positions(const PeakSet& peaks) {
  std::vector<double> out;
  for (const auto& p : peaks.peaks)
    if (!is_zero_frequency(p)) out.push_back(p.position);
  return out;
}

// --- simulate ---------------------------------------------------------------

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
  CsvWriter csv(path, {"t", "sz_q1", "sz_q2", "sz_tls"});
  for (std::size_t k = 0; k < traj.size(); ++k)
    csv.row({traj.times[k], traj.sz_q1.values[k], traj.sz_q2.values[k], traj.sz_tls.values[k]});
}

// --- extract ----------------------------------------------------------------

int extract_sweep(const ScenarioConfig& cfg, const CommandOptions& opts, const std::filesystem::path& dir) {
  const auto& deltas = cfg.delta_sweep->values;
  const double g = coupling_scale(cfg);
  double top = 0.0;
  if (cfg.spectrum.omega_max) {
    top = *cfg.spectrum.omega_max;
  } else {
    for (double d : deltas) top = std::max(top, 4.0 * std::sqrt(d * d + 4.0 * g * g));
  }
  if (!(top > 0.0)) throw ConfigError("spectrum: cannot choose a band for zero coupling; give spectrum.omega_max");
  const auto omegas = linear_grid(0.0, top, cfg.spectrum.n_points);

  std::vector<Spectrum> spectra(deltas.size());
  std::vector<FitOutcome> fits(deltas.size());
  parallel_for(deltas.size(), opts.parallel, [&](std::size_t i) {
    auto local = cfg;
    local.system.delta = deltas[i];
    const auto traj = simulate(local);
    std::optional<double> baseline;
    if (traj.asymptote) baseline = traj.asymptote->sz[0];
    spectra[i] = one_sided_fourier(traj.sz_q1, omegas, baseline);
    fits[i] = fit(spectra[i]);
  });

  CsvWriter csv(dir / "spectrum_map.csv", {"delta", "omega", "value"});
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    for (std::size_t k = 0; k < omegas.size(); ++k) csv.row({deltas[i], omegas[k], spectra[i].values[k]});
    ordered_json row;
    row["delta"] = deltas[i];
    if (cfg.single_probe) {
      row["expected"] = {single_probe_frequency(deltas[i], cfg.system.g1)};
    } else {
      const auto f = chain_frequencies(deltas[i], g);
      row["expected"] = {f[0], f[1], f[2]};
    }
    row["lines"] = line_positions(fits[i].peaks);
    row["converged"] = fits[i].converged;
    row["residual"] = fits[i].peaks.residual;
    rows.push_back(row);
  }
  ordered_json doc = scenario_json(cfg);
  doc["band"] = {{"omega_max", top}, {"n_points", omegas.size()}};
  doc["sweep"] = rows;
  write_json(dir / "sweep.json", doc);
  return kOk;
}

}  // namespace

int cmd_simulate(const CommandOptions& opts) {
  const auto cfg = load(opts);
  const auto traj = simulate(cfg);
  const auto dir = prepare_output_dir(opts.out);

  ordered_json doc = scenario_json(cfg);
  const auto grid = time_grid(cfg);
  doc["grid"] = {{"t_max", grid.t_max}, {"n_points", grid.n_points}};
  const double g = coupling_scale(cfg);
  if (g > 0.0) doc["regime"] = to_string(classify_rate_regime(g, cfg.bath.decoherence_rates()));
  doc["oscillation_strength"] = oscillation_strength(traj, {.require_settled = false});
  doc["settled"] = imbalance_settled(traj);
  const std::size_t last = traj.size() - 1;
  doc["final"] = {{"sz_q1", traj.sz_q1.values[last]},
                  {"sz_q2", traj.sz_q2.values[last]},
                  {"sz_tls", traj.sz_tls.values[last]}};
  if (traj.asymptote) {
    const auto& a = *traj.asymptote;
    doc["steady"] = {{"sz_q1", a.sz[0]}, {"sz_q2", a.sz[1]}, {"sz_tls", a.sz[2]}};
    if (a.state.size() > 0 && !cfg.single_probe)
      doc["steady_concurrence"] = concurrence(partial_trace(a.state, traj.space, {Site::Q1, Site::Q2}));
  }

  write_trajectory(dir / "trajectory.csv", traj);
  write_json(dir / "summary.json", doc);
  return kOk;
}

int cmd_extract(const CommandOptions& opts) {
  std::optional<ScenarioConfig> cfg;
  if (opts.config) cfg = load(opts);
  if (!cfg && !opts.input) throw ConfigError("extract needs --config PATH or --input CSV");
  const auto dir = prepare_output_dir(opts.out);
  if (cfg && !opts.input && cfg->delta_sweep) return extract_sweep(*cfg, opts, dir);

  TimeSeries series;
  std::optional<double> baseline;
  std::vector<double> omegas;
  ordered_json doc;
  if (opts.input) {
    const auto columns = read_csv_columns(*opts.input);
    if (columns.size() < 2 || columns[0].size() < 8)
      throw ConfigError(*opts.input + ": expected a header and at least 8 rows of t,value");
    series = {columns[0], columns[1]};
    series.validate();
    if (cfg) {
      omegas = frequency_grid(*cfg);
    } else {
      // without a scenario the band is a quarter of the Nyquist frequency
      const double dt = series.times[1] - series.times[0];
      omegas = linear_grid(0.0, std::numbers::pi / (4.0 * dt), 4096);
    }
    doc["source"] = *opts.input;
  } else {
    const auto traj = simulate(*cfg);
    series = traj.sz_q1;
    if (traj.asymptote) baseline = traj.asymptote->sz[0];
    omegas = frequency_grid(*cfg);
    doc = scenario_json(*cfg);
    doc["source"] = "simulation";
  }

  const auto spectrum = one_sided_fourier(series, omegas, baseline);
  const auto outcome = fit(spectrum);
  const auto& peaks = outcome.peaks;

  CsvWriter csv(dir / "spectrum.csv", {"omega", "value", "fit"});
  for (std::size_t k = 0; k < spectrum.size(); ++k)
    csv.row({spectrum.omegas[k], spectrum.values[k], fitted_value(peaks, spectrum.omegas[k])});

  doc["baseline"] = spectrum.baseline;
  doc["settled"] = spectrum.settled;
  doc["tail_offset"] = spectrum.tail_offset;
  doc["fit"] = {{"converged", outcome.converged}, {"iterations", peaks.iterations}, {"residual", peaks.residual}};
  if (!outcome.converged) doc["fit"]["message"] = outcome.message;
  doc["regime"] = regime_name(peaks.regime);
  doc["peaks"] = ordered_json::array();
  for (const auto& p : peaks.peaks) doc["peaks"].push_back(peak_json(p));

  if (peaks.regime == Regime::Oscillating) {
    ordered_json notes = ordered_json::array();
    try {
      const auto d = extract_detuned(peaks);
      doc["detuned"] = {{"g", d.g}, {"delta", d.delta}, {"frequencies", d.frequencies},
                        {"third_checked", d.third_checked}};
    } catch (const std::exception& e) {
      notes.push_back(std::string("detuned: ") + e.what());
    }
    try {
      const auto r = extract_on_resonance(peaks);
      ordered_json candidates = ordered_json::array();
      for (const auto& [a, b] : r.candidates) candidates.push_back({a, b});
      doc["resonant"] = {{"g", r.g},
                         {"gamma_1", r.gamma_1},
                         {"gamma_phi", r.gamma_phi},
                         {"g1", r.g1},
                         {"g2", r.g2},
                         {"g1_g2", r.g1 * r.g2},
                         {"candidates", candidates},
                         {"g_consistency", r.g_consistency},
                         {"residual", r.residual}};
    } catch (const std::exception& e) {
      notes.push_back(std::string("resonant: ") + e.what());
    }
    if (!notes.empty()) doc["notes"] = notes;
  }
  write_json(dir / "extraction.json", doc);
  return kOk;
}

int cmd_threshold(const CommandOptions& opts) {
  const auto cfg = load(opts);
  if (!cfg.threshold && !cfg.effective_rate)
    throw ConfigError("threshold needs a 'threshold' or 'effective_rate' section");
  if (cfg.single_probe) throw ConfigError("threshold maps are defined for the dual probe");
  const double g = cfg.system.g();
  if (!(g > 0.0)) throw ConfigError("system: threshold maps need a nonzero coupling");
  const auto dir = prepare_output_dir(opts.out);

  ordered_json doc = scenario_json(cfg);
  doc.erase("rates");
  const auto [transversal, longitudinal] = threshold_points(g);
  doc["thresholds"] = {{"gamma_1", transversal.gamma_1}, {"gamma_phi", longitudinal.gamma_phi}};

  if (cfg.threshold) {
    if (cfg.engine != Engine::RedfieldFull)
      throw ConfigError("threshold maps use engine 'redfield_full'");
    const auto strength = redfield_strength(cfg.system, state_space(cfg));
    const auto& spec = *cfg.threshold;
    const auto map = threshold_map(spec.gamma_1.values, spec.gamma_phi.values, strength, opts.parallel);

    std::vector<std::string> header{"gamma_phi/gamma_1"};
    for (double x : map.gamma_1) header.push_back(format_number(x));
    CsvWriter csv(dir / "threshold_map.csv", header);
    for (std::size_t r = 0; r < map.gamma_phi.size(); ++r) {
      std::vector<double> row{map.gamma_phi[r]};
      row.insert(row.end(), map.log10_m[r].begin(), map.log10_m[r].end());
      csv.row(row);
    }

    ordered_json drops, crossings;
    const std::pair<const char*, DecayChannel> axes[] = {{"gamma_1", DecayChannel::Transversal},
                                                         {"gamma_phi", DecayChannel::Longitudinal}};
    for (const auto& [name, axis] : axes) {
      const double thr = axis == DecayChannel::Transversal ? transversal.gamma_1 : longitudinal.gamma_phi;
      try {
        drops[name] = threshold_drop(map, axis, thr);
      } catch (const std::invalid_argument&) {
        drops[name] = nullptr;  // the grid does not straddle this threshold
      }
      if (!spec.crossings) continue;
      try {
        crossings[name] = locate_crossing(strength, axis, 0.8 * thr, 1.2 * thr);
      } catch (const std::exception&) {
        crossings[name] = nullptr;
      }
    }
    doc["grid"] = {{"gamma_1", map.gamma_1.size()}, {"gamma_phi", map.gamma_phi.size()}};
    doc["log10_m_drop"] = drops;
    if (spec.crossings) doc["crossings"] = crossings;
  }

  if (cfg.effective_rate) {
    CsvWriter csv(dir / "effective_rate.csv", {"gamma_1", "gamma_eff", "weak_formula", "strong_formula"});
    for (double gamma_1 : cfg.effective_rate->gamma_1.values) {
      const double rate = effective_decay_rate(transversal_two_qubit(cfg.system, gamma_1).q1,
                                               EffectiveRateMode::Average);
      const double strong = gamma_1 > transversal.gamma_1
                                ? effective_rate_strong(cfg.system, {gamma_1, 0.0}, DecayChannel::Transversal)
                                : kNaN;
      csv.row({gamma_1, rate, 0.5 * gamma_1, strong});
    }
    doc["effective_rate_points"] = cfg.effective_rate->gamma_1.values.size();
  }
  write_json(dir / "threshold.json", doc);
  return kOk;
}

int cmd_scan(const CommandOptions& opts) {
  const auto cfg = load(opts);
  if (!cfg.scan) throw ConfigError("scan needs a 'scan' section");
  const auto scan = scan_config(cfg);
  const auto dir = prepare_output_dir(opts.out);

  ordered_json doc;
  doc["units"] = cfg.units;
  doc["geometry"] = {{"h", scan.h},         {"d_qq", scan.d_qq},   {"tls_y", scan.tls_y},
                     {"g_ref", scan.g_ref}, {"single_probe", scan.single_probe}};
  const auto rates = cfg.bath.decoherence_rates();
  doc["rates"] = {{"gamma_1", rates.gamma_1}, {"gamma_phi", rates.gamma_phi}};
  doc["delta"] = scan.delta;

  switch (cfg.scan->mode) {
    case ScanMode::Geometry: {
      doc["mode"] = "geometry";
      CsvWriter csv(dir / "scan_profile.csv", {"y", "g1", "g2"});
      std::size_t best1 = 0, best2 = 0;
      std::vector<std::pair<double, double>> couplings;
      for (double y : scan.y_grid) couplings.push_back(coupling_at_position(scan, y));
      for (std::size_t i = 0; i < couplings.size(); ++i) {
        csv.row({scan.y_grid[i], couplings[i].first, couplings[i].second});
        if (couplings[i].first > couplings[best1].first) best1 = i;
        if (couplings[i].second > couplings[best2].second) best2 = i;
      }
      doc["g1_max_at"] = scan.y_grid[best1];
      if (!scan.single_probe) {
        doc["g2_max_at"] = scan.y_grid[best2];
        doc["peak_separation"] = std::abs(scan.y_grid[best2] - scan.y_grid[best1]);
      }
      write_json(dir / "characterization.json", doc);
      return kOk;
    }
    case ScanMode::Decay: {
      doc["mode"] = "decay";
      const auto profile = scan_decay_profile(scan, {.allow_mixed = cfg.scan->allow_mixed, .threads = opts.parallel});
      CsvWriter csv(dir / "scan_profile.csv", {"y", "g1", "g2", "gamma_eff"});
      std::size_t strong = 0;
      for (const auto& p : profile.points) {
        csv.row({p.y, p.g1, p.g2, p.gamma_eff});
        strong += p.strong;
      }
      doc["strong_positions"] = strong;
      doc["positions"] = profile.points.size();
      try {
        doc["tls_y"] = locate_tls(profile);
        doc["method"] = "decay-centroid";
      } catch (const std::invalid_argument& e) {
        doc["tls_y"] = nullptr;
        doc["notes"] = {std::string("locate: ") + e.what()};
      }
      write_json(dir / "characterization.json", doc);
      return kOk;
    }
    case ScanMode::Characterize: break;
  }

  doc["mode"] = "characterize";
  const auto report = characterize_tls(scan, {.threads = opts.parallel});
  CsvWriter csv(dir / "scan_profile.csv", {"y", "g1", "g2", "gamma_eff"});
  ordered_json points = ordered_json::array();
  for (const auto& p : report.profile.points) {
    csv.row({p.y, p.g1, p.g2, p.gamma_eff});
    ordered_json point{{"y", p.y}, {"gamma_q1", p.gamma_q1}};
    if (!scan.single_probe) point["gamma_q2"] = p.gamma_q2;
    if (p.detuned) point["detuned"] = {{"g", p.detuned->g}, {"delta", p.detuned->delta}};
    if (p.extraction)
      point["resonant"] = {{"g", p.extraction->g},         {"g1", p.extraction->g1},
                           {"g2", p.extraction->g2},       {"gamma_1", p.extraction->gamma_1},
                           {"gamma_phi", p.extraction->gamma_phi}};
    points.push_back(point);
  }
  auto optional_number = [](const std::optional<double>& v) -> ordered_json {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  doc["tls_y"] = report.y;
  doc["method"] = report.method;
  doc["oscillating_positions"] = report.oscillating_positions;
  doc["estimate"] = {{"g_ref", optional_number(report.g_ref)},
                     {"delta", optional_number(report.delta)},
                     {"gamma_1", optional_number(report.gamma_1)},
                     {"gamma_phi", optional_number(report.gamma_phi)}};
  doc["points"] = points;
  write_json(dir / "characterization.json", doc);
  return kOk;
}

int cmd_markov(const CommandOptions& opts) {
  const auto cfg = load(opts);
  if (cfg.single_probe) throw ConfigError("markov compares the two probes; it needs the dual probe");
  const auto gen = build_generator(cfg);
  const auto space = state_space(cfg);
  const double t_max = cfg.markov.t_max ? *cfg.markov.t_max : time_grid(cfg).t_max;
  const auto report = markovianity(gen, markovianity_states(space), t_max, cfg.markov.n_points);
  const auto dir = prepare_output_dir(opts.out);

  CsvWriter csv(dir / "trace_distance.csv", {"t", "distance"});
  for (std::size_t k = 0; k < report.times.size(); ++k) csv.row({report.times[k], report.distance[k]});

  ordered_json doc = scenario_json(cfg);
  doc["grid"] = {{"t_max", t_max}, {"n_points", cfg.markov.n_points}};
  doc["delta_d_up"] = report.delta_d_up;
  doc["delta_d_up_absolute"] = report.delta_d_up_absolute;
  const auto rates = cfg.bath.decoherence_rates();
  // the closed form covers equal couplings, resonance and a purely transversal bath
  if (rates.gamma_phi == 0.0 && cfg.system.delta == 0.0 && cfg.system.g1 == cfg.system.g2)
    doc["closed_form"] = delta_d_up_closed_form(cfg.system.g(), rates.gamma_1);
  ordered_json intervals = ordered_json::array();
  for (const auto& [a, b] : report.intervals) intervals.push_back({a, b});
  doc["increase_intervals"] = intervals;
  write_json(dir / "markovianity.json", doc);
  return kOk;
}

int run_command(const std::string& name, const CommandOptions& opts) {
  try {
    if (name == "simulate") return cmd_simulate(opts);
    if (name == "extract") return cmd_extract(opts);
    if (name == "threshold") return cmd_threshold(opts);
    if (name == "scan") return cmd_scan(opts);
    if (name == "markov") return cmd_markov(opts);
    std::cerr << "error: unknown command '" << name << "'\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const RegimeError& e) {
    std::cerr << "regime error: " << e.what() << '\n';
    return kRegime;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace dualprobe::cli
