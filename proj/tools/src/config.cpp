#include "config.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace dualprobe::cli {

namespace {

using nlohmann::json;

// Walks one JSON object, remembering which keys were read so leftovers can be
// reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_.empty() ? "top level must be an object" : "must be an object");
  }

  ~Section() = default;
  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  bool has(const std::string& key) const { return node_.contains(key); }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] void fail(const std::string& what, const std::string& key = "") const {
    const std::string where = key.empty() ? path_ : field(key);
    throw ConfigError(where.empty() ? what : "field '" + where + "': " + what);
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const json* v = find(key);
    if (!v) {
      if (fallback) return *fallback;
      fail("is required", key);
    }
    if (!v->is_number()) fail("expected a number", key);
    const double x = v->get<double>();
    if (!std::isfinite(x)) fail("must be finite", key);
    return x;
  }

  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) {
      seen_.insert(key);
      return std::nullopt;
    }
    return number(key);
  }

  std::size_t count(const std::string& key, std::optional<std::size_t> fallback = std::nullopt) {
    const json* v = find(key);
    if (!v) {
      if (fallback) return *fallback;
      fail("is required", key);
    }
    if (!v->is_number_integer() || v->get<long long>() < 0) fail("expected a non-negative integer", key);
    return v->get<std::size_t>();
  }

  bool flag(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail("expected true or false", key);
    return v->get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) fail("expected a string", key);
    return v->get<std::string>();
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (!seen_.count(it.key())) fail("unknown field", it.key());
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

Range parse_range(Section& parent, const std::string& key) {
  const json* node = parent.find(key);
  if (!node) parent.fail("is required", key);
  Section s(*node, parent.field(key));
  Range range;
  if (s.has("values")) {
    const json* values = s.find("values");
    if (!values->is_array() || values->empty()) s.fail("expected a non-empty array of numbers", "values");
    for (const auto& v : *values) {
      if (!v.is_number() || !std::isfinite(v.get<double>())) s.fail("expected numbers", "values");
      range.values.push_back(v.get<double>());
    }
  } else {
    const double lo = s.number("min"), hi = s.number("max");
    const std::size_t n = s.count("n");
    if (n < 2) s.fail("must be at least 2", "n");
    if (!(hi > lo)) s.fail("must exceed min", "max");
    for (std::size_t k = 0; k < n; ++k)
      range.values.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1));
  }
  s.finish();
  return range;
}

void require_non_negative(Section& s, const std::string& key, double value) {
  if (value < 0.0) s.fail("must be non-negative", key);
}

void parse_system(Section& root, ScenarioConfig& cfg) {
  const json* node = root.find("system");
  if (!node) root.fail("is required", "system");
  Section s(*node, "system");
  cfg.system.omega_q = s.number("omega_q", 1000.0);
  cfg.system.delta = s.number("delta", 0.0);
  cfg.single_probe = s.flag("single_probe", false);
  cfg.system.g1 = s.number("g1", cfg.scan ? std::optional<double>(0.0) : std::nullopt);
  cfg.system.g2 = s.number("g2", cfg.single_probe || cfg.scan ? std::optional<double>(0.0) : std::nullopt);
  if (!(cfg.system.omega_q > 0.0)) s.fail("must be positive", "omega_q");
  require_non_negative(s, "g1", cfg.system.g1);
  require_non_negative(s, "g2", cfg.system.g2);
  if (cfg.single_probe && cfg.system.g2 != 0.0) s.fail("must be 0 (or omitted) for a single probe", "g2");
  s.finish();
}

void parse_bath(Section& root, ScenarioConfig& cfg) {
  const json* node = root.find("bath");
  if (!node) root.fail("is required", "bath");
  Section s(*node, "bath");
  const bool direct = s.has("gamma_1") || s.has("gamma_phi");
  const bool microscopic = s.has("v_perp") || s.has("v_par") || s.has("spectral");
  if (direct == microscopic)
    s.fail("give either gamma_1/gamma_phi or v_perp/v_par/spectral, not both or neither");
  if (direct) {
    DecoherenceRates rates{s.number("gamma_1", 0.0), s.number("gamma_phi", 0.0)};
    require_non_negative(s, "gamma_1", rates.gamma_1);
    require_non_negative(s, "gamma_phi", rates.gamma_phi);
    cfg.bath.rates = rates;
  } else {
    BathCoupling bath;
    bath.v_perp = s.number("v_perp", 0.0);
    bath.v_par = s.number("v_par", 0.0);
    const json* spectral = s.find("spectral");
    if (!spectral) s.fail("is required with v_perp/v_par", "spectral");
    Section sp(*spectral, "bath.spectral");
    bath.spectral.c_zero = sp.number("c_zero");
    bath.spectral.c_split = sp.number("c_split");
    require_non_negative(sp, "c_zero", bath.spectral.c_zero);
    require_non_negative(sp, "c_split", bath.spectral.c_split);
    sp.finish();
    cfg.bath.coupling = bath;
  }
  s.finish();
}

ScanSpec parse_scan(const json& node) {
  Section s(node, "scan");
  ScanSpec scan;
  scan.h = s.number("h", 1.0);
  scan.d_qq = s.number("d_qq", 3.0);
  scan.tls_y = s.number("tls_y", 0.0);
  scan.y = parse_range(s, "y");
  scan.g_ref = s.optional_number("g_ref");
  scan.g_max = s.optional_number("g_max");
  if (scan.g_ref.has_value() == scan.g_max.has_value()) s.fail("give exactly one of g_ref and g_max");
  if (scan.g_ref && !(*scan.g_ref > 0.0)) s.fail("must be positive", "g_ref");
  if (scan.g_max && !(*scan.g_max > 0.0)) s.fail("must be positive", "g_max");
  if (!(scan.h > 0.0)) s.fail("must be positive", "h");
  require_non_negative(s, "d_qq", scan.d_qq);
  scan.single_probe = s.flag("single_probe", false);
  scan.allow_mixed = s.flag("allow_mixed", false);
  const std::string mode = s.text("mode", "decay");
  if (mode == "geometry") scan.mode = ScanMode::Geometry;
  else if (mode == "decay") scan.mode = ScanMode::Decay;
  else if (mode == "characterize") scan.mode = ScanMode::Characterize;
  else s.fail("expected geometry, decay or characterize", "mode");
  if (!std::is_sorted(scan.y.values.begin(), scan.y.values.end()) ||
      std::adjacent_find(scan.y.values.begin(), scan.y.values.end()) != scan.y.values.end())
    s.fail("positions must increase", "y");
  s.finish();
  return scan;
}

// Byte offset -> "line L, column C" for parse diagnostics.
std::string location(const std::string& text, std::size_t offset) {
  std::size_t line = 1, column = 1;
  for (std::size_t k = 0; k < std::min(offset, text.size()); ++k) {
    if (text[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

std::string to_string(Engine engine) {
  switch (engine) {
    case Engine::RedfieldFull: return "redfield_full";
    case Engine::RedfieldSecular: return "redfield_secular";
    case Engine::Lindblad: return "lindblad";
    case Engine::Analytic: return "analytic";
  }
  return "unknown";
}

Engine parse_engine(const std::string& name) {
  for (Engine e : {Engine::RedfieldFull, Engine::RedfieldSecular, Engine::Lindblad, Engine::Analytic})
    if (to_string(e) == name) return e;
  throw ConfigError("unknown engine '" + name + "' (expected redfield_full, redfield_secular, lindblad or analytic)");
}

DecoherenceRates BathSpec::decoherence_rates() const {
  return rates ? *rates : rates_from_coupling(*coupling);
}

BathCoupling BathSpec::bath_coupling() const {
  return coupling ? *coupling : coupling_from_rates(*rates);
}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports the byte just past the offending token
    throw ConfigError(source + ": malformed JSON at " + location(text, e.byte > 0 ? e.byte - 1 : 0));
  }

  ScenarioConfig cfg;
  try {
    Section root(doc, "");
    cfg.units = root.text("units", "g");
    if (const json* scan = root.find("scan")) cfg.scan = parse_scan(*scan);
    parse_system(root, cfg);
    parse_bath(root, cfg);
    cfg.engine = parse_engine(root.text("engine", "redfield_full"));

    const std::string subspace = root.text("subspace", "single_excitation");
    if (subspace == "full") cfg.subspace = Subspace::Full;
    else if (subspace == "single_excitation") cfg.subspace = Subspace::SingleExcitation;
    else root.fail("expected full or single_excitation", "subspace");
    if (cfg.single_probe && cfg.subspace != Subspace::Full)
      root.fail("a single probe always uses the full qubit-TLS space; set \"full\"", "subspace");

    if (const json* grid = root.find("grid")) {
      Section g(*grid, "grid");
      TimeGrid tg{g.number("t_max"), g.count("n_steps")};
      if (!(tg.t_max > 0.0)) g.fail("must be positive", "t_max");
      if (tg.n_points < 2) g.fail("must be at least 2", "n_steps");
      g.finish();
      cfg.grid = tg;
    }
    if (const json* spectrum = root.find("spectrum")) {
      Section s(*spectrum, "spectrum");
      cfg.spectrum.omega_max = s.optional_number("omega_max");
      cfg.spectrum.n_points = s.count("n_points", 4096);
      if (cfg.spectrum.omega_max && !(*cfg.spectrum.omega_max > 0.0)) s.fail("must be positive", "omega_max");
      if (cfg.spectrum.n_points < 16) s.fail("must be at least 16", "n_points");
      s.finish();
    }
    if (const json* sweep = root.find("sweep")) {
      Section s(*sweep, "sweep");
      cfg.delta_sweep = parse_range(s, "delta");
      s.finish();
    }
    if (const json* threshold = root.find("threshold")) {
      Section s(*threshold, "threshold");
      ThresholdSpec spec{parse_range(s, "gamma_1"), parse_range(s, "gamma_phi"), s.flag("crossings", true)};
      for (double v : spec.gamma_1.values)
        if (v < 0.0) s.fail("rates must be non-negative", "gamma_1");
      for (double v : spec.gamma_phi.values)
        if (v < 0.0) s.fail("rates must be non-negative", "gamma_phi");
      s.finish();
      cfg.threshold = spec;
    }
    if (const json* rate = root.find("effective_rate")) {
      Section s(*rate, "effective_rate");
      cfg.effective_rate = EffectiveRateSpec{parse_range(s, "gamma_1")};
      for (double v : cfg.effective_rate->gamma_1.values)
        if (!(v > 0.0)) s.fail("rates must be positive", "gamma_1");
      s.finish();
    }
    if (const json* markov = root.find("markov")) {
      Section s(*markov, "markov");
      cfg.markov.t_max = s.optional_number("t_max");
      cfg.markov.n_points = s.count("n_points", 20000);
      if (cfg.markov.t_max && !(*cfg.markov.t_max > 0.0)) s.fail("must be positive", "t_max");
      if (cfg.markov.n_points < 2) s.fail("must be at least 2", "n_points");
      s.finish();
    }
    root.finish();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

}  // namespace dualprobe::cli
