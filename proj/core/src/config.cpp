#include "fasec/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "fasec/error.hpp"

namespace fasec {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  return parts;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(out)) {
    throw ConfigError("invalid number for " + key + ": '" + text + "'");
  }
  return out;
}

long long to_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("invalid integer for " + key + ": '" + text + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& text) {
  const long long v = to_integer(key, text);
  if (v < -2147483647LL || v > 2147483647LL) throw ConfigError(key + " is out of range");
  return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t out = 0;
  int base = 10;
  std::size_t skip = 0;
  if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) {
    base = 16;
    skip = 2;
  }
  const auto [ptr, ec] = std::from_chars(t.data() + skip, t.data() + t.size(), out, base);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.size() == skip) {
    throw ConfigError("invalid unsigned integer for " + key + ": '" + text + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& text) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + text + "'");
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double deg(double rad) { return rad * 180.0 / kPi; }
double rad(double deg) { return deg * kPi / 180.0; }

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

void receiver_setting(ReceiverGeometry& r, const std::string& field, const std::string& key,
                      const std::string& value) {
  if (field == "distance_m") {
    r.distance_m = to_double(key, value);
  } else if (field == "azimuth_deg") {
    r.azimuth_rad = rad(to_double(key, value));
  } else if (field == "num_elements") {
    r.num_elements = to_int(key, value);
  } else if (field == "element_spacing_m") {
    r.element_spacing_m = to_double(key, value);
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["name"] = [](auto& c, auto&, auto& v) { c.name = trim(v); };
    t["seed"] = [](auto& c, auto& k, auto& v) { c.seed = to_u64(k, v); };
    t["trials"] = [](auto& c, auto& k, auto& v) { c.trials = to_int(k, v); };
    t["threads"] = [](auto& c, auto& k, auto& v) { c.threads = to_int(k, v); };
    t["output_dir"] = [](auto& c, auto&, auto& v) { c.output_dir = trim(v); };
    t["variants"] = [](auto& c, auto&, auto& v) { c.variants = Variant::parse_list(v); };
    t["power_dbm"] = [](auto& c, auto& k, auto& v) { c.power_dbm = to_double(k, v); };
    t["channel.model"] = [](auto& c, auto&, auto& v) {
      c.channel_model = parse_channel_model(trim(v));
    };

    t["scenario.carrier_freq_hz"] = [](auto& c, auto& k, auto& v) {
      c.scenario.carrier_freq_hz = to_double(k, v);
    };
    t["scenario.num_ports"] = [](auto& c, auto& k, auto& v) {
      c.scenario.num_ports = to_int(k, v);
    };
    t["scenario.num_active"] = [](auto& c, auto& k, auto& v) {
      c.scenario.num_active = to_int(k, v);
    };
    t["scenario.port_spacing_m"] = [](auto& c, auto& k, auto& v) {
      c.scenario.port_spacing_m = to_double(k, v);
    };
    t["scenario.noise_power_dbm"] = [](auto& c, auto& k, auto& v) {
      c.scenario.noise_power_w = dbm_to_watts(to_double(k, v));
    };
    t["scenario.streams"] = [](auto& c, auto& k, auto& v) { c.scenario.streams = to_int(k, v); };
    t["scenario.rf_chains"] = [](auto& c, auto& k, auto& v) {
      c.scenario.rf_chains = to_int(k, v);
    };

    t["sweep.kind"] = [](auto& c, auto& k, auto& v) {
      const std::string s = trim(v);
      if (s == "power_dbm") {
        c.sweep = SweepKind::power_dbm;
      } else if (s == "eve_distance_m") {
        c.sweep = SweepKind::eve_distance_m;
      } else if (s == "none") {
        c.sweep = SweepKind::none;
      } else {
        throw ConfigError("invalid value for " + k + ": '" + s + "'");
      }
    };
    t["sweep.values"] = [](auto& c, auto&, auto& v) { c.sweep_values = parse_number_list(v); };

    t["bcd.tol_rel"] = [](auto& c, auto& k, auto& v) { c.bcd_tol_rel = to_double(k, v); };
    t["bcd.max_iters"] = [](auto& c, auto& k, auto& v) { c.bcd_max_iters = to_int(k, v); };
    t["bcd.balance"] = [](auto& c, auto& k, auto& v) { c.bcd_balance = to_bool(k, v); };
    t["select.eta"] = [](auto& c, auto& k, auto& v) { c.select_eta = to_double(k, v); };
    t["select.min_batch"] = [](auto& c, auto& k, auto& v) {
      c.select_min_batch = to_int(k, v);
    };
    t["select.stage_iters"] = [](auto& c, auto& k, auto& v) {
      c.select_stage_iters = to_int(k, v);
    };
    t["select.final_iters"] = [](auto& c, auto& k, auto& v) {
      c.select_final_iters = to_int(k, v);
    };
    t["select.score_source"] = [](auto& c, auto& k, auto& v) {
      const std::string s = trim(v);
      if (s == "digital") {
        c.select_hybrid_scores = false;
      } else if (s == "hybrid") {
        c.select_hybrid_scores = true;
      } else {
        throw ConfigError("invalid value for " + k + ": '" + s + "'");
      }
    };
    t["hybrid.max_sweeps"] = [](auto& c, auto& k, auto& v) {
      c.hybrid_max_sweeps = to_int(k, v);
    };
    t["hybrid.tol_rel"] = [](auto& c, auto& k, auto& v) { c.hybrid_tol_rel = to_double(k, v); };

    t["field.nx"] = [](auto& c, auto& k, auto& v) { c.field.nx = to_int(k, v); };
    t["field.ny"] = [](auto& c, auto& k, auto& v) { c.field.ny = to_int(k, v); };
    t["field.x_min"] = [](auto& c, auto& k, auto& v) { c.field.x_min = to_double(k, v); };
    t["field.x_max"] = [](auto& c, auto& k, auto& v) { c.field.x_max = to_double(k, v); };
    t["field.y_min"] = [](auto& c, auto& k, auto& v) { c.field.y_min = to_double(k, v); };
    t["field.y_max"] = [](auto& c, auto& k, auto& v) { c.field.y_max = to_double(k, v); };
    return t;
  }();
  return table;
}

}  // namespace

// ---------------------------------------------------------------------------
// Variants
// ---------------------------------------------------------------------------

const char* to_string(ArrayType a) { return a == ArrayType::fa ? "fa" : "fpa"; }

const char* to_string(SweepKind k) {
  switch (k) {
    case SweepKind::power_dbm:
      return "power_dbm";
    case SweepKind::eve_distance_m:
      return "eve_distance_m";
    case SweepKind::none:
      break;
  }
  return "none";
}

std::string Variant::tag() const {
  std::string t = to_string(array);
  t += with_an ? "-an-" : "-bf-";
  t += realization == Realization::digital ? "digital" : "hybrid";
  return t;
}

Variant Variant::parse(const std::string& tag) {
  const auto parts = split(trim(tag), '-');
  if (parts.size() != 3) throw ConfigError("invalid variant tag: '" + tag + "'");
  Variant v;
  if (parts[0] == "fa") {
    v.array = ArrayType::fa;
  } else if (parts[0] == "fpa") {
    v.array = ArrayType::fpa;
  } else {
    throw ConfigError("invalid array type in variant tag: '" + tag + "'");
  }
  if (parts[1] == "an") {
    v.with_an = true;
  } else if (parts[1] == "bf") {
    v.with_an = false;
  } else {
    throw ConfigError("invalid AN flag in variant tag: '" + tag + "'");
  }
  if (parts[2] == "digital") {
    v.realization = Realization::digital;
  } else if (parts[2] == "hybrid") {
    v.realization = Realization::hybrid;
  } else {
    throw ConfigError("invalid realization in variant tag: '" + tag + "'");
  }
  return v;
}

std::vector<Variant> Variant::parse_list(const std::string& csv) {
  std::vector<Variant> out;
  for (const auto& p : split(csv, ',')) {
    if (p.empty()) continue;
    const Variant v = parse(p);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  if (out.empty()) throw ConfigError("variant list is empty");
  return out;
}

std::vector<Variant> Variant::all() {
  std::vector<Variant> out;
  for (ArrayType a : {ArrayType::fa, ArrayType::fpa}) {
    for (bool an : {true, false}) {
      for (Realization r : {Realization::digital, Realization::hybrid}) {
        out.push_back({a, an, r});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

std::vector<double> parse_number_list(const std::string& text) {
  const std::string t = trim(text);
  std::vector<double> out;
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) throw ConfigError("range must read start:step:stop");
    const double start = to_double("range", parts[0]);
    const double step = to_double("range", parts[1]);
    const double stop = to_double("range", parts[2]);
    if (!(step > 0.0) || stop < start) throw ConfigError("range needs step > 0, stop ≥ start");
    const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    if (n > 1'000'000) throw ConfigError("range has too many points");
    for (long long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  for (const auto& p : split(t, ',')) {
    if (!p.empty()) out.push_back(to_double("list", p));
  }
  return out;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const std::string k = trim(key);
  const auto& table = setters();
  const auto it = table.find(k);
  if (it != table.end()) {
    it->second(cfg, k, value);
    return;
  }
  for (const char* who : {"bob", "eve"}) {
    const std::string prefix = std::string("scenario.") + who + ".";
    if (k.rfind(prefix, 0) == 0) {
      ReceiverGeometry& r = std::string(who) == "bob" ? cfg.scenario.bob : cfg.scenario.eve;
      receiver_setting(r, k.substr(prefix.size()), k, value);
      return;
    }
  }
  throw ConfigError("unknown config key: " + k);
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::string env_name_to_key(const std::string& name) {
  static const std::string prefix = "FASEC_";
  if (name.rfind(prefix, 0) != 0 || name.size() == prefix.size()) return {};
  std::string rest = name.substr(prefix.size());
  std::string key;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    if (rest[i] == '_' && i + 1 < rest.size() && rest[i + 1] == '_') {
      key += '.';
      ++i;
    } else {
      key += static_cast<char>(std::tolower(static_cast<unsigned char>(rest[i])));
    }
  }
  return key;
}

std::map<std::string, std::string> env_overrides(char** envp) {
  std::map<std::string, std::string> out;
  if (envp == nullptr) return out;
  for (char** e = envp; *e != nullptr; ++e) {
    const std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = env_name_to_key(entry.substr(0, eq));
    if (!key.empty()) out[key] = entry.substr(eq + 1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation and canonical form
// ---------------------------------------------------------------------------

void ExperimentConfig::validate() {
  scenario.finalize();
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (threads < 0) throw ConfigError("threads must be nonnegative");
  if (variants.empty()) throw ConfigError("at least one variant is required");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  if (sweep != SweepKind::none) {
    if (sweep_values.empty()) throw ConfigError("sweep values must be nonempty");
    if (!std::is_sorted(sweep_values.begin(), sweep_values.end())) {
      throw ConfigError("sweep values must be sorted");
    }
    if (sweep == SweepKind::eve_distance_m &&
        std::any_of(sweep_values.begin(), sweep_values.end(), [](double d) { return d <= 0; })) {
      throw ConfigError("Eve distances must be positive");
    }
  }
  if (!(bcd_tol_rel > 0.0)) throw ConfigError("bcd.tol_rel must be positive");
  if (bcd_max_iters < 1) throw ConfigError("bcd.max_iters must be positive");
  if (!(select_eta > 0.0 && select_eta < 1.0)) throw ConfigError("select.eta must lie in (0, 1)");
  if (select_min_batch < 1) throw ConfigError("select.min_batch must be positive");
  if (select_stage_iters < 1 || select_final_iters < 1) {
    throw ConfigError("selection iteration budgets must be positive");
  }
  if (hybrid_max_sweeps < 1) throw ConfigError("hybrid.max_sweeps must be positive");
  if (!(hybrid_tol_rel > 0.0)) throw ConfigError("hybrid.tol_rel must be positive");
  if (field.nx < 1 || field.ny < 1) throw ConfigError("field grid needs at least one point");
  if (field.x_max < field.x_min || field.y_max < field.y_min) {
    throw ConfigError("field grid bounds are inverted");
  }
}

std::string canonical_text(const ExperimentConfig& c) {
  std::ostringstream o;
  auto kv = [&](const std::string& k, const std::string& v) { o << k << " = " << v << '\n'; };
  auto receiver = [&](const std::string& who, const ReceiverGeometry& r) {
    kv("scenario." + who + ".distance_m", fmt(r.distance_m));
    kv("scenario." + who + ".azimuth_deg", fmt(deg(r.azimuth_rad)));
    kv("scenario." + who + ".num_elements", std::to_string(r.num_elements));
    kv("scenario." + who + ".element_spacing_m", fmt(r.element_spacing_m));
  };
  kv("name", c.name);
  kv("seed", std::to_string(c.seed));
  kv("trials", std::to_string(c.trials));
  std::string tags;
  for (const auto& v : c.variants) tags += (tags.empty() ? "" : ",") + v.tag();
  kv("variants", tags);
  kv("power_dbm", fmt(c.power_dbm));
  kv("channel.model", to_string(c.channel_model));
  kv("scenario.carrier_freq_hz", fmt(c.scenario.carrier_freq_hz));
  kv("scenario.num_ports", std::to_string(c.scenario.num_ports));
  kv("scenario.num_active", std::to_string(c.scenario.num_active));
  kv("scenario.port_spacing_m", fmt(c.scenario.port_spacing_m));
  kv("scenario.noise_power_dbm", fmt(watts_to_dbm(c.scenario.noise_power_w)));
  kv("scenario.streams", std::to_string(c.scenario.streams));
  kv("scenario.rf_chains", std::to_string(c.scenario.rf_chains));
  receiver("bob", c.scenario.bob);
  receiver("eve", c.scenario.eve);
  kv("sweep.kind", to_string(c.sweep));
  std::string values;
  for (double x : c.sweep_values) values += (values.empty() ? "" : ",") + fmt(x);
  kv("sweep.values", values);
  kv("bcd.tol_rel", fmt(c.bcd_tol_rel));
  kv("bcd.max_iters", std::to_string(c.bcd_max_iters));
  kv("bcd.balance", c.bcd_balance ? "true" : "false");
  kv("select.eta", fmt(c.select_eta));
  kv("select.min_batch", std::to_string(c.select_min_batch));
  kv("select.stage_iters", std::to_string(c.select_stage_iters));
  kv("select.final_iters", std::to_string(c.select_final_iters));
  kv("select.score_source", c.select_hybrid_scores ? "hybrid" : "digital");
  kv("hybrid.max_sweeps", std::to_string(c.hybrid_max_sweeps));
  kv("hybrid.tol_rel", fmt(c.hybrid_tol_rel));
  kv("field.nx", std::to_string(c.field.nx));
  kv("field.ny", std::to_string(c.field.ny));
  kv("field.x_min", fmt(c.field.x_min));
  kv("field.x_max", fmt(c.field.x_max));
  kv("field.y_min", fmt(c.field.y_min));
  kv("field.y_max", fmt(c.field.y_max));
  return o.str();
}

}  // namespace fasec
