#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fasec/geometry.hpp"

namespace fasec {

enum class ArrayType { fa, fpa };
enum class Realization { digital, hybrid };

/// One compared scheme: array type × AN flag × precoder realization.
/// Tags look like `fa-an-digital` or `fpa-bf-hybrid`.
struct Variant {
  ArrayType array = ArrayType::fa;
  bool with_an = true;
  Realization realization = Realization::digital;

  std::string tag() const;
  static Variant parse(const std::string& tag);
  static std::vector<Variant> parse_list(const std::string& csv);
  static std::vector<Variant> all();

  friend bool operator==(const Variant&, const Variant&) = default;
};

const char* to_string(ArrayType a);

enum class SweepKind { none, power_dbm, eve_distance_m };
const char* to_string(SweepKind k);

struct FieldGridOptions {
  int nx = 201;
  int ny = 201;
  double x_min = 0.5;
  double x_max = 20.0;
  double y_min = 0.0;
  double y_max = 20.0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ScenarioGeometry scenario;
  ChannelModel channel_model = ChannelModel::fresnel;

  SweepKind sweep = SweepKind::power_dbm;
  std::vector<double> sweep_values{-10.0, -7.5, -5.0, -2.5, 0.0, 2.5, 5.0, 7.5, 10.0};
  double power_dbm = 10.0;  // P_t whenever power is not the swept quantity

  int trials = 100;
  std::uint64_t seed = 1;
  std::vector<Variant> variants = Variant::all();
  std::string output_dir = "out";
  int threads = 0;  // 0 → hardware concurrency

  // Optimizer knobs.
  double bcd_tol_rel = 1e-4;
  int bcd_max_iters = 200;
  bool bcd_balance = true;
  double select_eta = 0.5;
  int select_min_batch = 1;
  int select_stage_iters = 30;
  int select_final_iters = 200;
  bool select_hybrid_scores = false;
  int hybrid_max_sweeps = 100;
  double hybrid_tol_rel = 1e-6;

  FieldGridOptions field;

  /// Finalizes the scenario and checks every field. Throws ConfigError.
  void validate();
};

/// Applies one dotted `key = value` setting. Unknown keys and malformed
/// values throw ConfigError.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Parses a flat `key = value` document. `#` starts a comment.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});

/// Reads and parses a config file.
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});

/// Maps FASEC_SCENARIO__BOB__DISTANCE_M to scenario.bob.distance_m; returns
/// an empty string for names without the FASEC_ prefix.
std::string env_name_to_key(const std::string& name);

/// Collects FASEC_* overrides from an environment block (`environ` layout),
/// sorted by key.
std::map<std::string, std::string> env_overrides(char** envp);

/// Canonical `key = value` dump; identical configs give identical text.
std::string canonical_text(const ExperimentConfig& cfg);

/// Parses "a,b,c" or a range "start:step:stop" (inclusive of stop).
std::vector<double> parse_number_list(const std::string& text);

}  // namespace fasec
