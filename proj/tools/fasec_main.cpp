// fasec: Monte Carlo sweeps, field maps and port reports for fluid-antenna
// secure transmission.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fasec/config.hpp"
#include "fasec/error.hpp"
#include "fasec/experiment.hpp"

extern char** environ;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitConfig = 2;
constexpr int kExitTrials = 3;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> threads;
  std::string out_dir;
  std::string variants;
  std::vector<std::string> settings;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config_path, "key = value config file");
  sub->add_option("--seed", f.seed, "master RNG seed");
  sub->add_option("--trials", f.trials, "Monte Carlo trials per sweep point");
  sub->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  sub->add_option("--out", f.out_dir, "output directory");
  sub->add_option("--variant", f.variants, "comma-separated variant tags, e.g. fa-an-digital");
  sub->add_option("--set", f.settings, "extra key=value override (repeatable)");
}

fasec::ExperimentConfig build_config(const CommonFlags& f) {
  fasec::ExperimentConfig cfg;
  if (!f.config_path.empty()) cfg = fasec::load_config_file(f.config_path);
  for (const auto& [key, value] : fasec::env_overrides(environ)) {
    fasec::apply_setting(cfg, key, value);
  }
  for (const auto& s : f.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw fasec::ConfigError("--set expects key=value: " + s);
    fasec::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.trials) cfg.trials = *f.trials;
  if (f.threads) cfg.threads = *f.threads;
  if (!f.out_dir.empty()) cfg.output_dir = f.out_dir;
  if (!f.variants.empty()) cfg.variants = fasec::Variant::parse_list(f.variants);
  cfg.validate();
  return cfg;
}

std::vector<std::pair<std::string, double>> gap_observations(
    const std::vector<fasec::ResultRow>& rows) {
  std::map<std::pair<std::string, double>, double> sr;
  for (const auto& r : rows) sr[{r.variant, r.sweep_value}] = r.mean_secrecy_rate;
  std::vector<std::pair<std::string, double>> out;
  for (const auto& r : rows) {
    if (r.variant.rfind("fa-", 0) != 0) continue;
    const std::string twin = "fpa-" + r.variant.substr(3);
    const auto it = sr.find({twin, r.sweep_value});
    if (it == sr.end()) continue;
    out.emplace_back("sr_gap[" + r.variant.substr(3) + "]@" + fasec::format_number(r.sweep_value),
                     r.mean_secrecy_rate - it->second);
  }
  return out;
}

void print_rows(const std::vector<fasec::ResultRow>& rows) {
  for (const auto& r : rows) {
    std::printf("%-16s %s=%-8g SR=%.4f R_B=%.4f R_E=%.4f AN=%.4f trials=%d failed=%d\n",
                r.variant.c_str(), r.sweep_param.c_str(), r.sweep_value, r.mean_secrecy_rate,
                r.mean_rate_bob, r.mean_rate_eve, r.mean_an_fraction, r.trials, r.failed);
  }
}

int run_sweep_command(const std::string& command, fasec::ExperimentConfig cfg,
                      fasec::SweepKind kind) {
  if (cfg.sweep != kind) {
    // The config described another sweep; fall back to the default grid.
    cfg.sweep = kind;
    cfg.sweep_values = kind == fasec::SweepKind::power_dbm
                           ? fasec::parse_number_list("-10:2.5:10")
                           : fasec::parse_number_list("1:1:30");
    cfg.validate();
  }
  const fasec::RunReport report = fasec::run_sweep(cfg);
  std::filesystem::create_directories(cfg.output_dir);
  const std::string stem = kind == fasec::SweepKind::power_dbm ? "power_sweep" : "distance_sweep";
  fasec::write_results_csv(cfg.output_dir + "/" + stem + ".csv", report.rows);
  fasec::write_manifest(cfg.output_dir + "/manifest_" + command + ".json", cfg, command,
                        report.timing, report.total_trials, report.failed_trials,
                        gap_observations(report.rows));
  print_rows(report.rows);
  for (const auto& msg : report.failure_messages) std::fprintf(stderr, "failed: %s\n", msg.c_str());
  if (report.failure_budget_exceeded()) {
    std::fprintf(stderr, "%d of %d trials failed (limit 10%%)\n", report.failed_trials,
                 report.total_trials);
    return kExitTrials;
  }
  return kExitOk;
}

int run_field_command(const fasec::ExperimentConfig& cfg) {
  const fasec::FieldReport report = fasec::run_field_maps(cfg);
  std::vector<std::pair<std::string, double>> obs;
  for (const auto& s : report.summaries) {
    obs.emplace_back("rsp_bob_dbm[" + s.variant + "]", s.rsp_bob_dbm);
    obs.emplace_back("rsp_eve_dbm[" + s.variant + "]", s.rsp_eve_dbm);
    obs.emplace_back("inp_bob_dbm[" + s.variant + "]", s.inp_bob_dbm);
    obs.emplace_back("inp_eve_dbm[" + s.variant + "]", s.inp_eve_dbm);
    std::printf("%-16s RSP bob=%.2f eve=%.2f dBm  INP bob=%.2f eve=%.2f dBm\n", s.variant.c_str(),
                s.rsp_bob_dbm, s.rsp_eve_dbm, s.inp_bob_dbm, s.inp_eve_dbm);
  }
  fasec::write_manifest(cfg.output_dir + "/manifest_field-map.json", cfg, "field-map",
                        report.timing, 1, 0, obs);
  return kExitOk;
}

int run_port_command(const fasec::ExperimentConfig& cfg) {
  const fasec::PortReport report = fasec::run_port_report(cfg);
  std::map<std::string, std::vector<int>> selected;
  for (const auto& r : report.rows) {
    if (r.selected) selected[r.variant].push_back(r.port);
  }
  for (const auto& [variant, ports] : selected) {
    std::printf("%-16s selected:", variant.c_str());
    for (int p : ports) std::printf(" %d", p);
    std::printf("\n");
  }
  fasec::write_manifest(cfg.output_dir + "/manifest_port-report.json", cfg, "port-report",
                        report.timing, 1, 0);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure fluid-antenna beamforming experiments"};
  app.require_subcommand(1);

  CommonFlags power_flags, distance_flags, field_flags, port_flags;
  CLI::App* power = app.add_subcommand("power-sweep", "secrecy rate versus transmit power");
  CLI::App* distance = app.add_subcommand("distance-sweep", "secrecy rate versus Eve distance");
  CLI::App* field = app.add_subcommand("field-map", "RSP/INP maps of optimized states");
  CLI::App* port = app.add_subcommand("port-report", "selected ports and per-port power");
  add_common(power, power_flags);
  add_common(distance, distance_flags);
  add_common(field, field_flags);
  add_common(port, port_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (power->parsed()) {
      return run_sweep_command("power-sweep", build_config(power_flags),
                               fasec::SweepKind::power_dbm);
    }
    if (distance->parsed()) {
      return run_sweep_command("distance-sweep", build_config(distance_flags),
                               fasec::SweepKind::eve_distance_m);
    }
    if (field->parsed()) return run_field_command(build_config(field_flags));
    if (port->parsed()) return run_port_command(build_config(port_flags));
  } catch (const fasec::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const fasec::TrialFailureError& e) {
    std::fprintf(stderr, "trial failure: %s\n", e.what());
    return kExitTrials;
  } catch (const fasec::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s (diagnostic %g)\n", e.what(), e.diagnostic());
    return kExitNumerical;
  }
  return kExitConfig;
}
