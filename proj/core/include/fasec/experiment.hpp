#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fasec/bcd.hpp"
#include "fasec/config.hpp"
#include "fasec/geometry.hpp"
#include "fasec/hybrid.hpp"

namespace fasec {

/// splitmix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Per-trial stream seed. Depends only on (master, trial, array type), so
/// AN and BF-only runs of one array share their initial data precoder.
std::uint64_t trial_seed(std::uint64_t master, int trial, ArrayType array);

/// N_t ports spread uniformly over the rail: round(linspace(0, L − 1, N_t)).
std::vector<int> fpa_support(int num_ports, int num_active);

/// Everything one pipeline run produces for a fixed (array, AN flag, trial).
struct PipelineOutput {
  std::vector<int> support;
  MatrixXcd W;  // balanced digital precoder on `support`
  VectorXcd v;
  BcdResult refit;
  std::optional<HybridRealization> hybrid;
};

/// FA: prune–refit selection then a long refit. FPA: fixed uniform support
/// then a single BCD run. Hybrid fitting runs when `with_hybrid` is set.
PipelineOutput run_pipeline(const ExperimentConfig& cfg, const ChannelPair& channels,
                            ArrayType array, bool with_an, bool with_hybrid,
                            double power_budget_w, std::uint64_t seed);

struct TrialMetrics {
  double secrecy_rate = 0.0;  // clamped
  double rate_bob = 0.0;
  double rate_eve = 0.0;
  double an_fraction = 0.0;   // ‖v‖²/P_t
};

TrialMetrics evaluate_state(const ChannelPair& channels, const std::vector<int>& support,
                            const MatrixXcd& W, const VectorXcd& v, double power_budget_w);

struct ResultRow {
  std::string variant;
  std::string sweep_param;
  double sweep_value = 0.0;
  double mean_secrecy_rate = 0.0;
  double mean_rate_bob = 0.0;
  double mean_rate_eve = 0.0;
  double mean_an_fraction = 0.0;
  int trials = 0;  // successful trials
  int failed = 0;
};

struct VariantTiming {
  std::string variant;
  double seconds = 0.0;
};

struct RunReport {
  std::vector<ResultRow> rows;  // ordered by (variant, sweep value)
  std::vector<VariantTiming> timing;
  int total_trials = 0;
  int failed_trials = 0;
  std::vector<std::string> failure_messages;

  /// More than 10% of the trials failed.
  bool failure_budget_exceeded() const;
};

/// Monte Carlo sweep over P_t (dBm) or Eve distance (m), per cfg.sweep.
RunReport run_sweep(const ExperimentConfig& cfg);

/// Power sweep with cfg.sweep forced to power_dbm.
RunReport run_power_sweep(ExperimentConfig cfg);
/// Distance sweep with cfg.sweep forced to eve_distance_m.
RunReport run_distance_sweep(ExperimentConfig cfg);

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows);

struct FieldSummary {
  std::string variant;
  double rsp_bob_dbm = 0.0;
  double rsp_eve_dbm = 0.0;
  double inp_bob_dbm = 0.0;
  double inp_eve_dbm = 0.0;
};

struct FieldReport {
  std::vector<FieldSummary> summaries;
  std::vector<VariantTiming> timing;
};

/// Optimizes trial 0 of every digital variant at cfg.power_dbm and writes
/// field_<tag>.csv grids and field_summary.csv to cfg.output_dir.
FieldReport run_field_maps(const ExperimentConfig& cfg);

struct PortReportRow {
  std::string variant;
  int port = 0;  // 0-based rail index
  double position_m = 0.0;
  bool selected = false;
  double power_w = 0.0;
};

struct PortReport {
  std::vector<PortReportRow> rows;
  std::vector<VariantTiming> timing;
};

/// Per-port placement and power of trial 0 for every digital variant;
/// writes port_report.csv.
PortReport run_port_report(const ExperimentConfig& cfg);

/// run manifest: config text and hash, seed, timing and free-form notes.
void write_manifest(const std::string& path, const ExperimentConfig& cfg,
                    const std::string& command, const std::vector<VariantTiming>& timing,
                    int total_trials, int failed_trials,
                    const std::vector<std::pair<std::string, double>>& observations = {});

/// 64-bit FNV-1a of the canonical config text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Digits-preserving number formatting used in every CSV.
std::string format_number(double x);

}  // namespace fasec
