#include "fasec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include <json.hpp>

#include "fasec/error.hpp"
#include "fasec/port_selection.hpp"
#include "fasec/secrecy.hpp"

namespace fasec {

namespace {

constexpr double kMaxFailureFraction = 0.10;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Runs job(i) for i in [0, count) on `threads` workers. The first exception
/// thrown by any job is rethrown after all workers have joined.
template <class Job>
void parallel_for(std::size_t count, int threads, Job&& job) {
  unsigned n = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
  n = std::max(1u, std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

struct Group {
  ArrayType array;
  bool with_an;
  bool want_digital = false;
  bool want_hybrid = false;
};

std::vector<Group> groups_for(const std::vector<Variant>& variants) {
  std::vector<Group> groups;
  for (const auto& v : variants) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.array == v.array && g.with_an == v.with_an;
    });
    if (it == groups.end()) {
      groups.push_back({v.array, v.with_an});
      it = groups.end() - 1;
    }
    (v.realization == Realization::digital ? it->want_digital : it->want_hybrid) = true;
  }
  return groups;
}

std::size_t group_index(const std::vector<Group>& groups, const Variant& v) {
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].array == v.array && groups[i].with_an == v.with_an) return i;
  }
  throw ConfigError("variant without a pipeline group");
}

ExperimentConfig at_sweep_point(const ExperimentConfig& cfg, double value, double* power_w) {
  ExperimentConfig c = cfg;
  double dbm = cfg.power_dbm;
  if (cfg.sweep == SweepKind::power_dbm) {
    dbm = value;
  } else if (cfg.sweep == SweepKind::eve_distance_m) {
    c.scenario.eve.distance_m = value;
  }
  *power_w = dbm_to_watts(dbm);
  c.validate();
  return c;
}

struct TaskResult {
  bool digital_ok = false;
  bool hybrid_ok = false;
  TrialMetrics digital;
  TrialMetrics hybrid;
  std::string error;
  double seconds = 0.0;
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

BeamformerState state_of(const PipelineOutput& p, bool hybrid, double power_w) {
  BeamformerState s;
  s.support = p.support;
  s.power_budget = power_w;
  if (hybrid) {
    s.W = p.hybrid->W_HB();
    s.v = p.hybrid->v_HB();
  } else {
    s.W = p.W;
    s.v = p.v;
  }
  return s;
}

std::vector<VariantTiming> timing_for(const std::vector<Variant>& variants,
                                      const std::vector<Group>& groups,
                                      const std::vector<double>& group_seconds) {
  std::vector<VariantTiming> out;
  for (const auto& v : variants) {
    out.push_back({v.tag(), group_seconds[group_index(groups, v)]});
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Seeding and supports
// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t master, int trial, ArrayType array) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ static_cast<std::uint64_t>(trial));
  return splitmix64(s ^ (array == ArrayType::fa ? 0x0FAULL : 0x0F9AULL));
}

std::vector<int> fpa_support(int num_ports, int num_active) {
  if (num_active < 1 || num_active > num_ports) {
    throw ConfigError("active port count must lie in [1, L]");
  }
  std::vector<int> s;
  s.reserve(static_cast<std::size_t>(num_active));
  if (num_active == 1) {
    s.push_back(static_cast<int>(std::lround((num_ports - 1) / 2.0)));
    return s;
  }
  const double step = static_cast<double>(num_ports - 1) / (num_active - 1);
  for (int i = 0; i < num_active; ++i) {
    s.push_back(static_cast<int>(std::lround(i * step)));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Pipeline and metrics
// ---------------------------------------------------------------------------

PipelineOutput run_pipeline(const ExperimentConfig& cfg, const ChannelPair& channels,
                            ArrayType array, bool with_an, bool with_hybrid,
                            double power_budget_w, std::uint64_t seed) {
  const ScenarioGeometry& g = cfg.scenario;
  BcdOptions bcd;
  bcd.tol_rel = cfg.bcd_tol_rel;
  bcd.max_iters = cfg.bcd_max_iters;
  bcd.with_an = with_an;
  bcd.balance = cfg.bcd_balance;

  PipelineOutput out;
  if (array == ArrayType::fa) {
    SelectorOptions so;
    so.eta = cfg.select_eta;
    so.min_batch = cfg.select_min_batch;
    so.stage_iters = cfg.select_stage_iters;
    so.final_iters = cfg.select_final_iters;
    so.bcd = bcd;
    so.score_source = cfg.select_hybrid_scores ? ScoreSource::hybrid : ScoreSource::digital;
    so.rf_chains = g.rf_chains;
    so.seed = seed;
    SelectionResult sel = select_ports(channels, g.num_active, g.streams, power_budget_w, so);
    out.support = std::move(sel.support);
    out.refit = std::move(sel.refit);
  } else {
    out.support = fpa_support(g.num_ports, g.num_active);
    std::mt19937_64 rng(seed);
    auto [W0, v0] = random_initial_state(g.num_active, g.streams, power_budget_w, with_an, rng);
    out.refit = bcd_optimize(channels.bob_on(out.support), channels.eve_on(out.support),
                             power_budget_w, W0, v0, bcd);
  }
  out.W = out.refit.W;
  out.v = out.refit.v;

  if (with_hybrid) {
    MatrixXcd target(out.W.rows(), out.W.cols() + 1);
    target << out.W, out.v;
    HybridOptions ho;
    ho.max_sweeps = cfg.hybrid_max_sweeps;
    ho.tol_rel = cfg.hybrid_tol_rel;
    out.hybrid = fit_hybrid(target, g.rf_chains, power_budget_w, ho);
  }
  return out;
}

TrialMetrics evaluate_state(const ChannelPair& channels, const std::vector<int>& support,
                            const MatrixXcd& W, const VectorXcd& v, double power_budget_w) {
  const MatrixXcd hb = channels.bob_on(support);
  const MatrixXcd he = channels.eve_on(support);
  TrialMetrics m;
  m.rate_bob = rate_bob(hb, W, v);
  m.rate_eve = rate_eve(he, W, v);
  m.secrecy_rate = std::max(0.0, m.rate_bob - m.rate_eve);
  m.an_fraction = std::clamp(v.squaredNorm() / power_budget_w, 0.0, 1.0);
  return m;
}

bool RunReport::failure_budget_exceeded() const {
  return total_trials > 0 &&
         static_cast<double>(failed_trials) > kMaxFailureFraction * total_trials;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

RunReport run_sweep(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.validate();
  const std::vector<double> points =
      cfg.sweep == SweepKind::none ? std::vector<double>{cfg.power_dbm} : cfg.sweep_values;
  const std::vector<Group> groups = groups_for(cfg.variants);

  struct Point {
    ExperimentConfig cfg;
    ChannelPair channels;
    double power_w;
  };
  std::vector<Point> pts;
  pts.reserve(points.size());
  for (double value : points) {
    Point p;
    p.cfg = at_sweep_point(cfg, value, &p.power_w);
    p.channels = synthesize_channels(p.cfg.scenario, cfg.channel_model);
    pts.push_back(std::move(p));
  }

  const std::size_t n_groups = groups.size();
  const std::size_t n_trials = static_cast<std::size_t>(cfg.trials);
  const std::size_t n_tasks = pts.size() * n_groups * n_trials;
  std::vector<TaskResult> results(n_tasks);

  parallel_for(n_tasks, cfg.threads, [&](std::size_t idx) {
    const std::size_t trial = idx % n_trials;
    const std::size_t gi = (idx / n_trials) % n_groups;
    const std::size_t pi = idx / (n_trials * n_groups);
    const Point& pt = pts[pi];
    const Group& grp = groups[gi];
    TaskResult& r = results[idx];
    const auto t0 = Clock::now();
    try {
      const PipelineOutput out =
          run_pipeline(pt.cfg, pt.channels, grp.array, grp.with_an, grp.want_hybrid, pt.power_w,
                       trial_seed(cfg.seed, static_cast<int>(trial), grp.array));
      r.digital = evaluate_state(pt.channels, out.support, out.W, out.v, pt.power_w);
      r.digital_ok = true;
      if (out.hybrid) {
        r.hybrid = evaluate_state(pt.channels, out.support, out.hybrid->W_HB(),
                                  out.hybrid->v_HB(), pt.power_w);
        r.hybrid_ok = true;
      }
    } catch (const NumericalError& e) {
      r.error = e.what();
    }
    r.seconds = seconds_since(t0);
  });

  RunReport report;
  std::vector<double> group_seconds(n_groups, 0.0);
  for (std::size_t i = 0; i < n_tasks; ++i) {
    group_seconds[(i / n_trials) % n_groups] += results[i].seconds;
  }
  const char* param = to_string(cfg.sweep);
  for (const Variant& v : cfg.variants) {
    const std::size_t gi = group_index(groups, v);
    const bool hybrid = v.realization == Realization::hybrid;
    for (std::size_t pi = 0; pi < pts.size(); ++pi) {
      ResultRow row;
      row.variant = v.tag();
      row.sweep_param = param;
      row.sweep_value = points[pi];
      double sr = 0.0, rb = 0.0, re = 0.0, an = 0.0;
      for (std::size_t t = 0; t < n_trials; ++t) {
        const TaskResult& r = results[(pi * n_groups + gi) * n_trials + t];
        const bool ok = hybrid ? r.hybrid_ok : r.digital_ok;
        ++report.total_trials;
        if (!ok) {
          ++row.failed;
          ++report.failed_trials;
          report.failure_messages.push_back(row.variant + " @ " + format_number(points[pi]) +
                                            " trial " + std::to_string(t) + ": " + r.error);
          continue;
        }
        const TrialMetrics& m = hybrid ? r.hybrid : r.digital;
        sr += m.secrecy_rate;
        rb += m.rate_bob;
        re += m.rate_eve;
        an += m.an_fraction;
        ++row.trials;
      }
      const double n = row.trials > 0 ? static_cast<double>(row.trials) : std::nan("");
      row.mean_secrecy_rate = sr / n;
      row.mean_rate_bob = rb / n;
      row.mean_rate_eve = re / n;
      row.mean_an_fraction = an / n;
      report.rows.push_back(std::move(row));
    }
  }
  report.timing = timing_for(cfg.variants, groups, group_seconds);
  return report;
}

RunReport run_power_sweep(ExperimentConfig cfg) {
  cfg.sweep = SweepKind::power_dbm;
  return run_sweep(cfg);
}

RunReport run_distance_sweep(ExperimentConfig cfg) {
  cfg.sweep = SweepKind::eve_distance_m;
  return run_sweep(cfg);
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out = open_out(path);
  out << "variant,sweep_param,sweep_value,mean_secrecy_rate,mean_rate_bob,mean_rate_eve,"
         "mean_an_fraction,trials,failed\n";
  for (const auto& r : rows) {
    out << r.variant << ',' << r.sweep_param << ',' << format_number(r.sweep_value) << ','
        << format_number(r.mean_secrecy_rate) << ',' << format_number(r.mean_rate_bob) << ','
        << format_number(r.mean_rate_eve) << ',' << format_number(r.mean_an_fraction) << ','
        << r.trials << ',' << r.failed << '\n';
  }
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_text(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_manifest(const std::string& path, const ExperimentConfig& cfg,
                    const std::string& command, const std::vector<VariantTiming>& timing,
                    int total_trials, int failed_trials,
                    const std::vector<std::pair<std::string, double>>& observations) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["name"] = cfg.name;
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  j["trials"] = cfg.trials;
  j["sweep_param"] = to_string(cfg.sweep);
  j["sweep_values"] = cfg.sweep_values;
  j["power_dbm"] = cfg.power_dbm;
  j["port_spacing_m"] = cfg.scenario.port_spacing_m;
  j["total_trials"] = total_trials;
  j["failed_trials"] = failed_trials;
  auto& t = j["timing_s"] = nlohmann::ordered_json::object();
  for (const auto& vt : timing) t[vt.variant] = vt.seconds;
  auto& o = j["observations"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : observations) o[k] = v;
  j["config"] = canonical_text(cfg);
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Field maps and port report
// ---------------------------------------------------------------------------

FieldReport run_field_maps(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.validate();
  ensure_dir(cfg.output_dir);
  const double power_w = dbm_to_watts(cfg.power_dbm);
  const ChannelPair channels = synthesize_channels(cfg.scenario, cfg.channel_model);
  const std::vector<Group> groups = groups_for(cfg.variants);
  const auto grid = rectangular_grid(cfg.field.x_min, cfg.field.x_max, cfg.field.nx,
                                     cfg.field.y_min, cfg.field.y_max, cfg.field.ny);
  const std::vector<GridPoint> probes{{cfg.scenario.bob.x(), cfg.scenario.bob.y()},
                                      {cfg.scenario.eve.x(), cfg.scenario.eve.y()}};

  std::vector<std::optional<PipelineOutput>> outputs(groups.size());
  std::vector<double> group_seconds(groups.size(), 0.0);
  parallel_for(groups.size(), cfg.threads, [&](std::size_t gi) {
    const auto t0 = Clock::now();
    outputs[gi] = run_pipeline(cfg, channels, groups[gi].array, groups[gi].with_an,
                               groups[gi].want_hybrid, power_w,
                               trial_seed(cfg.seed, 0, groups[gi].array));
    group_seconds[gi] = seconds_since(t0);
  });

  FieldReport report;
  for (const Variant& v : cfg.variants) {
    const PipelineOutput& p = *outputs[group_index(groups, v)];
    const BeamformerState s = state_of(p, v.realization == Realization::hybrid, power_w);
    const auto samples = field_power_maps(cfg.scenario, s, grid);
    std::ofstream out = open_out(cfg.output_dir + "/field_" + v.tag() + ".csv");
    out << "x_m,y_m,rsp_dbm,inp_dbm\n";
    for (const auto& f : samples) {
      out << format_number(f.x) << ',' << format_number(f.y) << ',' << format_number(f.rsp_dbm)
          << ',' << format_number(f.inp_dbm) << '\n';
    }
    const auto at = field_power_maps(cfg.scenario, s, probes);
    report.summaries.push_back(
        {v.tag(), at[0].rsp_dbm, at[1].rsp_dbm, at[0].inp_dbm, at[1].inp_dbm});
  }
  std::ofstream out = open_out(cfg.output_dir + "/field_summary.csv");
  out << "variant,rsp_bob_dbm,rsp_eve_dbm,inp_bob_dbm,inp_eve_dbm\n";
  for (const auto& s : report.summaries) {
    out << s.variant << ',' << format_number(s.rsp_bob_dbm) << ','
        << format_number(s.rsp_eve_dbm) << ',' << format_number(s.inp_bob_dbm) << ','
        << format_number(s.inp_eve_dbm) << '\n';
  }
  report.timing = timing_for(cfg.variants, groups, group_seconds);
  return report;
}

PortReport run_port_report(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.validate();
  ensure_dir(cfg.output_dir);
  const double power_w = dbm_to_watts(cfg.power_dbm);
  const ChannelPair channels = synthesize_channels(cfg.scenario, cfg.channel_model);
  const std::vector<Group> groups = groups_for(cfg.variants);
  const VectorXd positions = port_offsets(cfg.scenario);

  std::vector<std::optional<PipelineOutput>> outputs(groups.size());
  std::vector<double> group_seconds(groups.size(), 0.0);
  parallel_for(groups.size(), cfg.threads, [&](std::size_t gi) {
    const auto t0 = Clock::now();
    outputs[gi] = run_pipeline(cfg, channels, groups[gi].array, groups[gi].with_an,
                               groups[gi].want_hybrid, power_w,
                               trial_seed(cfg.seed, 0, groups[gi].array));
    group_seconds[gi] = seconds_since(t0);
  });

  PortReport report;
  for (const Variant& v : cfg.variants) {
    const PipelineOutput& p = *outputs[group_index(groups, v)];
    const BeamformerState s = state_of(p, v.realization == Realization::hybrid, power_w);
    const VectorXd energy = row_energy(s.W, s.v);
    std::map<int, double> power;
    for (std::size_t j = 0; j < p.support.size(); ++j) {
      const double e = energy(static_cast<Eigen::Index>(j));
      power[p.support[j]] = e * e;
    }
    for (int l = 0; l < cfg.scenario.num_ports; ++l) {
      const auto it = power.find(l);
      report.rows.push_back({v.tag(), l, positions(l), it != power.end(),
                             it != power.end() ? it->second : 0.0});
    }
  }
  std::ofstream out = open_out(cfg.output_dir + "/port_report.csv");
  out << "variant,port,position_m,selected,power_w\n";
  for (const auto& r : report.rows) {
    out << r.variant << ',' << r.port << ',' << format_number(r.position_m) << ','
        << (r.selected ? 1 : 0) << ',' << format_number(r.power_w) << '\n';
  }
  report.timing = timing_for(cfg.variants, groups, group_seconds);
  return report;
}

}  // namespace fasec
