#include "fasec/port_selection.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <limits>
#include <random>
#include <tuple>

#include "fasec/error.hpp"
#include "fasec/hybrid.hpp"

namespace fasec {

VectorXd row_energy(const MatrixXcd& W, const VectorXcd& v) {
  if (W.rows() != v.size()) throw ConfigError("row_energy: dimension mismatch");
  return (W.rowwise().squaredNorm() + v.cwiseAbs2()).cwiseSqrt();
}

int batch_size(int support_size, int num_active, double eta, int min_batch) {
  const int surplus = support_size - num_active;
  if (surplus <= 0) return 0;
  const int scaled = static_cast<int>(std::floor(eta * static_cast<double>(surplus)));
  return std::min(surplus, std::max(min_batch, scaled));
}

std::vector<int> prune(const std::vector<int>& support, const VectorXd& scores, int count,
                       std::vector<int>* removed) {
  if (static_cast<Eigen::Index>(support.size()) != scores.size()) {
    throw ConfigError("prune: one score per supported port is required");
  }
  if (count < 0 || count > static_cast<int>(support.size())) {
    throw ConfigError("prune: invalid deletion count");
  }
  std::vector<std::size_t> order(support.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = scores(static_cast<Eigen::Index>(a));
    const double sb = scores(static_cast<Eigen::Index>(b));
    if (sa != sb) return sa < sb;
    return support[a] < support[b];
  });
  std::vector<bool> drop(support.size(), false);
  if (removed != nullptr) removed->clear();
  for (int i = 0; i < count; ++i) {
    drop[order[static_cast<std::size_t>(i)]] = true;
    if (removed != nullptr) removed->push_back(support[order[static_cast<std::size_t>(i)]]);
  }
  std::vector<int> kept;
  kept.reserve(support.size() - static_cast<std::size_t>(count));
  for (std::size_t j = 0; j < support.size(); ++j) {
    if (!drop[j]) kept.push_back(support[j]);
  }
  return kept;
}

MatrixXd selection_matrix(const std::vector<int>& support, int num_ports) {
  MatrixXd p = MatrixXd::Zero(num_ports, static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) {
    if (support[j] < 0 || support[j] >= num_ports) {
      throw ConfigError("selection_matrix: port index out of range");
    }
    p(support[j], static_cast<Eigen::Index>(j)) = 1.0;
  }
  return p;
}

VectorXd stationarity_residual(const CurvatureSystem& curv, const MatrixXcd& W,
                               const VectorXcd& v) {
  const MatrixXcd gw = curv.A * W - curv.R_w;
  const VectorXcd gv = curv.B * v - curv.r_v;
  return row_energy(gw, gv);
}

namespace {

std::vector<int> positions_in(const std::vector<int>& from, const std::vector<int>& keep) {
  std::vector<int> pos;
  pos.reserve(keep.size());
  std::size_t j = 0;
  for (int idx : keep) {
    while (j < from.size() && from[j] != idx) ++j;
    if (j == from.size()) throw ConfigError("support is not a subset of its predecessor");
    pos.push_back(static_cast<int>(j));
  }
  return pos;
}

template <class Rng>
std::pair<MatrixXcd, VectorXcd> restrict_state(const MatrixXcd& W, const VectorXcd& v,
                                               const std::vector<int>& rows, double power_budget,
                                               bool with_an, Rng& rng) {
  MatrixXcd w(static_cast<Eigen::Index>(rows.size()), W.cols());
  VectorXcd a(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    w.row(static_cast<Eigen::Index>(i)) = W.row(rows[i]);
    a(static_cast<Eigen::Index>(i)) = v(rows[i]);
  }
  if (!with_an) a.setZero();
  const double p = w.squaredNorm() + a.squaredNorm();
  if (!(p > 0.0)) return random_initial_state(w.rows(), w.cols(), power_budget, with_an, rng);
  const double s = std::sqrt(power_budget / p);
  return {w * s, a * s};
}

VectorXd stage_scores(const BcdResult& res, const SelectorOptions& opts, double power_budget) {
  if (opts.score_source == ScoreSource::digital) return row_energy(res.W_raw, res.v);
  const Eigen::Index ports = res.W.rows();
  const int n_rf = static_cast<int>(
      std::clamp<Eigen::Index>(opts.rf_chains, res.W.cols(), ports));
  MatrixXcd target(ports, res.W.cols() + 1);
  target << res.W, res.v;
  const HybridRealization h = fit_hybrid(target, n_rf, power_budget);
  return row_energy(h.W_HB(), h.v_HB());
}

}  // namespace

SelectionResult select_ports(const ChannelPair& channels, int num_active, int streams,
                             double power_budget, const SelectorOptions& opts) {
  const int num_ports = static_cast<int>(channels.bob.cols());
  if (channels.eve.cols() != num_ports) throw ConfigError("channel port counts differ");
  if (num_active < 1 || num_active > num_ports) {
    throw ConfigError("active port count must lie in [1, L]");
  }
  if (streams < 1 || streams > num_active) throw ConfigError("stream count must lie in [1, N_t]");
  if (!(opts.eta > 0.0 && opts.eta < 1.0)) throw ConfigError("pruning ratio must lie in (0, 1)");
  if (opts.min_batch < 1) throw ConfigError("minimum batch must be positive");
  if (opts.score_source == ScoreSource::hybrid && opts.rf_chains < streams) {
    throw ConfigError("hybrid scores need at least K RF chains");
  }

  std::mt19937_64 rng(opts.seed);
  const bool with_an = opts.bcd.with_an;

  SelectionResult out;
  std::vector<int> support(static_cast<std::size_t>(num_ports));
  std::iota(support.begin(), support.end(), 0);
  auto [W, v] = random_initial_state(num_ports, streams, power_budget, with_an, rng);

  std::map<int, double> last_scores;  // port → most recent score
  BcdOptions stage_opts = opts.bcd;
  stage_opts.max_iters = opts.stage_iters;
  stage_opts.balance = opts.score_source == ScoreSource::hybrid && opts.bcd.balance;

  int stage = 0;
  while (static_cast<int>(support.size()) > num_active) {
    StageRecord rec;
    rec.stage = stage;
    rec.support = support;

    VectorXd scores(static_cast<Eigen::Index>(support.size()));
    MatrixXcd W_next = W;
    VectorXcd v_next = v;
    try {
      const BcdResult res = bcd_optimize(channels.bob_on(support), channels.eve_on(support),
                                         power_budget, W, v, stage_opts);
      scores = stage_scores(res, opts, power_budget);
      W_next = res.W_raw;
      v_next = res.v;
      rec.lambda = res.lambda;
      rec.objective_bits = res.objective_bits;
    } catch (const NumericalError&) {
      if (last_scores.empty()) throw;
      rec.refit_failed = true;
      for (std::size_t j = 0; j < support.size(); ++j) {
        scores(static_cast<Eigen::Index>(j)) = last_scores.at(support[j]);
      }
    }
    for (std::size_t j = 0; j < support.size(); ++j) {
      last_scores[support[j]] = scores(static_cast<Eigen::Index>(j));
    }

    const int d = batch_size(static_cast<int>(support.size()), num_active, opts.eta,
                             opts.min_batch);
    std::vector<int> next = prune(support, scores, d, &rec.pruned);
    double min_kept = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < support.size(); ++j) {
      const double s = scores(static_cast<Eigen::Index>(j));
      if (std::find(rec.pruned.begin(), rec.pruned.end(), support[j]) != rec.pruned.end()) {
        rec.pruned_scores.push_back(s);
      } else {
        min_kept = std::min(min_kept, s);
      }
    }
    rec.min_retained_score = min_kept;
    out.stages.push_back(std::move(rec));

    const std::vector<int> rows = positions_in(support, next);
    std::tie(W, v) = restrict_state(W_next, v_next, rows, power_budget, with_an, rng);
    support = std::move(next);
    ++stage;
  }

  BcdOptions final_opts = opts.bcd;
  final_opts.max_iters = opts.final_iters;
  out.refit = bcd_optimize(channels.bob_on(support), channels.eve_on(support), power_budget, W,
                           v, final_opts);
  out.support = std::move(support);
  return out;
}

}  // namespace fasec
