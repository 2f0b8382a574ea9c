#pragma once

#include <cstdint>
#include <vector>

#include "fasec/bcd.hpp"
#include "fasec/geometry.hpp"
#include "fasec/linalg.hpp"

namespace fasec {

/// e_i = ‖[W̃(i,:), ṽ(i)]‖₂ for every row.
VectorXd row_energy(const MatrixXcd& W, const VectorXcd& v);

/// d_t = min{|S_t| − N_t, max(m_min, ⌊η(|S_t| − N_t)⌋)}.
int batch_size(int support_size, int num_active, double eta, int min_batch);

/// Removes the `count` entries of `support` with the smallest scores
/// (`scores[j]` belongs to `support[j]`); ties go to the smaller port index.
/// Returns the surviving support in its original order.
std::vector<int> prune(const std::vector<int>& support, const VectorXd& scores, int count,
                       std::vector<int>* removed = nullptr);

/// P_S = I_L(:, S).
MatrixXd selection_matrix(const std::vector<int>& support, int num_ports);

/// Per-row stationarity residual ‖[(AW̃ − R_w)(i,:), (Bṽ − r_v)(i)]‖₂, which
/// equals λ*·e_i at a water-filled point.
VectorXd stationarity_residual(const CurvatureSystem& curv, const MatrixXcd& W,
                               const VectorXcd& v);

enum class ScoreSource { digital, hybrid };

struct SelectorOptions {
  double eta = 0.5;
  int min_batch = 1;
  int stage_iters = 30;
  int final_iters = 200;
  BcdOptions bcd;  // tolerance, AN flag, balancing; iteration caps come from above
  ScoreSource score_source = ScoreSource::digital;
  int rf_chains = 0;  // needed only for hybrid scores
  std::uint64_t seed = 1;
};

struct StageRecord {
  int stage = 0;
  std::vector<int> support;       // S_t
  std::vector<int> pruned;        // D_t
  std::vector<double> pruned_scores;
  double min_retained_score = 0.0;
  double lambda = 0.0;
  double objective_bits = 0.0;
  bool refit_failed = false;
};

struct SelectionResult {
  std::vector<int> support;  // S*, |S*| = N_t, ascending
  BcdResult refit;           // long final refit on S*
  std::vector<StageRecord> stages;
};

/// Staged prune–refit selection of `num_active` ports on the full rail.
SelectionResult select_ports(const ChannelPair& channels, int num_active, int streams,
                             double power_budget, const SelectorOptions& opts);

}  // namespace fasec
