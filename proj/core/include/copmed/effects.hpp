#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "copmed/chain.hpp"
#include "copmed/types.hpp"

namespace copmed {

struct EffectOptions {
  int n_mc = 100;        // counterfactual draws per unit
  bool nie_star = false;
  std::uint64_t seed = 0;
  int n_threads = 1;
};

// Per-draw mediation estimands.  All integrals reuse the same counterfactual
// draws, so TE = NDE + JNIE_all holds exactly and additive outcome models give
// exactly zero overlap.
struct MediationEffects {
  double te = 0, nde = 0, jnie_all = 0;
  Eigen::VectorXd nie;        // K
  Eigen::MatrixXd jnie_pair;  // strict upper triangle (j < k)
  Eigen::MatrixXd overlap;    // (NIE_j + NIE_k) - JNIE_jk, strict upper triangle
  Eigen::VectorXd nie_star;   // empty unless requested
};

MediationEffects mediation_effects(const PosteriorDraw& draw, const Dataset& data,
                                   const EffectOptions& opt);

// Exponential-tilt relaxation: units whose standardized mediator effect
// exceeds the epsilon-scaled threshold have each a-priori-counterfactual
// conditional mean tilted by the product of the chi's attached to the swapped
// coordinates.  chi = 1 (or epsilon = inf) reproduces mediation_effects
// bit-exactly.
MediationEffects tilted_mediation_effects(const PosteriorDraw& draw, const Dataset& data,
                                          const EffectOptions& opt, double epsilon,
                                          const Eigen::VectorXd& chi);

// Stable flat layout of the per-draw estimands: TE, NDE, NIE_k, JNIE_jk,
// JNIE_all, OVERLAP_jk (and NIE*_k when present).
std::vector<std::pair<std::string, double>> flatten_effects(const MediationEffects& e,
                                                            int K);

// Posterior sd of the unit-level mediator effects M_k(1)-M_k(0), pooled over
// units and draws; the basis for the C^D/C^A thresholds.
Eigen::VectorXd mediator_effect_sd(const std::vector<PosteriorDraw>& draws, int K);

// Principal-stratification summaries for one draw.  Subsets of mediators are
// indexed by bitmask (bit k = mediator k in the subset).
struct PrincipalStratum {
  double value = 0;
  int count = 0;
  bool defined = false;
};

struct CrossCell {
  double sum_effect = 0;
  int count = 0;
};

// Category order for cross-classification: decrease, no-change, increase.
enum Change : int { kDecrease = 0, kNoChange = 1, kIncrease = 2 };

struct PrincipalResult {
  std::vector<PrincipalStratum> ede, eae_minus, eae_plus;  // size 1<<K, index >= 1
  std::vector<std::pair<int, int>> pairs;                  // (j,k), j < k
  std::vector<std::array<std::array<CrossCell, 3>, 3>> cross;  // per pair
};

PrincipalResult principal_effects(const PosteriorDraw& draw, const Dataset& data,
                                  const Eigen::VectorXd& c_d, const Eigen::VectorXd& c_a);

// Causal-effect-predictiveness surface for mediator k: posterior-averaged
// E[Y(1)-Y(0) | M_k(0), M_k(1)] over a grid, remaining coordinates drawn from
// their conditional copula distribution; plus the unit-level point cloud of
// (M_k(0), M_k(1)) from the last draw.
struct CepSurface {
  Eigen::VectorXd grid0, grid1;
  Eigen::MatrixXd effect;
  Eigen::MatrixXd cloud;  // n x 2
};

CepSurface cep_surface(const std::vector<PosteriorDraw>& draws, const Dataset& data,
                       int k, int grid_size, int max_draws, std::uint64_t seed,
                       int n_threads = 1);

// Column-named matrix of per-draw effect values plus posterior summaries.
struct EffectTable {
  std::vector<std::string> names;
  Eigen::MatrixXd values;  // n_draws x n_names
};

struct SummaryRow {
  std::string name;
  double mean = 0, sd = 0, lo = 0, hi = 0;
  int n = 0;
};

EffectTable tabulate_effects(const std::vector<MediationEffects>& per_draw, int K);
std::vector<SummaryRow> summarize_table(const EffectTable& table);
double quantile_sorted(std::vector<double> v, double q);

}  // namespace copmed
