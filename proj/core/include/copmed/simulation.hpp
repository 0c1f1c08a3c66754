#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "copmed/rng.hpp"
#include "copmed/types.hpp"

namespace copmed {

enum class CorrCase { kUncorrelated, kCorrelated };
enum class InteractionCase { kSingle, kDouble };
enum class CrossWorldCoupling { kIndependent, kSharedGaussian };

std::string to_string(CorrCase c);
std::string to_string(InteractionCase c);

// Three correlated-mediator scenario: three confounders, Bernoulli(0.5)
// treatment, trivariate normal mediators per arm, quadratic-interaction
// outcome mean with sd 0.1.  Mediator support is unbounded, so generated
// datasets carry lower_bound = -inf.
struct Scenario {
  Dataset data;
  Eigen::MatrixXd m_world0;  // latent truth: both worlds' mediators
  Eigen::MatrixXd m_world1;
  CorrCase corr_case;
  InteractionCase interaction_case;
};

Scenario generate_scenario(CorrCase corr_case, InteractionCase interaction_case, int n,
                           RngStream& rng,
                           CrossWorldCoupling coupling = CrossWorldCoupling::kIndependent);

// Outcome mean function of the generator (exposed for oracles).
double scenario_outcome_mean(int z, const Eigen::Vector3d& m, const Eigen::Vector3d& x,
                             InteractionCase interaction_case);

struct TruthValues {
  double te = 0, nde = 0, jnie_all = 0;
  Eigen::VectorXd nie;        // K = 3
  Eigen::MatrixXd jnie_pair;  // strict upper triangle
  std::vector<std::pair<std::string, double>> flatten() const;
};

// Brute-force Monte Carlo over (X, cross-world mediators, outcome means) of
// every estimand definition.
TruthValues truth_oracle(CorrCase corr_case, InteractionCase interaction_case, long n_mc,
                         CrossWorldCoupling coupling, std::uint64_t seed);

// Product-of-coefficients regression baseline: OLS mediator and outcome
// regressions, NIE_k = alpha_1k * beta_{k+1}, NDE = beta_1, JNIE additive;
// intervals by the nonparametric bootstrap.
struct BaselineEffects {
  std::map<std::string, double> estimate;
  std::map<std::string, std::pair<double, double>> ci95;
};

BaselineEffects parametric_baseline(const Dataset& data, int n_boot,
                                    std::uint64_t seed);

struct HarnessConfig {
  CorrCase corr_case = CorrCase::kUncorrelated;
  InteractionCase interaction_case = InteractionCase::kSingle;
  int n = 500;
  int n_reps = 25;
  ChainConfig chain;  // harness defaults: 2000 iterations, 500 burn, thin 3
  long oracle_mc = 1000000;
  CrossWorldCoupling coupling = CrossWorldCoupling::kIndependent;
  int n_boot = 1000;
  int n_threads = 1;
  std::uint64_t seed = 0;

  HarnessConfig() {
    chain.n_iter = 2000;
    chain.n_burn = 500;
    chain.thin = 3;
  }
};

struct HarnessRow {
  std::string corr_case, interaction_case, estimand, method;
  double truth = 0, bias = 0, mse = 0;
  int n_reps = 0;
};

struct HarnessResult {
  std::vector<HarnessRow> rows;
  int failed_replications = 0;
  std::vector<std::string> failures;
};

// Fits both methods on n_reps generated datasets and reports mean bias and
// MSE per estimand against the Monte Carlo truth.
HarnessResult replication_harness(const HarnessConfig& config);

}  // namespace copmed
