#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "copmed/chain.hpp"
#include "copmed/types.hpp"

namespace copmed {

// DIC3 for the (k,z) margin over retained draws, evaluated at that arm's
// observed values:
//   -4 E_theta[log f(T|theta)|T] + 2 log f_hat(T),
// with f_hat the MCMC predictive density.  Throws std::domain_error naming the
// unit when the predictive density is zero at a point.
double dic3_marginal(const std::vector<PosteriorDraw>& draws, const Dataset& data,
                     int k, int z);

// Same criterion for the equivalent parametric model: a Bayesian linear
// regression on the margin's covariates with the noninformative prior,
// sampled m_draws times.
double dic3_parametric(const Dataset& data, int k, int z, int m_draws,
                       std::uint64_t seed);

struct PosteriorPredictive {
  Eigen::MatrixXd mediator_mean;               // n x K, observed-arm coordinates
  Eigen::VectorXd outcome_mean;                // n
  std::vector<Eigen::MatrixXd> mediator_reps;  // n_rep matrices (n x K)
  std::vector<Eigen::VectorXd> outcome_reps;   // n_rep vectors (n)
};

// Simulates mediators and outcomes conditional on each unit's covariates from
// the fitted models: means averaged over all draws, replicates from n_rep
// evenly spaced draws.
PosteriorPredictive posterior_predictive(const std::vector<PosteriorDraw>& draws,
                                         const Dataset& data, int n_rep,
                                         std::uint64_t seed);

struct TraceSummaryRow {
  std::string name;
  double mean = 0, sd = 0, lag1 = 0, ess = 0;
  bool degenerate = false;  // constant chain: lag1 reported as 0 with this flag
};

// Mean, sd, lag-1 autocorrelation and effective sample size (initial positive
// sequence estimator) per traced parameter.
std::vector<TraceSummaryRow> trace_summary(const TraceData& traces);

}  // namespace copmed
