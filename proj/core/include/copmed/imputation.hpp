#pragma once

#include <Eigen/Dense>
#include <vector>

#include "copmed/marginal_dpm.hpp"
#include "copmed/outcome_dpm.hpp"
#include "copmed/rng.hpp"

namespace copmed {

struct PosteriorDraw;

struct Step3Result {
  long proposals = 0;
  long accepts = 0;
};

// One random-walk imputation pass over unit i's missing coordinates (the K
// margins of the arm it was not assigned to), in fixed margin order.  Each
// accepted move updates the unit's row of T and H.  `predictor` is the full
// conditional outcome density of the unit's own arm; `R_inv` the current
// copula inverse.
Step3Result step3_impute_unit(
    int unit, int arm, const Eigen::VectorXd& x, double y,
    const std::vector<const MarginalParams*>& margin_params,
    const std::vector<const MarginalHypers*>& margin_hypers,
    const Eigen::MatrixXd& R_inv, const OutcomePredictor& predictor,
    Eigen::MatrixXd& T, Eigen::MatrixXd& H, const Eigen::VectorXd& sigma_t,
    RngStream& rng);

// Draws of the pattern-selected counterfactual mediator vector at covariates
// x: H ~ N(0,R), coordinate k mapped through the margin of arm pattern[k].
// Returns an n_mc x K matrix.
Eigen::MatrixXd draw_counterfactual_mediators(const PosteriorDraw& draw, double lower,
                                              const Eigen::VectorXd& x,
                                              const std::vector<int>& pattern, int n_mc,
                                              RngStream& rng);

}  // namespace copmed
