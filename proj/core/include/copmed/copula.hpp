#pragma once

#include <Eigen/Dense>

#include "copmed/rng.hpp"
#include "copmed/types.hpp"

namespace copmed {

// Gaussian-copula contribution to the log likelihood for latent scores H
// (n x 2K, one row per unit):
//   -(n/2) log|R| + (1/2) sum_i H_i' (I - R^{-1}) H_i.
// Marginal log-density terms are excluded; they live with the margins.
double copula_loglik(const Eigen::MatrixXd& H, const Eigen::MatrixXd& R);

// Bounds for one off-diagonal entry of R holding every other entry fixed; any
// value strictly inside keeps R positive definite.
struct PdInterval {
  double lo;
  double hi;
};

// det(R(r)) is quadratic in the (j,k) entry; the roots bracketing the current
// value are solved in closed form.
PdInterval pd_interval(const Eigen::MatrixXd& R, int j, int k);

// Correlation matrix with bookkeeping for the partially identified cross-arm
// block.  In rho-constrained mode the cross block is a deterministic function
// of the within-arm blocks and rho.
struct CorrelationState {
  Eigen::MatrixXd R;
  PriorMode mode = PriorMode::kRhoConstrained;
  double rho = 0.5;  // used in rho-constrained mode only
  int K = 0;

  static CorrelationState identity(int K, PriorMode mode);
};

// Cross-arm entry (j,k) = rho * (r_jk(0) + r_jk(1)) / 2; same-mediator cross
// entries equal rho.  Throws std::domain_error if the assembled matrix is not
// positive definite ("incompatible (corrs, rho)").
Eigen::MatrixXd build_constrained_R(const Eigen::MatrixXd& within0,
                                    const Eigen::MatrixXd& within1, double rho);

struct Step2Stats {
  int entry_proposals = 0;
  int entry_accepts = 0;
  int rho_proposals = 0;
  int rho_accepts = 0;
};

// One Metropolis sweep over the correlation parameters given current latent
// scores H.  Uniform mode updates every free entry; rho-constrained mode
// updates within-arm entries (restricted positive) then rho, rebuilding the
// cross block.  The state is always left positive definite.
Step2Stats step2_sample_R(CorrelationState& state, const Eigen::MatrixXd& H,
                          RngStream& rng);

}  // namespace copmed
