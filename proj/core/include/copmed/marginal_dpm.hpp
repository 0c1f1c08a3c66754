#pragma once

#include <Eigen/Dense>
#include <vector>

#include "copmed/distributions.hpp"
#include "copmed/rng.hpp"

namespace copmed {

// Parameters of one margin's truncated-normal DP mixture (finite stick
// truncation at k_max).  Cluster intercepts and precisions are mixed over;
// the covariate coefficients are shared across clusters.
struct MarginalParams {
  Eigen::VectorXd beta0;        // k_max cluster intercepts
  Eigen::VectorXd tau;          // k_max cluster precisions
  Eigen::VectorXd beta;         // P shared covariate coefficients
  Eigen::VectorXd omega;        // k_max stick weights, sum to 1
  Eigen::VectorXd omega_prime;  // stick fractions, last forced to 1
  double lambda = 1.0;          // DP mass
  double mu = 0.0;              // base-measure mean for intercepts
  double S = 1.0;               // base-measure precision for intercepts
  double a_star = 3.0;          // shape hyper of S's Gamma prior, in [1,5]

  int k_max() const { return static_cast<int>(beta0.size()); }
};

// Constants frozen from the margin's observed data at initialization.
struct MarginalHypers {
  double mu_star = 0.0;    // prior mean for mu (observed-data mean)
  double S_star = 1.0;     // prior precision for mu (2 / sigma_hat2)
  double sigma_hat2 = 1.0; // observed-data variance MLE
  double lower = 0.0;      // support bound (-inf allowed)
  bool bstar_appendix_f = false;
  double beta_prior_var = 100.0;

  double b_star(double a_star) const {
    return bstar_appendix_f ? 100.0 * a_star : a_star * sigma_hat2 / 2.0;
  }
};

// Mixture of truncated normals at a fixed linear predictor eta = x'beta.
class MarginalMixture {
 public:
  MarginalMixture(const MarginalParams& p, double lower, double eta);

  double pdf(double t) const;
  double logpdf(double t) const;
  double cdf(double t) const;
  // Strictly increasing inverse of cdf on the support; u in (0,1).
  double quantile(double u) const;
  double quantile(double u, double guess) const;
  double lower() const { return lower_; }

 private:
  std::vector<TruncatedNormal> comps_;
  std::vector<double> w_;
  double lower_;
};

// Latent score for one value under one margin: Phi^{-1} of the (clamped)
// mixture CDF.
double latent_score(const MarginalMixture& mix, double t);

// Copula coupling constants for margin j extracted from (H, R):
//   r_inv_jj = (R^{-1})_{jj},   cross_i = sum_{k != j} (R^{-1})_{jk} H_{ki}.
struct CopulaCoupling {
  double r_inv_jj = 1.0;
  Eigen::VectorXd cross;
};

CopulaCoupling copula_coupling(const Eigen::MatrixXd& H, const Eigen::MatrixXd& R, int j);

// Joint prior density of one margin's parameter block.
double marginal_log_prior(const MarginalParams& p, const MarginalHypers& h);

// Full conditional of margin j's parameters given its values, the other
// margins' latent scores and R:
//   (1/2)(1 - R^{-1}_jj) sum_i H_ji^2 - sum_i H_ji cross_i
//   + sum_i log f(T_ji | x_i, theta_j) + log prior,
// with H_j recomputed from the candidate parameters.  eta must equal X*beta
// for the candidate; H_out (optional) receives the recomputed scores.
double marginal_logpost(const MarginalParams& p, const MarginalHypers& h,
                        const Eigen::VectorXd& T, const Eigen::VectorXd& eta,
                        const CopulaCoupling& coupling,
                        Eigen::VectorXd* H_out = nullptr);

// Convenience overload matching the chain layout (computes eta and coupling).
double marginal_logpost(const MarginalParams& p, const MarginalHypers& h,
                        const Eigen::VectorXd& T, const Eigen::MatrixXd& X,
                        const Eigen::MatrixXd& H, const Eigen::MatrixXd& R, int j);

struct Step1Stats {
  int b_proposals = 0, b_accepts = 0;
  int c_proposals = 0, c_accepts = 0;
  int d_proposals = 0, d_accepts = 0;
  int e_proposals = 0, e_accepts = 0;
};

// Chain-side state of one margin: parameters plus labels and the adaptive
// proposal history for the covariate block.
class MarginalModel {
 public:
  MarginalModel() = default;
  // observed: the margin's observed values (its own arm); T/X span all units.
  MarginalModel(const Eigen::VectorXd& observed, int k_max, int P, double lower,
                bool bstar_appendix_f);

  // One block-Metropolis sweep (sub-steps a through e).  T holds current
  // values for every unit (observed and imputed); H's column j is kept in
  // sync with the accepted state.
  Step1Stats step1_sweep(const Eigen::VectorXd& T, const Eigen::MatrixXd& X,
                         Eigen::MatrixXd& H, int j, const Eigen::MatrixXd& R,
                         RngStream& rng);

  // Recompute H column j from the current parameters.
  void refresh_scores(const Eigen::VectorXd& T, const Eigen::MatrixXd& X,
                      Eigen::MatrixXd& H, int j) const;

  const MarginalParams& params() const { return params_; }
  MarginalParams& params() { return params_; }
  const MarginalHypers& hypers() const { return hypers_; }
  const std::vector<int>& labels() const { return labels_; }

 private:
  MarginalParams params_;
  MarginalHypers hypers_;
  std::vector<int> labels_;
  // Running moments of the beta history for the adaptive proposal.
  long adapt_n_ = 0;
  Eigen::VectorXd adapt_mean_;
  Eigen::MatrixXd adapt_m2_;
};

}  // namespace copmed
