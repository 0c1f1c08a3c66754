#pragma once

#include <Eigen/Dense>
#include <vector>

#include "copmed/rng.hpp"

namespace copmed {

// Truncated stick-breaking state of one arm's joint DP mixture over
// (Y, M(0,0,0), M(1,1,1), X); dimension D = 1 + 2K + P with Y first.
struct OutcomeParams {
  std::vector<Eigen::VectorXd> mu;     // L cluster means (D)
  std::vector<Eigen::MatrixXd> sigma;  // L cluster covariances (D x D)
  Eigen::VectorXd gamma;               // L stick weights
  Eigen::VectorXd gamma_prime;         // stick fractions, last forced to 1
  double alpha = 10.0;                 // DP concentration
  Eigen::VectorXd m1;                  // base-measure mean
  double k0 = 3.0;                     // base-measure precision scale
  Eigen::MatrixXd psi1;                // base-measure IW scale

  int L() const { return static_cast<int>(mu.size()); }
  int dim() const { return mu.empty() ? 0 : static_cast<int>(mu[0].size()); }
};

struct Step4Stats {
  int psi1_proposals = 0;
  int psi1_accepts = 0;
};

class OutcomeModel {
 public:
  OutcomeModel() = default;
  // data: n_arm x D matrix of complete rows for this arm.
  OutcomeModel(const Eigen::MatrixXd& data, int truncation);

  // One blocked-Gibbs sweep.  unit_streams[i] drives unit i's label draw so
  // predictions are invariant to unit ordering; rng drives everything else.
  Step4Stats step4_sweep(const Eigen::MatrixXd& data,
                         const std::vector<int>& unit_ids,
                         std::vector<RngStream>& unit_streams, RngStream& rng);

  const OutcomeParams& params() const { return params_; }
  OutcomeParams& params() { return params_; }
  double nu0() const { return nu0_; }

 private:
  OutcomeParams params_;
  std::vector<int> labels_;
  double nu0_ = 25.0;     // cluster IW df (raised to D+2 when D >= 25)
  double nu_psi_ = 25.0;  // psi1 hyperprior IW df
};

// Locally weighted conditional of Y given a subset of the remaining
// coordinates: weights are the cluster densities of the conditioning values,
// each cluster contributing its exact Gaussian conditional.  Immutable and
// safe to share across threads.
class OutcomePredictor {
 public:
  // given: indices into the non-Y coordinates (1..D-1 of the joint vector).
  OutcomePredictor(const OutcomeParams& p, std::vector<int> given);

  // Normalized component weights and per-component conditional means and
  // variances at conditioning values v (ordered as `given`).
  void components(const Eigen::VectorXd& v, std::vector<double>& w,
                  std::vector<double>& mean, std::vector<double>& var) const;

  double mean(const Eigen::VectorXd& v) const;
  double density(double y, const Eigen::VectorXd& v) const;
  double log_density(double y, const Eigen::VectorXd& v) const;
  double sample(const Eigen::VectorXd& v, RngStream& rng) const;

  int n_given() const { return static_cast<int>(given_.size()); }

 private:
  struct Component {
    double log_gamma;
    Eigen::VectorXd mu_given;
    Eigen::LLT<Eigen::MatrixXd> llt;  // of sigma[given,given]
    double log_norm;                  // log of the weight-normal constant
    Eigen::VectorXd gain;             // regression of Y on the given block
    double a;                         // conditional intercept
    double s2;                        // conditional variance
  };
  std::vector<int> given_;
  std::vector<Component> comps_;
};

}  // namespace copmed
