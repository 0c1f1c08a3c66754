#pragma once

#include <Eigen/Dense>

#include "copmed/rng.hpp"

namespace copmed {

// Normal with variance sigma2 restricted to [lower, inf).  lower may be -inf,
// in which case this is the plain normal.
class TruncatedNormal {
 public:
  TruncatedNormal(double mu, double sigma2, double lower);

  double pdf(double t) const;
  double logpdf(double t) const;
  double cdf(double t) const;
  // u in (0,1).
  double quantile(double u) const;
  double sample(RngStream& rng) const;
  // Mass of the untruncated normal above `lower`.
  double normalizer() const { return z_; }

  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  double lower() const { return lower_; }

 private:
  double mu_;
  double sigma_;
  double lower_;
  double alpha_;  // (lower - mu) / sigma
  double z_;      // P(X >= lower)
  double log_z_;
};

struct MvnConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Multivariate normal backed by an LLT factorization.
class Mvn {
 public:
  Mvn(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  double logpdf(const Eigen::VectorXd& x) const;
  Eigen::VectorXd sample(RngStream& rng) const;
  // Exact Gaussian conditional of the complement coordinates given
  // x[given] = values.
  MvnConditional conditional(const std::vector<int>& given,
                             const Eigen::VectorXd& values) const;

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_det_;
};

// Throws std::domain_error (reporting the smallest eigenvalue) if m is not
// symmetric positive definite; returns its LLT otherwise.
Eigen::LLT<Eigen::MatrixXd> require_spd(const Eigen::MatrixXd& m, const char* what);

double mahalanobis(const Eigen::VectorXd& w, const Eigen::MatrixXd& S);

// Wishart(df, scale) via Bartlett decomposition; df > dim-1, scale SPD.
Eigen::MatrixXd sample_wishart(double df, const Eigen::MatrixXd& scale, RngStream& rng);
// InverseWishart(df, scale): Monte Carlo mean is scale/(df-dim-1) for df > dim+1.
Eigen::MatrixXd sample_inverse_wishart(double df, const Eigen::MatrixXd& scale,
                                       RngStream& rng);

double log_mvgamma(int dim, double a);
double inverse_wishart_logpdf(const Eigen::MatrixXd& x, double df,
                              const Eigen::MatrixXd& scale);
double wishart_logpdf(const Eigen::MatrixXd& x, double df, const Eigen::MatrixXd& scale);

// Scalar log densities used in Metropolis ratios.
double gamma_logpdf(double x, double shape, double rate);
double normal_logpdf(double x, double mean, double var);
double beta_logpdf(double x, double a, double b);

}  // namespace copmed
