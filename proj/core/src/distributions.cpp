#include "copmed/distributions.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "copmed/normal.hpp"

namespace copmed {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Beyond this standardized truncation point, inverse-CDF sampling loses
// precision; switch to the exponential rejection sampler.
constexpr double kTailSwitch = 5.0;
}  // namespace

TruncatedNormal::TruncatedNormal(double mu, double sigma2, double lower)
    : mu_(mu), lower_(lower) {
  if (!(sigma2 > 0)) throw std::invalid_argument("TruncatedNormal: sigma2 must be > 0");
  sigma_ = std::sqrt(sigma2);
  if (lower_ == -kInf) {
    alpha_ = -kInf;
    z_ = 1.0;
    log_z_ = 0.0;
  } else {
    alpha_ = (lower_ - mu_) / sigma_;
    z_ = norm_sf(alpha_);
    if (z_ <= 0) {
      // Entire mass numerically below the bound; keep a floor so log stays finite.
      z_ = std::numeric_limits<double>::denorm_min();
    }
    log_z_ = std::log(z_);
  }
}

double TruncatedNormal::pdf(double t) const {
  if (t < lower_) return 0.0;
  double x = (t - mu_) / sigma_;
  return norm_pdf(x) / (sigma_ * z_);
}

double TruncatedNormal::logpdf(double t) const {
  if (t < lower_) return -kInf;
  double x = (t - mu_) / sigma_;
  return norm_logpdf(x) - std::log(sigma_) - log_z_;
}

double TruncatedNormal::cdf(double t) const {
  if (t <= lower_) return 0.0;
  double x = (t - mu_) / sigma_;
  if (lower_ == -kInf) return norm_cdf(x);
  // Work in whichever tail keeps the subtraction well conditioned.
  if (alpha_ >= 0.0) {
    double v = (norm_sf(alpha_) - norm_sf(x)) / z_;
    return std::min(1.0, std::max(0.0, v));
  }
  double v = (norm_cdf(x) - norm_cdf(alpha_)) / z_;
  return std::min(1.0, std::max(0.0, v));
}

double TruncatedNormal::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0))
    throw std::domain_error("TruncatedNormal::quantile: u outside (0,1)");
  if (lower_ == -kInf) return mu_ + sigma_ * norm_quantile(u);
  // P(X > t) = (1-u) * z on the untruncated scale.
  double tail = (1.0 - u) * z_;
  double x;
  if (tail > 0.5) {
    x = norm_quantile(1.0 - tail);
  } else {
    x = -norm_quantile(tail);
  }
  double t = mu_ + sigma_ * x;
  return std::max(t, lower_);
}

double TruncatedNormal::sample(RngStream& rng) const {
  if (lower_ == -kInf) return mu_ + sigma_ * rng.normal();
  if (alpha_ <= kTailSwitch) return quantile(rng.uniform());
  // Robert (1995) exponential rejection for deep tails.
  const double a = alpha_;
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    double x = a + rng.exponential() / lambda;
    double diff = x - lambda;
    if (std::log(rng.uniform()) <= -0.5 * diff * diff) return mu_ + sigma_ * x;
  }
}

Eigen::LLT<Eigen::MatrixXd> require_spd(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    std::ostringstream msg;
    msg << what << ": matrix not positive definite (min eigenvalue "
        << es.eigenvalues().minCoeff() << ")";
    throw std::domain_error(msg.str());
  }
  return llt;
}

Mvn::Mvn(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)), llt_(require_spd(cov_, "Mvn")) {
  log_det_ = 0.0;
  const auto& L = llt_.matrixL();
  for (int i = 0; i < cov_.rows(); ++i) log_det_ += 2.0 * std::log(L(i, i));
}

double Mvn::logpdf(const Eigen::VectorXd& x) const {
  const int d = static_cast<int>(mean_.size());
  Eigen::VectorXd diff = x - mean_;
  double quad = diff.dot(llt_.solve(diff));
  return -0.5 * (d * std::log(2.0 * M_PI) + log_det_ + quad);
}

Eigen::VectorXd Mvn::sample(RngStream& rng) const {
  Eigen::VectorXd z(mean_.size());
  for (int i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return mean_ + llt_.matrixL() * z;
}

MvnConditional Mvn::conditional(const std::vector<int>& given,
                                const Eigen::VectorXd& values) const {
  const int d = static_cast<int>(mean_.size());
  std::vector<bool> is_given(d, false);
  for (int g : given) is_given[g] = true;
  std::vector<int> rest;
  for (int i = 0; i < d; ++i)
    if (!is_given[i]) rest.push_back(i);

  const int ng = static_cast<int>(given.size());
  const int nr = static_cast<int>(rest.size());
  Eigen::MatrixXd S_gg(ng, ng), S_rg(nr, ng), S_rr(nr, nr);
  Eigen::VectorXd mu_g(ng), mu_r(nr);
  for (int a = 0; a < ng; ++a) {
    mu_g(a) = mean_(given[a]);
    for (int b = 0; b < ng; ++b) S_gg(a, b) = cov_(given[a], given[b]);
  }
  for (int a = 0; a < nr; ++a) {
    mu_r(a) = mean_(rest[a]);
    for (int b = 0; b < ng; ++b) S_rg(a, b) = cov_(rest[a], given[b]);
    for (int b = 0; b < nr; ++b) S_rr(a, b) = cov_(rest[a], rest[b]);
  }
  auto llt = require_spd(S_gg, "Mvn::conditional");
  Eigen::MatrixXd gain = llt.solve(S_rg.transpose()).transpose();  // nr x ng
  MvnConditional out;
  out.mean = mu_r + gain * (values - mu_g);
  out.cov = S_rr - gain * S_rg.transpose();
  return out;
}

double mahalanobis(const Eigen::VectorXd& w, const Eigen::MatrixXd& S) {
  auto llt = require_spd(S, "mahalanobis");
  return std::sqrt(w.dot(llt.solve(w)));
}

Eigen::MatrixXd sample_wishart(double df, const Eigen::MatrixXd& scale, RngStream& rng) {
  const int d = static_cast<int>(scale.rows());
  if (!(df > d - 1)) throw std::invalid_argument("sample_wishart: df must exceed dim-1");
  auto llt = require_spd(scale, "sample_wishart");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    A(i, i) = std::sqrt(rng.chi_squared(df - i));
    for (int j = 0; j < i; ++j) A(i, j) = rng.normal();
  }
  Eigen::MatrixXd LA = llt.matrixL() * A;
  return LA * LA.transpose();
}

Eigen::MatrixXd sample_inverse_wishart(double df, const Eigen::MatrixXd& scale,
                                       RngStream& rng) {
  const int d = static_cast<int>(scale.rows());
  if (!(df > d - 1)) throw std::invalid_argument("sample_inverse_wishart: df too small");
  auto llt = require_spd(scale, "sample_inverse_wishart");
  Eigen::MatrixXd scale_inv =
      llt.solve(Eigen::MatrixXd::Identity(d, d));
  // Symmetrize against accumulated round-off before the Bartlett draw.
  scale_inv = 0.5 * (scale_inv + scale_inv.transpose()).eval();
  Eigen::MatrixXd w = sample_wishart(df, scale_inv, rng);
  Eigen::MatrixXd out = w.llt().solve(Eigen::MatrixXd::Identity(d, d));
  return 0.5 * (out + out.transpose()).eval();
}

double log_mvgamma(int dim, double a) {
  double s = 0.25 * dim * (dim - 1) * std::log(M_PI);
  for (int j = 0; j < dim; ++j) s += std::lgamma(a - 0.5 * j);
  return s;
}

double inverse_wishart_logpdf(const Eigen::MatrixXd& x, double df,
                              const Eigen::MatrixXd& scale) {
  const int d = static_cast<int>(x.rows());
  auto llt_x = require_spd(x, "inverse_wishart_logpdf");
  auto llt_s = require_spd(scale, "inverse_wishart_logpdf scale");
  double logdet_x = 0, logdet_s = 0;
  for (int i = 0; i < d; ++i) {
    logdet_x += 2.0 * std::log(llt_x.matrixL()(i, i));
    logdet_s += 2.0 * std::log(llt_s.matrixL()(i, i));
  }
  double tr = llt_x.solve(scale).trace();
  return 0.5 * df * logdet_s - 0.5 * df * d * std::log(2.0) - log_mvgamma(d, 0.5 * df) -
         0.5 * (df + d + 1) * logdet_x - 0.5 * tr;
}

double wishart_logpdf(const Eigen::MatrixXd& x, double df, const Eigen::MatrixXd& scale) {
  const int d = static_cast<int>(x.rows());
  auto llt_x = require_spd(x, "wishart_logpdf");
  auto llt_s = require_spd(scale, "wishart_logpdf scale");
  double logdet_x = 0, logdet_s = 0;
  for (int i = 0; i < d; ++i) {
    logdet_x += 2.0 * std::log(llt_x.matrixL()(i, i));
    logdet_s += 2.0 * std::log(llt_s.matrixL()(i, i));
  }
  double tr = llt_s.solve(x).trace();
  return 0.5 * (df - d - 1) * logdet_x - 0.5 * tr - 0.5 * df * d * std::log(2.0) -
         0.5 * df * logdet_s - log_mvgamma(d, 0.5 * df);
}

double gamma_logpdf(double x, double shape, double rate) {
  if (!(x > 0)) return -kInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) -
         rate * x;
}

double normal_logpdf(double x, double mean, double var) {
  double d = x - mean;
  return -0.5 * std::log(2.0 * M_PI * var) - 0.5 * d * d / var;
}

double beta_logpdf(double x, double a, double b) {
  if (!(x > 0 && x < 1)) return -kInf;
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
         (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x);
}

}  // namespace copmed
