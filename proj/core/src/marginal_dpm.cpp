#include "copmed/marginal_dpm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "copmed/normal.hpp"

namespace copmed {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStickClamp = 1e-12;
constexpr double kTauProposalConcentration = 100.0;
}  // namespace

MarginalMixture::MarginalMixture(const MarginalParams& p, double lower, double eta)
    : lower_(lower) {
  const int K = p.k_max();
  comps_.reserve(K);
  w_.reserve(K);
  for (int k = 0; k < K; ++k) {
    comps_.emplace_back(p.beta0(k) + eta, 1.0 / p.tau(k), lower);
    w_.push_back(p.omega(k));
  }
}

double MarginalMixture::pdf(double t) const {
  double s = 0;
  for (size_t k = 0; k < comps_.size(); ++k) s += w_[k] * comps_[k].pdf(t);
  return s;
}

double MarginalMixture::logpdf(double t) const {
  double p = pdf(t);
  if (p <= 0) return -kInf;
  return std::log(p);
}

double MarginalMixture::cdf(double t) const {
  double s = 0;
  for (size_t k = 0; k < comps_.size(); ++k) s += w_[k] * comps_[k].cdf(t);
  return std::min(1.0, s);
}

double MarginalMixture::quantile(double u) const {
  // The mixture quantile lies between the extreme component quantiles.
  double lo = kInf, hi = -kInf;
  for (size_t k = 0; k < comps_.size(); ++k) {
    if (w_[k] <= 0) continue;
    double q = comps_[k].quantile(u);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  return quantile(u, 0.5 * (lo + hi));
}

double MarginalMixture::quantile(double u, double guess) const {
  if (!(u > 0.0 && u < 1.0))
    throw std::domain_error("MarginalMixture::quantile: u outside (0,1)");
  double lo = kInf, hi = -kInf;
  for (size_t k = 0; k < comps_.size(); ++k) {
    if (w_[k] <= 0) continue;
    double q = comps_[k].quantile(u);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  if (!(lo <= hi)) throw std::logic_error("MarginalMixture::quantile: empty mixture");
  double t = std::clamp(guess, lo, hi);
  // Safeguarded Newton: bisect whenever the step leaves the bracket.
  for (int it = 0; it < 200; ++it) {
    double f = cdf(t) - u;
    if (f > 0)
      hi = t;
    else
      lo = t;
    if (hi - lo < 1e-13 * (1.0 + std::fabs(t))) break;
    double d = pdf(t);
    double step = (d > 0) ? f / d : 0.0;
    double next = t - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - t) < 1e-14 * (1.0 + std::fabs(t))) {
      t = next;
      break;
    }
    t = next;
  }
  return t;
}

double latent_score(const MarginalMixture& mix, double t) {
  return clamped_norm_quantile(mix.cdf(t));
}

CopulaCoupling copula_coupling(const Eigen::MatrixXd& H, const Eigen::MatrixXd& R,
                               int j) {
  const int d = static_cast<int>(R.rows());
  Eigen::MatrixXd R_inv = require_spd(R, "copula_coupling")
                              .solve(Eigen::MatrixXd::Identity(d, d));
  CopulaCoupling c;
  c.r_inv_jj = R_inv(j, j);
  c.cross = Eigen::VectorXd::Zero(H.rows());
  for (int k = 0; k < d; ++k) {
    if (k == j) continue;
    c.cross += R_inv(j, k) * H.col(k);
  }
  return c;
}

double marginal_log_prior(const MarginalParams& p, const MarginalHypers& h) {
  const int K = p.k_max();
  double lp = 0;
  for (int k = 0; k < K; ++k) {
    lp += normal_logpdf(p.beta0(k), p.mu, 1.0 / p.S);
    lp += gamma_logpdf(p.tau(k), 1.0, 1.0);
  }
  lp += normal_logpdf(p.mu, h.mu_star, 1.0 / h.S_star);
  lp += gamma_logpdf(p.S, p.a_star, h.b_star(p.a_star));
  if (!(p.a_star >= 1.0 && p.a_star <= 5.0)) return -kInf;
  lp += -std::log(4.0);  // Unif(1,5) on a_star
  for (int j = 0; j < p.beta.size(); ++j)
    lp += normal_logpdf(p.beta(j), 0.0, h.beta_prior_var);
  for (int k = 0; k < K - 1; ++k)
    lp += beta_logpdf(std::clamp(p.omega_prime(k), kStickClamp, 1.0 - kStickClamp),
                      1.0, p.lambda);
  lp += gamma_logpdf(p.lambda, 1.0, 1.0);
  return lp;
}

double marginal_logpost(const MarginalParams& p, const MarginalHypers& h,
                        const Eigen::VectorXd& T, const Eigen::VectorXd& eta,
                        const CopulaCoupling& coupling, Eigen::VectorXd* H_out) {
  const int n = static_cast<int>(T.size());
  double loglik = 0;
  double sum_h2 = 0;
  double sum_cross = 0;
  for (int i = 0; i < n; ++i) {
    MarginalMixture mix(p, h.lower, eta(i));
    double lp = mix.logpdf(T(i));
    if (lp == -kInf) return -kInf;
    loglik += lp;
    double hij = latent_score(mix, T(i));
    sum_h2 += hij * hij;
    sum_cross += hij * coupling.cross(i);
    if (H_out) (*H_out)(i) = hij;
  }
  return 0.5 * (1.0 - coupling.r_inv_jj) * sum_h2 - sum_cross + loglik +
         marginal_log_prior(p, h);
}

double marginal_logpost(const MarginalParams& p, const MarginalHypers& h,
                        const Eigen::VectorXd& T, const Eigen::MatrixXd& X,
                        const Eigen::MatrixXd& H, const Eigen::MatrixXd& R, int j) {
  Eigen::VectorXd eta = X * p.beta;
  CopulaCoupling coupling = copula_coupling(H, R, j);
  return marginal_logpost(p, h, T, eta, coupling, nullptr);
}

MarginalModel::MarginalModel(const Eigen::VectorXd& observed, int k_max, int P,
                             double lower, bool bstar_appendix_f) {
  const int n_obs = static_cast<int>(observed.size());
  if (n_obs < 2) throw std::invalid_argument("MarginalModel: needs >= 2 observed values");
  double mean = observed.mean();
  double var = (observed.array() - mean).square().sum() / n_obs;
  if (!(var > 0)) var = 1e-6;

  hypers_.mu_star = mean;
  hypers_.sigma_hat2 = var;
  hypers_.S_star = 2.0 / var;
  hypers_.lower = lower;
  hypers_.bstar_appendix_f = bstar_appendix_f;

  params_.beta0.resize(k_max);
  Eigen::VectorXd sorted = observed;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  for (int k = 0; k < k_max; ++k) {
    double q = (k + 0.5) / k_max;
    params_.beta0(k) = sorted(static_cast<int>(q * (n_obs - 1)));
  }
  params_.tau = Eigen::VectorXd::Constant(k_max, 2.0 / var);
  params_.beta = Eigen::VectorXd::Zero(P);
  params_.omega_prime.resize(k_max);
  for (int k = 0; k < k_max; ++k) params_.omega_prime(k) = 1.0 / (k_max - k);
  params_.omega_prime(k_max - 1) = 1.0;
  params_.omega.resize(k_max);
  double stick = 1.0;
  for (int k = 0; k < k_max; ++k) {
    params_.omega(k) = params_.omega_prime(k) * stick;
    stick *= 1.0 - params_.omega_prime(k);
  }
  params_.lambda = 1.0;
  params_.mu = mean;
  params_.S = 2.0 / var;
  params_.a_star = 3.0;

  adapt_mean_ = Eigen::VectorXd::Zero(P);
  adapt_m2_ = Eigen::MatrixXd::Zero(P, P);
}

void MarginalModel::refresh_scores(const Eigen::VectorXd& T, const Eigen::MatrixXd& X,
                                   Eigen::MatrixXd& H, int j) const {
  Eigen::VectorXd eta = X * params_.beta;
  for (int i = 0; i < T.size(); ++i) {
    MarginalMixture mix(params_, hypers_.lower, eta(i));
    H(i, j) = latent_score(mix, T(i));
  }
}

Step1Stats MarginalModel::step1_sweep(const Eigen::VectorXd& T, const Eigen::MatrixXd& X,
                                      Eigen::MatrixXd& H, int j,
                                      const Eigen::MatrixXd& R, RngStream& rng) {
  Step1Stats stats;
  const int n = static_cast<int>(T.size());
  const int K = params_.k_max();
  const int P = static_cast<int>(params_.beta.size());
  labels_.resize(n);

  Eigen::VectorXd eta = X * params_.beta;

  // --- 1.a: labels, stick weights, mass ---
  std::vector<double> logp(K), counts(K, 0.0);
  for (int i = 0; i < n; ++i) {
    double best = -kInf;
    for (int k = 0; k < K; ++k) {
      TruncatedNormal tn(params_.beta0(k) + eta(i), 1.0 / params_.tau(k), hypers_.lower);
      double lw = params_.omega(k) > 0 ? std::log(params_.omega(k)) : -kInf;
      logp[k] = lw + tn.logpdf(T(i));
      best = std::max(best, logp[k]);
    }
    std::vector<double> p(K);
    for (int k = 0; k < K; ++k) p[k] = (logp[k] == -kInf) ? 0.0 : std::exp(logp[k] - best);
    int z = rng.categorical(p.data(), K);
    labels_[i] = z;
    counts[z] += 1.0;
  }
  double tail = static_cast<double>(n);
  for (int k = 0; k < K - 1; ++k) {
    tail -= counts[k];
    double draw = rng.beta(1.0 + counts[k], params_.lambda + tail);
    params_.omega_prime(k) = std::clamp(draw, kStickClamp, 1.0 - kStickClamp);
  }
  params_.omega_prime(K - 1) = 1.0;  // truncation remainder
  double stick = 1.0;
  for (int k = 0; k < K; ++k) {
    params_.omega(k) = params_.omega_prime(k) * stick;
    stick *= 1.0 - params_.omega_prime(k);
  }
  double log_sum = 0;
  for (int k = 0; k < K; ++k)
    log_sum += std::log1p(-std::min(params_.omega(k), 1.0 - kStickClamp));
  params_.lambda = rng.gamma(1.0 + K - 1, 1.0 - log_sum);

  // Mixture changed: refresh scores and the cached conditional.
  CopulaCoupling coupling = copula_coupling(H, R, j);
  Eigen::VectorXd H_cur(n), H_prop(n);
  double cur = marginal_logpost(params_, hypers_, T, eta, coupling, &H_cur);
  H.col(j) = H_cur;

  // --- 1.b: (a*, mu, S); only prior terms move ---
  {
    MarginalParams prop = params_;
    prop.a_star = rng.uniform(1.0, 5.0);
    prop.mu = rng.normal(params_.mu, std::sqrt(hypers_.sigma_hat2 / 2.0));
    prop.S = rng.uniform(params_.S - 0.1, params_.S + 0.1);
    ++stats.b_proposals;
    if (prop.S > 0) {
      double d = marginal_log_prior(prop, hypers_) - marginal_log_prior(params_, hypers_);
      if (std::log(rng.uniform()) < d) {
        params_ = prop;
        cur += d;
        ++stats.b_accepts;
      }
    }
  }

  // --- 1.c: cluster intercepts, random-walk block with step 0.1 ---
  {
    MarginalParams prop = params_;
    for (int k = 0; k < K; ++k) prop.beta0(k) += 0.1 * rng.normal();
    ++stats.c_proposals;
    double cand = marginal_logpost(prop, hypers_, T, eta, coupling, &H_prop);
    if (std::log(rng.uniform()) < cand - cur) {
      params_ = prop;
      cur = cand;
      H.col(j) = H_prop;
      ++stats.c_accepts;
    }
  }

  // --- 1.d: covariate coefficients, adaptive Metropolis ---
  if (P > 0) {
    Eigen::MatrixXd emp;
    if (adapt_n_ < 2 * P) {
      emp = 0.01 * Eigen::MatrixXd::Identity(P, P);
    } else {
      emp = adapt_m2_ / static_cast<double>(adapt_n_ - 1);
    }
    Eigen::MatrixXd prop_cov = (2.38 * 2.38 / (2.0 * P)) * emp +
                               (0.01 / (2.0 * P)) * Eigen::MatrixXd::Identity(P, P);
    Eigen::LLT<Eigen::MatrixXd> llt(prop_cov);
    MarginalParams prop = params_;
    Eigen::VectorXd z(P);
    for (int p = 0; p < P; ++p) z(p) = rng.normal();
    prop.beta += llt.matrixL() * z;
    ++stats.d_proposals;
    Eigen::VectorXd eta_prop = X * prop.beta;
    double cand = marginal_logpost(prop, hypers_, T, eta_prop, coupling, &H_prop);
    if (std::log(rng.uniform()) < cand - cur) {
      params_ = prop;
      cur = cand;
      eta.swap(eta_prop);
      H.col(j) = H_prop;
      ++stats.d_accepts;
    }
    // Push the realized state into the running covariance.
    ++adapt_n_;
    Eigen::VectorXd delta = params_.beta - adapt_mean_;
    adapt_mean_ += delta / static_cast<double>(adapt_n_);
    adapt_m2_ += delta * (params_.beta - adapt_mean_).transpose();
  }

  // --- 1.e: precisions via a concentrated Gamma proposal on 1/tau ---
  {
    MarginalParams prop = params_;
    const double c = kTauProposalConcentration;
    double log_q = 0;  // q(cur|prop) - q(prop|cur)
    for (int k = 0; k < K; ++k) {
      double v_cur = 1.0 / params_.tau(k);
      double v_prop = rng.gamma(c * v_cur, c);
      prop.tau(k) = 1.0 / v_prop;
      log_q += gamma_logpdf(v_cur, c * v_prop, c) - gamma_logpdf(v_prop, c * v_cur, c);
    }
    ++stats.e_proposals;
    double cand = marginal_logpost(prop, hypers_, T, eta, coupling, &H_prop);
    if (std::log(rng.uniform()) < cand - cur + log_q) {
      params_ = prop;
      cur = cand;
      H.col(j) = H_prop;
      ++stats.e_accepts;
    }
  }

  return stats;
}

}  // namespace copmed
