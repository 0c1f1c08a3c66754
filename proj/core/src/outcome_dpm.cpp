#include "copmed/outcome_dpm.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "copmed/distributions.hpp"
#include "copmed/normal.hpp"

namespace copmed {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStickClamp = 1e-12;

Eigen::VectorXd col_means(const Eigen::MatrixXd& data) {
  return data.colwise().mean();
}

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& data) {
  const int n = static_cast<int>(data.rows());
  Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(n - 1);
}

double log_mvn(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
               const Eigen::LLT<Eigen::MatrixXd>& llt, double log_det) {
  Eigen::VectorXd diff = x - mu;
  double quad = diff.dot(llt.solve(diff));
  return -0.5 * (x.size() * std::log(2.0 * M_PI) + log_det + quad);
}

double llt_log_det(const Eigen::LLT<Eigen::MatrixXd>& llt, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i) s += 2.0 * std::log(llt.matrixL()(i, i));
  return s;
}

}  // namespace

OutcomeModel::OutcomeModel(const Eigen::MatrixXd& data, int truncation) {
  const int n = static_cast<int>(data.rows());
  const int D = static_cast<int>(data.cols());
  nu0_ = (D >= 25) ? D + 2.0 : 25.0;
  nu_psi_ = (D >= 25) ? D + 2.0 : 25.0;

  Eigen::MatrixXd s2 = 0.5 * sample_cov(data);
  Eigen::LLT<Eigen::MatrixXd> test(s2);
  if (n <= D || test.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "outcome model: degenerate sample covariance (n=" << n << ", D=" << D << ")";
    throw std::domain_error(msg.str());
  }

  params_.m1 = col_means(data);
  params_.k0 = 3.0;
  params_.alpha = 10.0;
  params_.psi1 = s2 * (nu0_ - D - 1.0);
  params_.mu.assign(truncation, params_.m1);
  params_.sigma.assign(truncation, sample_cov(data));
  params_.gamma_prime.resize(truncation);
  for (int l = 0; l < truncation; ++l) params_.gamma_prime(l) = 0.5;
  params_.gamma_prime(truncation - 1) = 1.0;
  params_.gamma.resize(truncation);
  double stick = 1.0;
  for (int l = 0; l < truncation; ++l) {
    params_.gamma(l) = params_.gamma_prime(l) * stick;
    stick *= 1.0 - params_.gamma_prime(l);
  }
}

Step4Stats OutcomeModel::step4_sweep(const Eigen::MatrixXd& data,
                                     const std::vector<int>& unit_ids,
                                     std::vector<RngStream>& unit_streams,
                                     RngStream& rng) {
  Step4Stats stats;
  const int n = static_cast<int>(data.rows());
  const int D = static_cast<int>(data.cols());
  const int L = params_.L();
  labels_.assign(n, 0);

  // Per-sweep empirical hyper constants.
  Eigen::VectorXd m2 = col_means(data);
  Eigen::MatrixXd s2 = 0.5 * sample_cov(data);
  Eigen::LLT<Eigen::MatrixXd> s2_llt(s2);
  if (s2_llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "outcome model: degenerate sample covariance (n=" << n << ", D=" << D << ")";
    throw std::domain_error(msg.str());
  }
  Eigen::MatrixXd psi2 = s2;

  // --- labels (unit-keyed streams) ---
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llts;
  std::vector<double> log_dets(L);
  llts.reserve(L);
  for (int l = 0; l < L; ++l) {
    llts.emplace_back(require_spd(params_.sigma[l], "step4 labels"));
    log_dets[l] = llt_log_det(llts[l], D);
  }
  std::vector<double> logp(L), p(L);
  std::vector<std::vector<int>> members(L);
  for (int i = 0; i < n; ++i) {
    double best = -kInf;
    for (int l = 0; l < L; ++l) {
      double lw = params_.gamma(l) > 0 ? std::log(params_.gamma(l)) : -kInf;
      logp[l] = lw + log_mvn(data.row(i).transpose(), params_.mu[l], llts[l], log_dets[l]);
      best = std::max(best, logp[l]);
    }
    for (int l = 0; l < L; ++l) p[l] = (logp[l] == -kInf) ? 0.0 : std::exp(logp[l] - best);
    int z = unit_streams[unit_ids[i]].categorical(p.data(), L);
    labels_[i] = z;
    members[z].push_back(i);
  }

  // --- stick fractions and concentration ---
  double tail = static_cast<double>(n);
  for (int l = 0; l < L - 1; ++l) {
    tail -= static_cast<double>(members[l].size());
    double draw = rng.beta(1.0 + members[l].size(), params_.alpha + tail);
    params_.gamma_prime(l) = std::clamp(draw, kStickClamp, 1.0 - kStickClamp);
  }
  params_.gamma_prime(L - 1) = 1.0;
  double stick = 1.0;
  for (int l = 0; l < L; ++l) {
    params_.gamma(l) = params_.gamma_prime(l) * stick;
    stick *= 1.0 - params_.gamma_prime(l);
  }
  double log_sum = 0;
  for (int l = 0; l < L - 1; ++l) log_sum += std::log1p(-params_.gamma_prime(l));
  params_.alpha = rng.gamma(10.0 + L - 1, 1.0 - log_sum);

  // --- conjugate normal-inverse-Wishart cluster updates ---
  for (int l = 0; l < L; ++l) {
    const auto& idx = members[l];
    const double nl = static_cast<double>(idx.size());
    Eigen::VectorXd m_n;
    double k_n, nu_n;
    Eigen::MatrixXd psi_n;
    if (idx.empty()) {
      m_n = params_.m1;
      k_n = params_.k0;
      nu_n = nu0_;
      psi_n = params_.psi1;
    } else {
      Eigen::VectorXd bar = Eigen::VectorXd::Zero(D);
      for (int i : idx) bar += data.row(i).transpose();
      bar /= nl;
      Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(D, D);
      for (int i : idx) {
        Eigen::VectorXd d = data.row(i).transpose() - bar;
        scatter += d * d.transpose();
      }
      k_n = params_.k0 + nl;
      m_n = (params_.k0 * params_.m1 + nl * bar) / k_n;
      nu_n = nu0_ + nl;
      Eigen::VectorXd dm = bar - params_.m1;
      psi_n = params_.psi1 + scatter + (params_.k0 * nl / k_n) * (dm * dm.transpose());
    }
    params_.sigma[l] = sample_inverse_wishart(nu_n, psi_n, rng);
    Eigen::LLT<Eigen::MatrixXd> sl(params_.sigma[l] / k_n);
    Eigen::VectorXd z(D);
    for (int d = 0; d < D; ++d) z(d) = rng.normal();
    params_.mu[l] = m_n + sl.matrixL() * z;
  }

  // --- hyper updates ---
  // m1 | {mu_l, sigma_l}, k0  ~  normal (prior N(m2, s2)).
  {
    Eigen::MatrixXd prec = s2_llt.solve(Eigen::MatrixXd::Identity(D, D));
    Eigen::VectorXd lin = prec * m2;
    for (int l = 0; l < L; ++l) {
      Eigen::LLT<Eigen::MatrixXd> llt(params_.sigma[l]);
      Eigen::MatrixXd sinv = llt.solve(Eigen::MatrixXd::Identity(D, D));
      prec += params_.k0 * sinv;
      lin += params_.k0 * (sinv * params_.mu[l]);
    }
    Eigen::LLT<Eigen::MatrixXd> prec_llt(0.5 * (prec + prec.transpose()).eval());
    Eigen::VectorXd mean = prec_llt.solve(lin);
    // Sample N(mean, prec^{-1}) via the Cholesky of the precision.
    Eigen::VectorXd z(D);
    for (int d = 0; d < D; ++d) z(d) = rng.normal();
    Eigen::MatrixXd Lmat = prec_llt.matrixL();
    params_.m1 = mean + Lmat.transpose().triangularView<Eigen::Upper>().solve(z);
  }
  // k0 | {mu_l, sigma_l}, m1  ~  Gamma (prior Gamma(6.01/2, 2.01/2)).
  {
    double quad = 0;
    for (int l = 0; l < L; ++l) {
      Eigen::VectorXd d = params_.mu[l] - params_.m1;
      Eigen::LLT<Eigen::MatrixXd> llt(params_.sigma[l]);
      quad += d.dot(llt.solve(d));
    }
    params_.k0 = rng.gamma(6.01 / 2.0 + 0.5 * L * D, 2.01 / 2.0 + 0.5 * quad);
  }
  // psi1: Metropolis with a mean-preserving Wishart proposal (the IW
  // hyperprior is not conjugate to the Wishart-shaped likelihood in psi1).
  {
    const double nu_p = 100.0 + D;
    Eigen::MatrixXd prop = sample_wishart(nu_p, params_.psi1 / nu_p, rng);
    ++stats.psi1_proposals;
    auto target = [&](const Eigen::MatrixXd& psi) {
      double v = inverse_wishart_logpdf(psi, nu_psi_, psi2);
      for (int l = 0; l < L; ++l)
        v += inverse_wishart_logpdf(params_.sigma[l], nu0_, psi);
      return v;
    };
    bool prop_ok = Eigen::LLT<Eigen::MatrixXd>(prop).info() == Eigen::Success;
    if (prop_ok) {
      double log_ar = target(prop) - target(params_.psi1) +
                      wishart_logpdf(params_.psi1, nu_p, prop / nu_p) -
                      wishart_logpdf(prop, nu_p, params_.psi1 / nu_p);
      if (std::log(rng.uniform()) < log_ar) {
        params_.psi1 = prop;
        ++stats.psi1_accepts;
      }
    }
  }
  return stats;
}

OutcomePredictor::OutcomePredictor(const OutcomeParams& p, std::vector<int> given)
    : given_(std::move(given)) {
  const int L = p.L();
  const int g = static_cast<int>(given_.size());
  comps_.reserve(L);
  for (int l = 0; l < L; ++l) {
    Component c;
    c.log_gamma = p.gamma(l) > 0 ? std::log(p.gamma(l)) : -kInf;
    c.mu_given.resize(g);
    Eigen::MatrixXd S_gg(g, g);
    Eigen::VectorXd S_yg(g);
    for (int a = 0; a < g; ++a) {
      c.mu_given(a) = p.mu[l](given_[a]);
      S_yg(a) = p.sigma[l](0, given_[a]);
      for (int b = 0; b < g; ++b) S_gg(a, b) = p.sigma[l](given_[a], given_[b]);
    }
    c.llt = require_spd(S_gg, "OutcomePredictor");
    c.log_norm = -0.5 * (g * std::log(2.0 * M_PI) + llt_log_det(c.llt, g));
    c.gain = c.llt.solve(S_yg);
    c.a = p.mu[l](0) - c.gain.dot(c.mu_given);
    c.s2 = p.sigma[l](0, 0) - c.gain.dot(S_yg);
    if (c.s2 < 1e-300) c.s2 = 1e-300;
    comps_.push_back(std::move(c));
  }
}

void OutcomePredictor::components(const Eigen::VectorXd& v, std::vector<double>& w,
                                  std::vector<double>& mean,
                                  std::vector<double>& var) const {
  const int L = static_cast<int>(comps_.size());
  w.resize(L);
  mean.resize(L);
  var.resize(L);
  double best = -kInf;
  for (int l = 0; l < L; ++l) {
    const auto& c = comps_[l];
    Eigen::VectorXd diff = v - c.mu_given;
    double quad = diff.dot(c.llt.solve(diff));
    double lw = c.log_gamma + c.log_norm - 0.5 * quad;
    w[l] = lw;
    mean[l] = c.a + c.gain.dot(v);
    var[l] = c.s2;
    best = std::max(best, lw);
  }
  double total = 0;
  for (int l = 0; l < L; ++l) {
    w[l] = (w[l] == -kInf) ? 0.0 : std::exp(w[l] - best);
    total += w[l];
  }
  for (int l = 0; l < L; ++l) w[l] /= total;
}

double OutcomePredictor::mean(const Eigen::VectorXd& v) const {
  std::vector<double> w, m, s2;
  components(v, w, m, s2);
  double out = 0;
  for (size_t l = 0; l < w.size(); ++l) out += w[l] * m[l];
  return out;
}

double OutcomePredictor::density(double y, const Eigen::VectorXd& v) const {
  std::vector<double> w, m, s2;
  components(v, w, m, s2);
  double out = 0;
  for (size_t l = 0; l < w.size(); ++l) {
    double d = y - m[l];
    out += w[l] * std::exp(-0.5 * d * d / s2[l]) / std::sqrt(2.0 * M_PI * s2[l]);
  }
  return out;
}

double OutcomePredictor::log_density(double y, const Eigen::VectorXd& v) const {
  double d = density(y, v);
  return d > 0 ? std::log(d) : -kInf;
}

double OutcomePredictor::sample(const Eigen::VectorXd& v, RngStream& rng) const {
  std::vector<double> w, m, s2;
  components(v, w, m, s2);
  int l = rng.categorical(w.data(), static_cast<int>(w.size()));
  return m[l] + std::sqrt(s2[l]) * rng.normal();
}

}  // namespace copmed
