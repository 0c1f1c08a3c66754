#include "copmed/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "copmed/distributions.hpp"
#include "copmed/marginal_dpm.hpp"
#include "copmed/normal.hpp"

namespace copmed {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Observed rows of margin (k,z): values and covariates.
void margin_observations(const Dataset& data, int k, int z, Eigen::VectorXd& t,
                         Eigen::MatrixXd& x) {
  std::vector<int> ids;
  for (int i = 0; i < data.n(); ++i)
    if (data.units[i].z == z) ids.push_back(i);
  t.resize(ids.size());
  x.resize(ids.size(), data.P);
  for (size_t a = 0; a < ids.size(); ++a) {
    t(a) = data.units[ids[a]].m(k);
    x.row(a) = data.units[ids[a]].x.transpose();
  }
}

}  // namespace

double dic3_marginal(const std::vector<PosteriorDraw>& draws, const Dataset& data,
                     int k, int z) {
  if (draws.size() < 2) throw std::invalid_argument("dic3: needs >= 2 retained draws");
  const int j = margin_index(k, z, data.K);
  Eigen::VectorXd t;
  Eigen::MatrixXd x;
  margin_observations(data, k, z, t, x);
  const int n_obs = static_cast<int>(t.size());
  const int m = static_cast<int>(draws.size());

  double mean_loglik = 0;
  Eigen::VectorXd predictive = Eigen::VectorXd::Zero(n_obs);
  for (const auto& draw : draws) {
    const auto& p = draw.margins[j];
    double loglik = 0;
    for (int i = 0; i < n_obs; ++i) {
      MarginalMixture mix(p, data.lower_bound, data.P ? x.row(i).dot(p.beta) : 0.0);
      double d = mix.pdf(t(i));
      loglik += d > 0 ? std::log(d) : -kInf;
      predictive(i) += d;
    }
    mean_loglik += loglik;
  }
  mean_loglik /= m;

  double log_pred = 0;
  for (int i = 0; i < n_obs; ++i) {
    double f = predictive(i) / m;
    if (!(f > 0)) {
      std::ostringstream msg;
      msg << "dic3: zero predictive density at observation " << i << " of margin (k="
          << k + 1 << ", z=" << z << ")";
      throw std::domain_error(msg.str());
    }
    log_pred += std::log(f);
  }
  return -4.0 * mean_loglik + 2.0 * log_pred;
}

double dic3_parametric(const Dataset& data, int k, int z, int m_draws,
                       std::uint64_t seed) {
  Eigen::VectorXd t;
  Eigen::MatrixXd x;
  margin_observations(data, k, z, t, x);
  const int n_obs = static_cast<int>(t.size());
  const int p = data.P + 1;
  if (n_obs <= p) throw std::invalid_argument("dic3_parametric: margin underdetermined");

  Eigen::MatrixXd design(n_obs, p);
  design.col(0).setOnes();
  design.rightCols(data.P) = x;
  Eigen::MatrixXd xtx = design.transpose() * design;
  Eigen::LLT<Eigen::MatrixXd> llt = require_spd(xtx, "dic3_parametric");
  Eigen::VectorXd bhat = llt.solve(design.transpose() * t);
  double rss = (t - design * bhat).squaredNorm();

  // Noninformative posterior: sigma2 | y ~ Inv-Gamma((n-p)/2, rss/2),
  // beta | sigma2 ~ N(bhat, sigma2 (X'X)^{-1}).
  Eigen::MatrixXd xtx_inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::LLT<Eigen::MatrixXd> inv_llt(0.5 * (xtx_inv + xtx_inv.transpose()).eval());
  RngStream rng(seed, 77);

  double mean_loglik = 0;
  Eigen::VectorXd predictive = Eigen::VectorXd::Zero(n_obs);
  for (int d = 0; d < m_draws; ++d) {
    double sigma2 = 1.0 / rng.gamma(0.5 * (n_obs - p), 0.5 * rss);
    Eigen::VectorXd zvec(p);
    for (int a = 0; a < p; ++a) zvec(a) = rng.normal();
    Eigen::VectorXd beta = bhat + std::sqrt(sigma2) * (inv_llt.matrixL() * zvec);
    Eigen::VectorXd mu = design * beta;
    double loglik = 0;
    for (int i = 0; i < n_obs; ++i) {
      double dens = std::exp(normal_logpdf(t(i), mu(i), sigma2));
      loglik += normal_logpdf(t(i), mu(i), sigma2);
      predictive(i) += dens;
    }
    mean_loglik += loglik;
  }
  mean_loglik /= m_draws;
  double log_pred = 0;
  for (int i = 0; i < n_obs; ++i) {
    double f = predictive(i) / m_draws;
    if (!(f > 0)) {
      std::ostringstream msg;
      msg << "dic3_parametric: zero predictive density at observation " << i;
      throw std::domain_error(msg.str());
    }
    log_pred += std::log(f);
  }
  return -4.0 * mean_loglik + 2.0 * log_pred;
}

PosteriorPredictive posterior_predictive(const std::vector<PosteriorDraw>& draws,
                                         const Dataset& data, int n_rep,
                                         std::uint64_t seed) {
  if (draws.empty()) throw std::invalid_argument("posterior_predictive: no draws");
  if (n_rep < 1) throw std::invalid_argument("posterior_predictive: n_rep must be >= 1");
  const int K = data.K;
  const int P = data.P;
  const int n = data.n();

  PosteriorPredictive out;
  out.mediator_mean = Eigen::MatrixXd::Zero(n, K);
  out.outcome_mean = Eigen::VectorXd::Zero(n);

  std::vector<int> given(2 * K + P);
  for (int a = 0; a < 2 * K + P; ++a) given[a] = 1 + a;

  auto simulate = [&](const PosteriorDraw& draw, std::uint64_t stream,
                      Eigen::MatrixXd& med, Eigen::VectorXd& yrep) {
    RngStream rng(seed, stream);
    Eigen::LLT<Eigen::MatrixXd> llt(draw.corr.R);
    OutcomePredictor pred0(draw.outcome[0], given);
    OutcomePredictor pred1(draw.outcome[1], given);
    Eigen::VectorXd z(2 * K), v(2 * K + P);
    for (int i = 0; i < n; ++i) {
      const auto& u = data.units[i];
      for (int j = 0; j < 2 * K; ++j) z(j) = rng.normal();
      Eigen::VectorXd h = llt.matrixL() * z;
      for (int j = 0; j < 2 * K; ++j) {
        const auto& p = draw.margins[j];
        MarginalMixture mix(p, data.lower_bound, P ? u.x.dot(p.beta) : 0.0);
        double uq = std::min(std::max(norm_cdf(h(j)), kCdfClamp), 1.0 - kCdfClamp);
        v(j) = mix.quantile(uq);
      }
      v.tail(P) = u.x;
      for (int k = 0; k < K; ++k) med(i, k) = v(u.z * K + k);
      yrep(i) = (u.z == 1 ? pred1 : pred0).sample(v, rng);
    }
  };

  // Predictive means over all draws.
  Eigen::MatrixXd med(n, K);
  Eigen::VectorXd yrep(n);
  for (size_t d = 0; d < draws.size(); ++d) {
    simulate(draws[d], (1ULL << 16) + d, med, yrep);
    out.mediator_mean += med;
    out.outcome_mean += yrep;
  }
  out.mediator_mean /= static_cast<double>(draws.size());
  out.outcome_mean /= static_cast<double>(draws.size());

  // Replicates from evenly spaced draws.
  for (int r = 0; r < n_rep; ++r) {
    int d = static_cast<int>((static_cast<long>(r) * draws.size()) / n_rep);
    Eigen::MatrixXd mrep(n, K);
    Eigen::VectorXd yr(n);
    simulate(draws[d], (1ULL << 17) + r, mrep, yr);
    out.mediator_reps.push_back(std::move(mrep));
    out.outcome_reps.push_back(std::move(yr));
  }
  return out;
}

std::vector<TraceSummaryRow> trace_summary(const TraceData& traces) {
  std::vector<TraceSummaryRow> rows;
  const int n = static_cast<int>(traces.values.rows());
  for (size_t c = 0; c < traces.names.size(); ++c) {
    TraceSummaryRow r;
    r.name = traces.names[c];
    if (n == 0) {
      rows.push_back(r);
      continue;
    }
    Eigen::VectorXd v = traces.values.col(c);
    r.mean = v.mean();
    Eigen::VectorXd centered = v.array() - r.mean;
    double var = centered.squaredNorm() / std::max(n - 1, 1);
    r.sd = std::sqrt(var);
    if (!(var > 0)) {
      r.degenerate = true;
      r.lag1 = 0;
      r.ess = static_cast<double>(n);
      rows.push_back(r);
      continue;
    }
    auto rho = [&](int lag) {
      double s = 0;
      for (int i = 0; i + lag < n; ++i) s += centered(i) * centered(i + lag);
      return s / centered.squaredNorm();
    };
    r.lag1 = rho(1);
    // Geyer initial positive sequence.
    double tail = 0;
    for (int m = 0; 2 * m + 1 < n; ++m) {
      double gamma = rho(2 * m) + rho(2 * m + 1);
      if (gamma <= 0) break;
      tail += gamma;
    }
    double denom = 2.0 * tail - 1.0;
    r.ess = denom > 0 ? n / denom : static_cast<double>(n);
    if (r.ess > n) r.ess = static_cast<double>(n);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace copmed
