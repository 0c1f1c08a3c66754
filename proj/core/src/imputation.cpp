#include "copmed/imputation.hpp"

#include <cmath>
#include <limits>

#include "copmed/chain.hpp"
#include "copmed/normal.hpp"

namespace copmed {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// 0.5 h'(I - R^{-1})h for a single unit; log|R| cancels in ratios.
double unit_copula_term(const Eigen::VectorXd& h, const Eigen::MatrixXd& R_inv) {
  return 0.5 * (h.squaredNorm() - h.dot(R_inv * h));
}

}  // namespace

Step3Result step3_impute_unit(
    int unit, int arm, const Eigen::VectorXd& x, double y,
    const std::vector<const MarginalParams*>& margin_params,
    const std::vector<const MarginalHypers*>& margin_hypers,
    const Eigen::MatrixXd& R_inv, const OutcomePredictor& predictor,
    Eigen::MatrixXd& T, Eigen::MatrixXd& H, const Eigen::VectorXd& sigma_t,
    RngStream& rng) {
  Step3Result res;
  const int twoK = static_cast<int>(T.cols());
  const int K = twoK / 2;
  const int P = static_cast<int>(x.size());
  const int missing_arm = 1 - arm;

  Eigen::VectorXd h = H.row(unit).transpose();
  Eigen::VectorXd v(twoK + P);  // conditioning values for the outcome density
  v.head(twoK) = T.row(unit).transpose();
  v.tail(P) = x;

  double cur_outcome = predictor.log_density(y, v);

  for (int k = 0; k < K; ++k) {
    const int j = missing_arm * K + k;
    const auto& p = *margin_params[j];
    const auto& hy = *margin_hypers[j];
    MarginalMixture mix(p, hy.lower, x.size() ? x.dot(p.beta) : 0.0);

    double t_cur = T(unit, j);
    double t_prop = t_cur + sigma_t(j) * rng.normal();
    ++res.proposals;
    if (t_prop < hy.lower) continue;  // outside the support: auto-reject

    double lp_cur = mix.logpdf(t_cur);
    double lp_prop = mix.logpdf(t_prop);
    if (lp_prop == -kInf) continue;

    double h_prop = latent_score(mix, t_prop);
    double cop_cur = unit_copula_term(h, R_inv);
    Eigen::VectorXd h_new = h;
    h_new(j) = h_prop;
    double cop_prop = unit_copula_term(h_new, R_inv);

    v(j) = t_prop;
    double prop_outcome = predictor.log_density(y, v);

    double log_ar = (cop_prop + lp_prop + prop_outcome) - (cop_cur + lp_cur + cur_outcome);
    if (std::log(rng.uniform()) < log_ar) {
      T(unit, j) = t_prop;
      h(j) = h_prop;
      cur_outcome = prop_outcome;
      ++res.accepts;
    } else {
      v(j) = t_cur;
    }
  }
  H.row(unit) = h.transpose();
  return res;
}

Eigen::MatrixXd draw_counterfactual_mediators(const PosteriorDraw& draw, double lower,
                                              const Eigen::VectorXd& x,
                                              const std::vector<int>& pattern, int n_mc,
                                              RngStream& rng) {
  const int twoK = static_cast<int>(draw.T.cols());
  const int K = twoK / 2;
  Eigen::LLT<Eigen::MatrixXd> llt(draw.corr.R);
  std::vector<MarginalMixture> mixes;
  mixes.reserve(K);
  std::vector<int> cols(K);
  for (int k = 0; k < K; ++k) {
    cols[k] = pattern[k] * K + k;
    const auto& p = draw.margins[cols[k]];
    mixes.emplace_back(p, lower, x.size() ? x.dot(p.beta) : 0.0);
  }
  Eigen::MatrixXd out(n_mc, K);
  Eigen::VectorXd z(twoK);
  for (int s = 0; s < n_mc; ++s) {
    for (int j = 0; j < twoK; ++j) z(j) = rng.normal();
    Eigen::VectorXd h = llt.matrixL() * z;
    for (int k = 0; k < K; ++k) {
      double u = norm_cdf(h(cols[k]));
      u = std::min(std::max(u, kCdfClamp), 1.0 - kCdfClamp);
      out(s, k) = mixes[k].quantile(u);
    }
  }
  return out;
}

}  // namespace copmed
