#include "copmed/sensitivity.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "copmed/distributions.hpp"
#include "copmed/imputation.hpp"
#include "copmed/parallel.hpp"

namespace copmed {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> given_full_joint(int K, int P) {
  std::vector<int> g(2 * K + P);
  for (int a = 0; a < 2 * K + P; ++a) g[a] = 1 + a;
  return g;
}
}  // namespace

DStatistics d_statistics(const Eigen::VectorXd& delta, const Eigen::MatrixXd& S) {
  const int K = static_cast<int>(delta.size());
  if (S.rows() != K || S.cols() != K)
    throw std::invalid_argument("d_statistics: dimension mismatch");
  DStatistics ds;
  ds.d_single.resize(K);
  for (int k = 0; k < K; ++k) {
    if (!(S(k, k) > 0)) throw std::domain_error("d_statistics: nonpositive variance");
    ds.d_single(k) = std::sqrt(delta(k) * delta(k) / S(k, k));
  }
  ds.d_pair = Eigen::MatrixXd::Zero(K, K);
  ds.pair_thresh_factor = Eigen::MatrixXd::Zero(K, K);
  double r_sum = 0;
  for (int j = 0; j < K; ++j)
    for (int k = j + 1; k < K; ++k) {
      Eigen::Vector2d w(delta(j), delta(k));
      Eigen::Matrix2d Sjk;
      Sjk << S(j, j), S(j, k), S(k, j), S(k, k);
      ds.d_pair(j, k) = mahalanobis(w, Sjk);
      double r = S(j, k) / std::sqrt(S(j, j) * S(k, k));
      ds.pair_thresh_factor(j, k) = std::sqrt(2.0 + 2.0 * r);
      r_sum += r;
    }
  ds.d_all = (K == 1) ? ds.d_single(0) : mahalanobis(delta, S);
  ds.all_thresh_factor = std::sqrt(static_cast<double>(K) + 2.0 * r_sum);
  return ds;
}

double TiltedMixture::density(double y) const {
  double out = 0;
  for (size_t l = 0; l < w.size(); ++l) {
    double d = y - mean[l];
    out += w[l] * std::exp(-0.5 * d * d / var[l]) / std::sqrt(2.0 * M_PI * var[l]);
  }
  return out;
}

double TiltedMixture::mixture_mean() const {
  double out = 0;
  for (size_t l = 0; l < w.size(); ++l) out += w[l] * mean[l];
  return out;
}

TiltedMixture tilted_conditional_density(const std::vector<double>& w,
                                         const std::vector<double>& mean,
                                         const std::vector<double>& var,
                                         double chi_product, double ybar, double sd) {
  if (!(chi_product > 0))
    throw std::invalid_argument("tilted_conditional_density: chi_product must be > 0");
  const size_t L = w.size();
  TiltedMixture out;
  out.w.resize(L);
  out.mean.resize(L);
  out.var = var;
  const double a = std::log(chi_product) / sd;
  if (a == 0.0) {
    out.w = w;
    out.mean = mean;
    return out;
  }
  double best = -kInf;
  std::vector<double> logw(L);
  for (size_t l = 0; l < L; ++l) {
    out.mean[l] = mean[l] + a * var[l];
    logw[l] = (w[l] > 0 ? std::log(w[l]) : -kInf) + a * (mean[l] - ybar) +
              0.5 * a * a * var[l];
    best = std::max(best, logw[l]);
  }
  double total = 0;
  for (size_t l = 0; l < L; ++l) {
    out.w[l] = (logw[l] == -kInf) ? 0.0 : std::exp(logw[l] - best);
    total += out.w[l];
  }
  for (auto& wl : out.w) wl /= total;
  return out;
}

ChiBounds chi_bounds(const PosteriorDraw& draw, const Dataset& data,
                     const EffectOptions& opt, double epsilon, double y_star) {
  const int K = data.K;
  const int P = data.P;
  const int n = data.n();

  if (y_star < 0) {
    double sum = 0, sum2 = 0;
    int n1 = 0;
    for (const auto& u : data.units)
      if (u.z == 1) {
        sum += u.y;
        sum2 += u.y * u.y;
        ++n1;
      }
    double mean = sum / n1;
    double sd = std::sqrt(std::max(sum2 / n1 - mean * mean, 0.0));
    y_star = mean + sd;
  }

  // Difference covariance from the draw's copula, pooled over units.
  Eigen::LLT<Eigen::MatrixXd> llt(draw.corr.R);
  Eigen::VectorXd mean_d = Eigen::VectorXd::Zero(K);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(K, K);
  std::vector<Eigen::MatrixXd> unit_draws(n);
  long count = 0;
  for (int i = 0; i < n; ++i) {
    const auto& x = data.units[i].x;
    std::vector<MarginalMixture> mixes;
    mixes.reserve(2 * K);
    for (int j = 0; j < 2 * K; ++j)
      mixes.emplace_back(draw.margins[j], data.lower_bound,
                         P ? x.dot(draw.margins[j].beta) : 0.0);
    RngStream rng(opt.seed, (1ULL << 33) + (static_cast<std::uint64_t>(draw.iteration) << 20) +
                                static_cast<std::uint64_t>(i));
    std::vector<int> pattern0(K, 0), pattern1(K, 1);
    Eigen::MatrixXd m0 = draw_counterfactual_mediators(draw, data.lower_bound, x,
                                                       pattern0, opt.n_mc, rng);
    RngStream rng2(opt.seed, (1ULL << 34) + (static_cast<std::uint64_t>(draw.iteration) << 20) +
                                 static_cast<std::uint64_t>(i));
    Eigen::MatrixXd m1 = draw_counterfactual_mediators(draw, data.lower_bound, x,
                                                       pattern1, opt.n_mc, rng2);
    unit_draws[i] = m1 - m0;
    for (int s = 0; s < opt.n_mc; ++s) {
      mean_d += unit_draws[i].row(s).transpose();
      ++count;
    }
  }
  mean_d /= static_cast<double>(count);
  for (int i = 0; i < n; ++i)
    for (int s = 0; s < opt.n_mc; ++s) {
      Eigen::VectorXd d = unit_draws[i].row(s).transpose() - mean_d;
      S += d * d.transpose();
    }
  S /= static_cast<double>(count - 1);

  OutcomePredictor pred1(draw.outcome[1], given_full_joint(K, P));
  OutcomePredictor pred0(draw.outcome[0], given_full_joint(K, P));

  ChiBounds bounds;
  double f0_sum = 0, f1_sum = 0;
  Eigen::VectorXd v(2 * K + P);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd delta(K);
    for (int k = 0; k < K; ++k) delta(k) = draw.T(i, K + k) - draw.T(i, k);
    DStatistics ds = d_statistics(delta, S);
    if (ds.d_all >= epsilon * ds.all_thresh_factor) {
      v.head(2 * K) = draw.T.row(i).transpose();
      v.tail(P) = data.units[i].x;
      f0_sum += pred0.density(y_star, v);
      f1_sum += pred1.density(y_star, v);
      ++bounds.subpop_count;
    }
  }
  if (bounds.subpop_count == 0 || !(f1_sum > 0)) {
    bounds.bounded = false;
    bounds.product_upper = kInf;
  } else {
    bounds.product_upper = f0_sum / f1_sum;
  }
  return bounds;
}

std::vector<SensitivityCell> sensitivity_effects(const std::vector<PosteriorDraw>& draws,
                                                 const Dataset& data,
                                                 const EffectOptions& opt,
                                                 const SensitivitySpec& spec) {
  std::vector<SensitivityCell> cells;
  for (double eps : spec.epsilons) {
    for (const auto& chi : spec.chi_vectors) {
      SensitivityCell cell;
      cell.epsilon = eps;
      cell.chi = chi;
      std::vector<MediationEffects> per_draw(draws.size());
      parallel_for(static_cast<int>(draws.size()), opt.n_threads, [&](int d) {
        EffectOptions draw_opt = opt;
        draw_opt.n_threads = 1;
        per_draw[d] = tilted_mediation_effects(draws[d], data, draw_opt, eps, chi);
      });
      cell.per_draw = tabulate_effects(per_draw, data.K);
      cell.summary = summarize_table(cell.per_draw);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace copmed
