#include "copmed/copula.hpp"

#include <cmath>
#include <stdexcept>

#include "copmed/distributions.hpp"

namespace copmed {

double copula_loglik(const Eigen::MatrixXd& H, const Eigen::MatrixXd& R) {
  const int n = static_cast<int>(H.rows());
  const int d = static_cast<int>(R.rows());
  if (H.cols() != d) throw std::invalid_argument("copula_loglik: H/R dimension mismatch");
  auto llt = require_spd(R, "copula_loglik");
  double log_det = 0;
  for (int i = 0; i < d; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  // sum_i H_i'(I - R^{-1})H_i = ||H||_F^2 - sum_i H_i' R^{-1} H_i
  double quad_identity = H.squaredNorm();
  Eigen::MatrixXd solved = llt.solve(H.transpose());  // d x n
  double quad_inv = (H.transpose().cwiseProduct(solved)).sum();
  return -0.5 * n * log_det + 0.5 * (quad_identity - quad_inv);
}

PdInterval pd_interval(const Eigen::MatrixXd& R, int j, int k) {
  if (j == k) throw std::invalid_argument("pd_interval: entry must be off-diagonal");
  auto det_at = [&](double r) {
    Eigen::MatrixXd m = R;
    m(j, k) = r;
    m(k, j) = r;
    return m.determinant();
  };
  // det(R(r)) = a r^2 + b r + c, recovered from three evaluations.
  const double c = det_at(0.0);
  const double dp = det_at(1.0);
  const double dm = det_at(-1.0);
  const double a = 0.5 * (dp + dm) - c;
  const double b = 0.5 * (dp - dm);
  const double cur = R(j, k);

  if (std::fabs(a) < 1e-14) {
    // Degenerate quadratic; fall back on the linear root.
    if (std::fabs(b) < 1e-14) return {-1.0, 1.0};
    double root = -c / b;
    if (root > cur) return {-1.0, std::min(1.0, root)};
    return {std::max(-1.0, root), 1.0};
  }
  double disc = b * b - 4.0 * a * c;
  if (disc < 0) throw std::domain_error("pd_interval: no PD interval (input not PD?)");
  double sq = std::sqrt(disc);
  double r1 = (-b - sq) / (2.0 * a);
  double r2 = (-b + sq) / (2.0 * a);
  double lo = std::min(r1, r2), hi = std::max(r1, r2);
  // Principal-minor positivity forces the roots inside [-1,1]; clamp round-off.
  lo = std::max(lo, -1.0);
  hi = std::min(hi, 1.0);
  if (cur < lo - 1e-9 || cur > hi + 1e-9)
    throw std::domain_error("pd_interval: current entry outside its PD interval");
  return {lo, hi};
}

CorrelationState CorrelationState::identity(int K, PriorMode mode) {
  CorrelationState s;
  s.K = K;
  s.mode = mode;
  s.rho = 0.5;
  if (mode == PriorMode::kRhoConstrained) {
    Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(K, K);
    s.R = build_constrained_R(eye, eye, s.rho);
  } else {
    s.R = Eigen::MatrixXd::Identity(2 * K, 2 * K);
  }
  return s;
}

Eigen::MatrixXd build_constrained_R(const Eigen::MatrixXd& within0,
                                    const Eigen::MatrixXd& within1, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::invalid_argument("build_constrained_R: rho outside [0,1]");
  const int K = static_cast<int>(within0.rows());
  if (within1.rows() != K)
    throw std::invalid_argument("build_constrained_R: block size mismatch");
  Eigen::MatrixXd R(2 * K, 2 * K);
  R.topLeftCorner(K, K) = within0;
  R.bottomRightCorner(K, K) = within1;
  for (int j = 0; j < K; ++j)
    for (int k = 0; k < K; ++k)
      R(j, K + k) = 0.5 * (within0(j, k) + within1(j, k)) * rho;
  R.bottomLeftCorner(K, K) = R.topRightCorner(K, K).transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("build_constrained_R: incompatible (corrs, rho)");
  return R;
}

namespace {

bool is_pd(const Eigen::MatrixXd& m) {
  return Eigen::LLT<Eigen::MatrixXd>(m).info() == Eigen::Success;
}

Eigen::MatrixXd within_block(const Eigen::MatrixXd& R, int K, int arm) {
  return R.block(arm * K, arm * K, K, K);
}

}  // namespace

Step2Stats step2_sample_R(CorrelationState& state, const Eigen::MatrixXd& H,
                          RngStream& rng) {
  Step2Stats stats;
  const int d = static_cast<int>(state.R.rows());
  const int K = state.K;
  double cur_ll = copula_loglik(H, state.R);

  if (state.mode == PriorMode::kUniform) {
    // Fixed row-major sweep over the upper triangle.
    for (int j = 0; j < d; ++j) {
      for (int k = j + 1; k < d; ++k) {
        PdInterval iv = pd_interval(state.R, j, k);
        double len = iv.hi - iv.lo;
        if (!(len > 0)) continue;
        double prop = rng.uniform(iv.lo, iv.hi);
        ++stats.entry_proposals;
        Eigen::MatrixXd R_prop = state.R;
        R_prop(j, k) = prop;
        R_prop(k, j) = prop;
        if (!is_pd(R_prop)) continue;
        // Interval bounds depend only on the other entries, so forward and
        // reverse proposal densities coincide.
        double prop_ll = copula_loglik(H, R_prop);
        if (std::log(rng.uniform()) < prop_ll - cur_ll) {
          state.R.swap(R_prop);
          cur_ll = prop_ll;
          ++stats.entry_accepts;
        }
      }
    }
    return stats;
  }

  // rho-constrained mode: within-arm entries restricted positive, cross block
  // rebuilt after every move.
  for (int arm = 0; arm < 2; ++arm) {
    for (int j = 0; j < K; ++j) {
      for (int k = j + 1; k < K; ++k) {
        const int row = arm * K + j, col = arm * K + k;
        PdInterval iv = pd_interval(state.R, row, col);
        double lo = std::max(iv.lo, 0.0);
        double len = iv.hi - lo;
        if (!(len > 0)) continue;
        double prop = rng.uniform(lo, iv.hi);
        ++stats.entry_proposals;
        Eigen::MatrixXd w0 = within_block(state.R, K, 0);
        Eigen::MatrixXd w1 = within_block(state.R, K, 1);
        auto& w = (arm == 0) ? w0 : w1;
        w(j, k) = prop;
        w(k, j) = prop;
        Eigen::MatrixXd R_prop;
        try {
          R_prop = build_constrained_R(w0, w1, state.rho);
        } catch (const std::domain_error&) {
          continue;  // rebuilt matrix not PD: Metropolis reject
        }
        // Reverse proposal interval is evaluated at the proposed state.
        PdInterval iv_rev = pd_interval(R_prop, row, col);
        double lo_rev = std::max(iv_rev.lo, 0.0);
        double len_rev = iv_rev.hi - lo_rev;
        if (!(len_rev > 0) || state.R(row, col) <= lo_rev ||
            state.R(row, col) >= iv_rev.hi)
          continue;  // reverse move impossible
        double prop_ll = copula_loglik(H, R_prop);
        double log_q = std::log(len) - std::log(len_rev);
        if (std::log(rng.uniform()) < prop_ll - cur_ll + log_q) {
          state.R.swap(R_prop);
          cur_ll = prop_ll;
          ++stats.entry_accepts;
        }
      }
    }
  }

  // rho: Unif(0,1) independence proposal against its Unif(0,1) prior.
  {
    double prop_rho = rng.uniform();
    ++stats.rho_proposals;
    Eigen::MatrixXd w0 = within_block(state.R, K, 0);
    Eigen::MatrixXd w1 = within_block(state.R, K, 1);
    Eigen::MatrixXd R_prop;
    bool ok = true;
    try {
      R_prop = build_constrained_R(w0, w1, prop_rho);
    } catch (const std::domain_error&) {
      ok = false;
    }
    if (ok) {
      double prop_ll = copula_loglik(H, R_prop);
      if (std::log(rng.uniform()) < prop_ll - cur_ll) {
        state.R.swap(R_prop);
        state.rho = prop_rho;
        ++stats.rho_accepts;
      }
    }
  }
  return stats;
}

}  // namespace copmed
