#include "copmed/chain.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "copmed/imputation.hpp"
#include "copmed/parallel.hpp"

namespace copmed {

namespace {
// Stream-id blocks: the main chain stream, then one stream per unit.
constexpr std::uint64_t kMainStream = 1;
constexpr std::uint64_t kUnitStreamBase = 1000;
}  // namespace

Chain::Chain(const Dataset& data, const ChainConfig& config, int n_threads)
    : data_(data), config_(config), n_threads_(std::max(1, n_threads)) {
  config_.validate();
  auto checked = validate_dataset(data);
  if (!checked.ok()) {
    std::ostringstream msg;
    msg << "chain: invalid dataset:";
    for (const auto& e : checked.errors) msg << "\n  " << e;
    throw std::invalid_argument(msg.str());
  }
  K_ = data.K;
  P_ = data.P;
  n_ = data.n();

  X_.resize(n_, P_);
  y_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    X_.row(i) = data.units[i].x.transpose();
    y_(i) = data.units[i].y;
    arm_units_[data.units[i].z].push_back(i);
  }

  // Initial potential-mediator matrix: observed half from the data, missing
  // half seeded with the same-mediator observed value.
  T_.resize(n_, 2 * K_);
  for (int i = 0; i < n_; ++i) {
    const auto& u = data.units[i];
    for (int k = 0; k < K_; ++k) {
      T_(i, margin_index(k, u.z, K_)) = u.m(k);
      T_(i, margin_index(k, 1 - u.z, K_)) = u.m(k);
    }
  }

  margins_.reserve(2 * K_);
  sigma_t_.resize(2 * K_);
  for (int z = 0; z < 2; ++z) {
    for (int k = 0; k < K_; ++k) {
      const auto& ids = arm_units_[z];
      Eigen::VectorXd obs(ids.size());
      for (size_t a = 0; a < ids.size(); ++a) obs(a) = data.units[ids[a]].m(k);
      margins_.emplace_back(obs, config_.k_max, P_, data.lower_bound,
                            config_.bstar_appendix_f);
      int j = margin_index(k, z, K_);
      sigma_t_(j) = config_.sigma_t_factor * std::sqrt(margins_.back().hypers().sigma_hat2);
    }
  }
  // emplace order above is (z=0,k), then (z=1,k): matches margin_index.

  corr_ = CorrelationState::identity(K_, config_.prior_mode);

  H_.resize(n_, 2 * K_);
  for (int j = 0; j < 2 * K_; ++j)
    margins_[j].refresh_scores(T_.col(j), X_, H_, j);

  outcome_.reserve(2);
  for (int arm = 0; arm < 2; ++arm)
    outcome_.emplace_back(outcome_rows(arm), config_.outcome_truncation);

  rng_ = RngStream(config_.seed, kMainStream);
  unit_streams_.reserve(n_);
  for (int i = 0; i < n_; ++i)
    unit_streams_.emplace_back(config_.seed, kUnitStreamBase + static_cast<std::uint64_t>(i));
}

Eigen::MatrixXd Chain::outcome_rows(int arm) const {
  const auto& ids = arm_units_[arm];
  Eigen::MatrixXd rows(ids.size(), 1 + 2 * K_ + P_);
  for (size_t a = 0; a < ids.size(); ++a) {
    int i = ids[a];
    rows(a, 0) = y_(i);
    rows.row(a).segment(1, 2 * K_) = T_.row(i);
    rows.row(a).tail(P_) = X_.row(i);
  }
  return rows;
}

void Chain::impute_all_units() {
  std::vector<const MarginalParams*> params(2 * K_);
  std::vector<const MarginalHypers*> hypers(2 * K_);
  for (int j = 0; j < 2 * K_; ++j) {
    params[j] = &margins_[j].params();
    hypers[j] = &margins_[j].hypers();
  }
  Eigen::MatrixXd R_inv =
      corr_.R.llt().solve(Eigen::MatrixXd::Identity(2 * K_, 2 * K_));
  OutcomePredictor pred0(outcome_[0].params(), [&] {
    std::vector<int> g(2 * K_ + P_);
    for (int a = 0; a < 2 * K_ + P_; ++a) g[a] = 1 + a;
    return g;
  }());
  OutcomePredictor pred1(outcome_[1].params(), [&] {
    std::vector<int> g(2 * K_ + P_);
    for (int a = 0; a < 2 * K_ + P_; ++a) g[a] = 1 + a;
    return g;
  }());

  std::vector<Step3Result> results(n_);
  parallel_for(n_, n_threads_, [&](int i) {
    int arm = data_.units[i].z;
    results[i] = step3_impute_unit(i, arm, data_.units[i].x, y_(i), params, hypers,
                                   R_inv, arm == 0 ? pred0 : pred1, T_, H_, sigma_t_,
                                   unit_streams_[i]);
  });
  for (const auto& r : results) {
    s3_proposals_ += r.proposals;
    s3_accepts_ += r.accepts;
  }
}

PosteriorDraw Chain::snapshot(int iteration) const {
  PosteriorDraw d;
  d.iteration = iteration;
  d.rng_position = rng_.position();
  d.margins.reserve(2 * K_);
  for (const auto& m : margins_) d.margins.push_back(m.params());
  d.corr = {corr_.R, corr_.mode, corr_.rho};
  d.outcome = {outcome_[0].params(), outcome_[1].params()};
  d.T = T_;
  return d;
}

ChainResult Chain::run(DrawSink& sink) {
  ChainResult result;

  // Trace layout: per margin the covariate block and mass, then rho/alpha.
  std::vector<std::string> names;
  for (int z = 0; z < 2; ++z)
    for (int k = 0; k < K_; ++k) {
      for (int p = 0; p < P_; ++p)
        names.push_back("beta_m" + std::to_string(k + 1) + "z" + std::to_string(z) +
                        "_x" + std::to_string(p + 1));
      names.push_back("lambda_m" + std::to_string(k + 1) + "z" + std::to_string(z));
    }
  if (config_.prior_mode == PriorMode::kRhoConstrained) names.push_back("rho");
  names.push_back("alpha_z0");
  names.push_back("alpha_z1");
  const int n_retained =
      (config_.n_iter - config_.n_burn) / config_.thin +
      (((config_.n_iter - config_.n_burn) % config_.thin) ? 1 : 0);
  result.traces.names = names;
  result.traces.values.resize(n_retained, names.size());

  double min_omega_sum = 0;
  Eigen::VectorXd outcome_tail_sum = Eigen::VectorXd::Zero(2);
  int retained = 0;

  for (int iter = 1; iter <= config_.n_iter; ++iter) {
    for (int j = 0; j < 2 * K_; ++j) {
      Step1Stats st = margins_[j].step1_sweep(T_.col(j), X_, H_, j, corr_.R, rng_);
      s1_.b_proposals += st.b_proposals; s1_.b_accepts += st.b_accepts;
      s1_.c_proposals += st.c_proposals; s1_.c_accepts += st.c_accepts;
      s1_.d_proposals += st.d_proposals; s1_.d_accepts += st.d_accepts;
      s1_.e_proposals += st.e_proposals; s1_.e_accepts += st.e_accepts;
    }

    Step2Stats st2 = step2_sample_R(corr_, H_, rng_);
    s2_.entry_proposals += st2.entry_proposals;
    s2_.entry_accepts += st2.entry_accepts;
    s2_.rho_proposals += st2.rho_proposals;
    s2_.rho_accepts += st2.rho_accepts;

    impute_all_units();

    for (int arm = 0; arm < 2; ++arm) {
      Step4Stats st4 =
          outcome_[arm].step4_sweep(outcome_rows(arm), arm_units_[arm], unit_streams_, rng_);
      s4_.psi1_proposals += st4.psi1_proposals;
      s4_.psi1_accepts += st4.psi1_accepts;
    }

    bool retain = iter > config_.n_burn && (iter - config_.n_burn) % config_.thin == 0;
    if (retain) {
      PosteriorDraw draw = snapshot(iter);
      sink.consume(draw);
      int c = 0;
      for (int j = 0; j < 2 * K_; ++j) {
        for (int p = 0; p < P_; ++p)
          result.traces.values(retained, c++) = margins_[j].params().beta(p);
        result.traces.values(retained, c++) = margins_[j].params().lambda;
      }
      if (config_.prior_mode == PriorMode::kRhoConstrained)
        result.traces.values(retained, c++) = corr_.rho;
      result.traces.values(retained, c++) = outcome_[0].params().alpha;
      result.traces.values(retained, c++) = outcome_[1].params().alpha;

      double mo = 1.0;
      for (int j = 0; j < 2 * K_; ++j)
        mo = std::min(mo, margins_[j].params().omega.minCoeff());
      min_omega_sum += mo;
      for (int arm = 0; arm < 2; ++arm)
        outcome_tail_sum(arm) += outcome_[arm].params().gamma(config_.outcome_truncation - 1);
      ++retained;
    }
  }
  result.n_retained = retained;
  result.traces.values.conservativeResize(retained, Eigen::NoChange);

  auto rate = [](long acc, long prop) {
    return prop > 0 ? static_cast<double>(acc) / static_cast<double>(prop) : 0.0;
  };
  result.acceptance.step1b = rate(s1_.b_accepts, s1_.b_proposals);
  result.acceptance.step1c = rate(s1_.c_accepts, s1_.c_proposals);
  result.acceptance.step1d = rate(s1_.d_accepts, s1_.d_proposals);
  result.acceptance.step1e = rate(s1_.e_accepts, s1_.e_proposals);
  result.acceptance.step2_entries = rate(s2_.entry_accepts, s2_.entry_proposals);
  result.acceptance.step2_rho = rate(s2_.rho_accepts, s2_.rho_proposals);
  result.acceptance.step3 = rate(s3_accepts_, s3_proposals_);
  result.acceptance.step4_psi1 = rate(s4_.psi1_accepts, s4_.psi1_proposals);

  if (retained > 0) {
    double mean_min_omega = min_omega_sum / retained;
    if (mean_min_omega > 0.005) {
      std::ostringstream w;
      w << "marginal truncation may be too small: mean smallest stick weight "
        << mean_min_omega << " > 0.005 (k_max=" << config_.k_max << ")";
      result.warnings.push_back(w.str());
    }
    for (int arm = 0; arm < 2; ++arm) {
      double tail_w = outcome_tail_sum(arm) / retained;
      if (tail_w > 0.01) {
        std::ostringstream w;
        w << "outcome truncation may be too small (arm " << arm
          << "): mean last-component weight " << tail_w << " > 0.01";
        result.warnings.push_back(w.str());
      }
    }
  }
  if (result.acceptance.step3 < 0.15 || result.acceptance.step3 > 0.6) {
    std::ostringstream w;
    w << "step-3 acceptance rate " << result.acceptance.step3
      << " outside [0.15, 0.6]; consider tuning sigma_t_factor";
    result.warnings.push_back(w.str());
  }
  return result;
}

}  // namespace copmed
