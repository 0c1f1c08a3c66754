#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "copmed/copula.hpp"
#include "copmed/marginal_dpm.hpp"
#include "copmed/outcome_dpm.hpp"
#include "copmed/rng.hpp"
#include "copmed/types.hpp"

namespace copmed {

// Margins are indexed j = z*K + k: arm-0 margins first, then arm-1, matching
// the potential-mediator ordering (M_1(0),...,M_K(0),M_1(1),...,M_K(1)).
inline int margin_index(int k, int z, int K) { return z * K + k; }

struct CorrelationDraw {
  Eigen::MatrixXd R;
  PriorMode mode = PriorMode::kRhoConstrained;
  double rho = 0.5;
};

// One retained MCMC state.  Immutable once recorded.
struct PosteriorDraw {
  int iteration = 0;
  std::uint64_t rng_position = 0;
  std::vector<MarginalParams> margins;  // 2K entries
  CorrelationDraw corr;
  std::vector<OutcomeParams> outcome;   // arm 0, arm 1
  Eigen::MatrixXd T;                    // n x 2K potential mediators (observed + imputed)
};

class DrawSink {
 public:
  virtual ~DrawSink() = default;
  virtual void consume(const PosteriorDraw& draw) = 0;
};

class DrawCollector : public DrawSink {
 public:
  void consume(const PosteriorDraw& draw) override { draws.push_back(draw); }
  std::vector<PosteriorDraw> draws;
};

struct AcceptanceReport {
  double step1b = 0, step1c = 0, step1d = 0, step1e = 0;
  double step2_entries = 0, step2_rho = 0;
  double step3 = 0;
  double step4_psi1 = 0;
};

struct TraceData {
  std::vector<std::string> names;
  Eigen::MatrixXd values;  // n_retained x n_params
};

struct ChainResult {
  TraceData traces;
  AcceptanceReport acceptance;
  std::vector<std::string> warnings;
  int n_retained = 0;
};

// The full data-augmentation sampler: per iteration, a block-Metropolis sweep
// of every margin, the correlation update, cross-world mediator imputation,
// and one outcome-mixture sweep per arm.
class Chain {
 public:
  Chain(const Dataset& data, const ChainConfig& config, int n_threads = 1);

  ChainResult run(DrawSink& sink);

  // Current-state accessors (used by tests and diagnostics).
  const Eigen::MatrixXd& T() const { return T_; }
  const Eigen::MatrixXd& H() const { return H_; }
  const CorrelationState& corr() const { return corr_; }
  const std::vector<MarginalModel>& margins() const { return margins_; }

  PosteriorDraw snapshot(int iteration) const;

 private:
  void impute_all_units();
  Eigen::MatrixXd outcome_rows(int arm) const;

  const Dataset& data_;
  ChainConfig config_;
  int n_threads_;
  int K_, P_, n_;
  Eigen::MatrixXd X_;        // n x P
  Eigen::VectorXd y_;
  std::vector<int> arm_units_[2];

  std::vector<MarginalModel> margins_;
  CorrelationState corr_;
  std::vector<OutcomeModel> outcome_;
  Eigen::MatrixXd T_;  // n x 2K
  Eigen::MatrixXd H_;  // n x 2K
  Eigen::VectorXd sigma_t_;  // per-margin step-3 proposal sd

  RngStream rng_;
  std::vector<RngStream> unit_streams_;

  // accumulated acceptance counters
  Step1Stats s1_;
  Step2Stats s2_;
  long s3_proposals_ = 0, s3_accepts_ = 0;
  Step4Stats s4_;
};

}  // namespace copmed
