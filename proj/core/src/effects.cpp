#include "copmed/effects.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "copmed/imputation.hpp"
#include "copmed/normal.hpp"
#include "copmed/parallel.hpp"
#include "copmed/sensitivity.hpp"

namespace copmed {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kEffectsStreamBase = 1ULL << 32;
constexpr std::uint64_t kCepStreamBase = 1ULL << 40;

std::uint64_t unit_stream_id(int iteration, int unit) {
  return kEffectsStreamBase + (static_cast<std::uint64_t>(iteration) << 20) +
         static_cast<std::uint64_t>(unit);
}

std::vector<int> given_arm_block(int K, int P, int arm) {
  std::vector<int> g;
  g.reserve(K + P);
  for (int k = 0; k < K; ++k) g.push_back(1 + arm * K + k);
  for (int p = 0; p < P; ++p) g.push_back(1 + 2 * K + p);
  return g;
}

std::vector<int> given_full(int K, int P) {
  std::vector<int> g(2 * K + P);
  for (int a = 0; a < 2 * K + P; ++a) g[a] = 1 + a;
  return g;
}

// Estimand pattern masks: bit k set means coordinate k comes from arm 0.
struct PatternLayout {
  std::vector<unsigned> masks;  // unique masks, mask 0 first
  int idx_observable = 0;       // mask 0
  int idx_full = 0;
  std::vector<int> idx_single;          // per k
  std::vector<std::vector<int>> idx_pair;  // [j][k], j < k

  explicit PatternLayout(int K) {
    auto add = [&](unsigned m) {
      for (size_t i = 0; i < masks.size(); ++i)
        if (masks[i] == m) return static_cast<int>(i);
      masks.push_back(m);
      return static_cast<int>(masks.size() - 1);
    };
    idx_observable = add(0u);
    idx_single.resize(K);
    for (int k = 0; k < K; ++k) idx_single[k] = add(1u << k);
    idx_pair.assign(K, std::vector<int>(K, -1));
    for (int j = 0; j < K; ++j)
      for (int k = j + 1; k < K; ++k) idx_pair[j][k] = add((1u << j) | (1u << k));
    idx_full = add((1u << K) - 1);
  }
};

// Generate one unit's shared counterfactual draws: n_mc x 2K values, the full
// potential-mediator vector per sample.  Quantiles are evaluated in sorted-u
// order per margin so Newton restarts warm.
Eigen::MatrixXd sample_unit_draws(const std::vector<MarginalMixture>& mixes,
                                  const Eigen::LLT<Eigen::MatrixXd>& llt, int n_mc,
                                  RngStream& rng) {
  const int twoK = static_cast<int>(mixes.size());
  Eigen::MatrixXd U(n_mc, twoK);
  Eigen::VectorXd z(twoK);
  for (int s = 0; s < n_mc; ++s) {
    for (int j = 0; j < twoK; ++j) z(j) = rng.normal();
    Eigen::VectorXd h = llt.matrixL() * z;
    for (int j = 0; j < twoK; ++j) {
      double u = norm_cdf(h(j));
      U(s, j) = std::min(std::max(u, kCdfClamp), 1.0 - kCdfClamp);
    }
  }
  Eigen::MatrixXd T(n_mc, twoK);
  std::vector<int> order(n_mc);
  for (int j = 0; j < twoK; ++j) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return U(a, j) < U(b, j); });
    double prev = mixes[j].quantile(U(order[0], j));
    T(order[0], j) = prev;
    for (int s = 1; s < n_mc; ++s) {
      prev = mixes[j].quantile(U(order[s], j), prev);
      T(order[s], j) = prev;
    }
  }
  return T;
}

struct EngineContext {
  const PosteriorDraw* draw = nullptr;
  const Dataset* data = nullptr;
  EffectOptions opt;
  bool tilt = false;
  double epsilon = kInf;
  Eigen::VectorXd log_chi;  // K
  double ybar1 = 0, sd1 = 1;
};

struct UnitResult {
  std::vector<double> c1;       // per pattern mask
  double c0 = 0;                // observable z=0 integrand
  std::vector<double> c0_star;  // per pattern mask (nie_star only)
};

MediationEffects run_engine(const EngineContext& ctx) {
  const auto& draw = *ctx.draw;
  const auto& data = *ctx.data;
  const int K = data.K;
  const int P = data.P;
  const int n = data.n();
  const int n_mc = ctx.opt.n_mc;
  const PatternLayout layout(K);
  const int n_masks = static_cast<int>(layout.masks.size());

  OutcomePredictor pred1(draw.outcome[1], given_arm_block(K, P, 1));
  OutcomePredictor pred0(draw.outcome[0], given_arm_block(K, P, 0));
  Eigen::LLT<Eigen::MatrixXd> llt(draw.corr.R);

  // Stored per-unit draws (tilt path needs two passes over them).
  std::vector<Eigen::MatrixXd> stored(ctx.tilt ? n : 0);
  Eigen::MatrixXd S;  // covariance of cross-world differences
  std::vector<std::vector<double>> tilt_amount;  // [unit][mask]

  if (ctx.tilt) {
    parallel_for(n, ctx.opt.n_threads, [&](int i) {
      const auto& x = data.units[i].x;
      std::vector<MarginalMixture> mixes;
      mixes.reserve(2 * K);
      for (int j = 0; j < 2 * K; ++j)
        mixes.emplace_back(draw.margins[j], data.lower_bound,
                           P ? x.dot(draw.margins[j].beta) : 0.0);
      RngStream rng(ctx.opt.seed, unit_stream_id(draw.iteration, i));
      stored[i] = sample_unit_draws(mixes, llt, n_mc, rng);
    });
    // Pooled covariance of the differences, sequential for determinism.
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(K);
    long count = 0;
    for (int i = 0; i < n; ++i)
      for (int s = 0; s < n_mc; ++s) {
        for (int k = 0; k < K; ++k) mean(k) += stored[i](s, K + k) - stored[i](s, k);
        ++count;
      }
    mean /= static_cast<double>(count);
    S = Eigen::MatrixXd::Zero(K, K);
    Eigen::VectorXd d(K);
    for (int i = 0; i < n; ++i)
      for (int s = 0; s < n_mc; ++s) {
        for (int k = 0; k < K; ++k) d(k) = stored[i](s, K + k) - stored[i](s, k) - mean(k);
        S += d * d.transpose();
      }
    S /= static_cast<double>(count - 1);

    // Per-unit tilt decisions from the unit's current imputed mediators.
    tilt_amount.assign(n, std::vector<double>(n_masks, 0.0));
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd delta(K);
      for (int k = 0; k < K; ++k) delta(k) = draw.T(i, K + k) - draw.T(i, k);
      DStatistics ds = d_statistics(delta, S);
      for (int m = 1; m < n_masks; ++m) {
        unsigned mask = layout.masks[m];
        double log_chi_sum = 0;
        for (int k = 0; k < K; ++k)
          if (mask & (1u << k)) log_chi_sum += ctx.log_chi(k);
        if (log_chi_sum == 0.0) continue;
        int bits = __builtin_popcount(mask);
        double d_val, threshold;
        if (bits == 1) {
          int k = __builtin_ctz(mask);
          d_val = ds.d_single(k);
          threshold = ctx.epsilon;
        } else if (bits == 2) {
          int j = __builtin_ctz(mask);
          int k = __builtin_ctz(mask & ~(1u << j));
          d_val = ds.d_pair(j, k);
          threshold = ctx.epsilon * ds.pair_thresh_factor(j, k);
        } else {
          d_val = ds.d_all;
          threshold = ctx.epsilon * ds.all_thresh_factor;
        }
        if (d_val >= threshold) tilt_amount[i][m] = log_chi_sum / ctx.sd1;
      }
    }
  }

  std::vector<UnitResult> results(n);
  parallel_for(n, ctx.opt.n_threads, [&](int i) {
    const auto& x = data.units[i].x;
    std::vector<MarginalMixture> mixes;
    mixes.reserve(2 * K);
    for (int j = 0; j < 2 * K; ++j)
      mixes.emplace_back(draw.margins[j], data.lower_bound,
                         P ? x.dot(draw.margins[j].beta) : 0.0);
    Eigen::MatrixXd T;
    if (ctx.tilt) {
      T = std::move(stored[i]);
    } else {
      RngStream rng(ctx.opt.seed, unit_stream_id(draw.iteration, i));
      T = sample_unit_draws(mixes, llt, n_mc, rng);
    }

    UnitResult& res = results[i];
    res.c1.assign(n_masks, 0.0);
    if (ctx.opt.nie_star) res.c0_star.assign(n_masks, 0.0);
    Eigen::VectorXd v(K + P);
    v.tail(P) = x;
    std::vector<double> w, m, s2;
    for (int s = 0; s < n_mc; ++s) {
      for (int mi = 0; mi < n_masks; ++mi) {
        unsigned mask = layout.masks[mi];
        for (int k = 0; k < K; ++k)
          v(k) = (mask & (1u << k)) ? T(s, k) : T(s, K + k);
        double a = ctx.tilt ? tilt_amount[i][mi] : 0.0;
        if (a == 0.0) {
          res.c1[mi] += pred1.mean(v);
        } else {
          pred1.components(v, w, m, s2);
          TiltedMixture tm = tilted_conditional_density(w, m, s2, std::exp(a * ctx.sd1),
                                                        ctx.ybar1, ctx.sd1);
          res.c1[mi] += tm.mixture_mean();
        }
        if (ctx.opt.nie_star) res.c0_star[mi] += pred0.mean(v);
      }
      for (int k = 0; k < K; ++k) v(k) = T(s, k);
      res.c0 += pred0.mean(v);
    }
    for (auto& c : res.c1) c /= n_mc;
    for (auto& c : res.c0_star) c /= n_mc;
    res.c0 /= n_mc;
  });

  // Population means over the empirical covariate distribution.
  std::vector<double> c1(n_masks, 0.0), c0_star(n_masks, 0.0);
  double c0 = 0;
  for (int i = 0; i < n; ++i) {
    for (int mi = 0; mi < n_masks; ++mi) c1[mi] += results[i].c1[mi];
    if (ctx.opt.nie_star)
      for (int mi = 0; mi < n_masks; ++mi) c0_star[mi] += results[i].c0_star[mi];
    c0 += results[i].c0;
  }
  for (auto& cval : c1) cval /= n;
  for (auto& cval : c0_star) cval /= n;
  c0 /= n;

  MediationEffects eff;
  const double e1 = c1[layout.idx_observable];
  eff.nde = c1[layout.idx_full] - c0;
  eff.jnie_all = e1 - c1[layout.idx_full];
  eff.te = eff.nde + eff.jnie_all;
  eff.nie.resize(K);
  for (int k = 0; k < K; ++k) eff.nie(k) = e1 - c1[layout.idx_single[k]];
  eff.jnie_pair = Eigen::MatrixXd::Zero(K, K);
  eff.overlap = Eigen::MatrixXd::Zero(K, K);
  for (int j = 0; j < K; ++j)
    for (int k = j + 1; k < K; ++k) {
      eff.jnie_pair(j, k) = e1 - c1[layout.idx_pair[j][k]];
      eff.overlap(j, k) = (eff.nie(j) + eff.nie(k)) - eff.jnie_pair(j, k);
    }
  if (ctx.opt.nie_star) {
    eff.nie_star.resize(K);
    for (int k = 0; k < K; ++k)
      eff.nie_star(k) = c0_star[layout.idx_observable] - c0_star[layout.idx_single[k]];
  }
  return eff;
}

}  // namespace

MediationEffects mediation_effects(const PosteriorDraw& draw, const Dataset& data,
                                   const EffectOptions& opt) {
  EngineContext ctx;
  ctx.draw = &draw;
  ctx.data = &data;
  ctx.opt = opt;
  ctx.tilt = false;
  return run_engine(ctx);
}

MediationEffects tilted_mediation_effects(const PosteriorDraw& draw, const Dataset& data,
                                          const EffectOptions& opt, double epsilon,
                                          const Eigen::VectorXd& chi) {
  if (chi.size() != data.K)
    throw std::invalid_argument("tilted_mediation_effects: chi must have length K");
  EngineContext ctx;
  ctx.draw = &draw;
  ctx.data = &data;
  ctx.opt = opt;
  ctx.tilt = true;
  ctx.epsilon = epsilon;
  ctx.log_chi.resize(data.K);
  for (int k = 0; k < data.K; ++k) {
    if (!(chi(k) >= 1.0))
      throw std::invalid_argument("tilted_mediation_effects: chi entries must be >= 1");
    ctx.log_chi(k) = std::log(chi(k));
  }
  // Standardizer frozen from the observed z=1 outcomes.
  double sum = 0, sum2 = 0;
  int n1 = 0;
  for (const auto& u : data.units)
    if (u.z == 1) {
      sum += u.y;
      sum2 += u.y * u.y;
      ++n1;
    }
  ctx.ybar1 = sum / n1;
  double var = sum2 / n1 - ctx.ybar1 * ctx.ybar1;
  ctx.sd1 = std::sqrt(std::max(var, 1e-12));
  return run_engine(ctx);
}

std::vector<std::pair<std::string, double>> flatten_effects(const MediationEffects& e,
                                                            int K) {
  std::vector<std::pair<std::string, double>> out;
  out.emplace_back("TE", e.te);
  out.emplace_back("NDE", e.nde);
  for (int k = 0; k < K; ++k)
    out.emplace_back("NIE_" + std::to_string(k + 1), e.nie(k));
  for (int j = 0; j < K; ++j)
    for (int k = j + 1; k < K; ++k)
      out.emplace_back("JNIE_" + std::to_string(j + 1) + std::to_string(k + 1),
                       e.jnie_pair(j, k));
  out.emplace_back("JNIE_all", e.jnie_all);
  for (int j = 0; j < K; ++j)
    for (int k = j + 1; k < K; ++k)
      out.emplace_back("OVERLAP_" + std::to_string(j + 1) + std::to_string(k + 1),
                       e.overlap(j, k));
  for (int k = 0; k < e.nie_star.size(); ++k)
    out.emplace_back("NIE_STAR_" + std::to_string(k + 1), e.nie_star(k));
  return out;
}

Eigen::VectorXd mediator_effect_sd(const std::vector<PosteriorDraw>& draws, int K) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(K);
  Eigen::VectorXd sum2 = Eigen::VectorXd::Zero(K);
  long count = 0;
  for (const auto& d : draws) {
    for (int i = 0; i < d.T.rows(); ++i) {
      for (int k = 0; k < K; ++k) {
        double delta = d.T(i, K + k) - d.T(i, k);
        sum(k) += delta;
        sum2(k) += delta * delta;
      }
      ++count;
    }
  }
  Eigen::VectorXd sd(K);
  for (int k = 0; k < K; ++k) {
    double mean = sum(k) / count;
    double var = (sum2(k) - count * mean * mean) / std::max<long>(count - 1, 1);
    sd(k) = std::sqrt(std::max(var, 0.0));
  }
  return sd;
}

PrincipalResult principal_effects(const PosteriorDraw& draw, const Dataset& data,
                                  const Eigen::VectorXd& c_d, const Eigen::VectorXd& c_a) {
  const int K = data.K;
  const int P = data.P;
  const int n = data.n();
  const int n_subsets = 1 << K;

  OutcomePredictor pred1(draw.outcome[1], given_full(K, P));
  OutcomePredictor pred0(draw.outcome[0], given_full(K, P));

  // Unit-level effects conditional on the full joint mediator state.
  Eigen::VectorXd effect(n);
  Eigen::MatrixXd delta(n, K);
  Eigen::VectorXd v(2 * K + P);
  for (int i = 0; i < n; ++i) {
    v.head(2 * K) = draw.T.row(i).transpose();
    v.tail(P) = data.units[i].x;
    effect(i) = pred1.mean(v) - pred0.mean(v);
    for (int k = 0; k < K; ++k) delta(i, k) = draw.T(i, K + k) - draw.T(i, k);
  }

  PrincipalResult res;
  res.ede.assign(n_subsets, {});
  res.eae_minus.assign(n_subsets, {});
  res.eae_plus.assign(n_subsets, {});
  for (int mask = 1; mask < n_subsets; ++mask) {
    double se = 0, sm = 0, sp = 0;
    int ce = 0, cm = 0, cp = 0;
    for (int i = 0; i < n; ++i) {
      bool in_d = true, in_m = true, in_p = true;
      for (int k = 0; k < K; ++k) {
        if (!(mask & (1 << k))) continue;
        double dk = delta(i, k);
        if (!(std::fabs(dk) < c_d(k))) in_d = false;
        if (!(dk < -c_a(k))) in_m = false;
        if (!(dk > c_a(k))) in_p = false;
      }
      if (in_d) { se += effect(i); ++ce; }
      if (in_m) { sm += effect(i); ++cm; }
      if (in_p) { sp += effect(i); ++cp; }
    }
    res.ede[mask] = {ce ? se / ce : 0.0, ce, ce > 0};
    res.eae_minus[mask] = {cm ? sm / cm : 0.0, cm, cm > 0};
    res.eae_plus[mask] = {cp ? sp / cp : 0.0, cp, cp > 0};
  }

  for (int j = 0; j < K; ++j)
    for (int k = j + 1; k < K; ++k) {
      res.pairs.emplace_back(j, k);
      std::array<std::array<CrossCell, 3>, 3> table{};
      for (int i = 0; i < n; ++i) {
        auto category = [&](int kk) -> int {
          double dk = delta(i, kk);
          if (dk < -c_a(kk)) return kDecrease;
          if (dk > c_a(kk)) return kIncrease;
          if (std::fabs(dk) < c_d(kk)) return kNoChange;
          return -1;  // inside a one-sided band when c_d < c_a
        };
        int cj = category(j), ck = category(k);
        if (cj < 0 || ck < 0) continue;
        table[cj][ck].sum_effect += effect(i);
        table[cj][ck].count += 1;
      }
      res.cross.push_back(table);
    }
  return res;
}

CepSurface cep_surface(const std::vector<PosteriorDraw>& draws, const Dataset& data,
                       int k, int grid_size, int max_draws, std::uint64_t seed,
                       int n_threads) {
  if (draws.empty()) throw std::invalid_argument("cep_surface: no draws");
  const int K = data.K;
  const int P = data.P;
  const int n = data.n();

  // Grid over the pooled observed range of mediator k.
  double lo = kInf, hi = -kInf;
  for (const auto& u : data.units) {
    lo = std::min(lo, u.m(k));
    hi = std::max(hi, u.m(k));
  }
  CepSurface out;
  out.grid0.resize(grid_size);
  out.grid1.resize(grid_size);
  for (int g = 0; g < grid_size; ++g) {
    double frac = grid_size == 1 ? 0.5 : static_cast<double>(g) / (grid_size - 1);
    out.grid0(g) = lo + frac * (hi - lo);
    out.grid1(g) = lo + frac * (hi - lo);
  }
  out.effect = Eigen::MatrixXd::Zero(grid_size, grid_size);

  std::vector<int> rest;  // latent coordinates other than (k, K+k)
  for (int j = 0; j < 2 * K; ++j)
    if (j != k && j != K + k) rest.push_back(j);
  std::vector<int> cond = {k, K + k};

  int n_use = std::min<int>(max_draws, static_cast<int>(draws.size()));
  std::vector<int> draw_ids(n_use);
  for (int d = 0; d < n_use; ++d)
    draw_ids[d] = static_cast<int>((static_cast<long>(d) * draws.size()) / n_use);

  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(grid_size, grid_size);
  for (int di = 0; di < n_use; ++di) {
    const PosteriorDraw& draw = draws[draw_ids[di]];
    OutcomePredictor pred1(draw.outcome[1], given_full(K, P));
    OutcomePredictor pred0(draw.outcome[0], given_full(K, P));

    // Gaussian conditional of the remaining latent coordinates.
    Mvn latent(Eigen::VectorXd::Zero(2 * K), draw.corr.R);

    // Cache mixtures and the grid's latent scores per unit.
    std::vector<std::vector<MarginalMixture>> mixes(n);
    Eigen::MatrixXd h0(n, grid_size), h1(n, grid_size);
    for (int i = 0; i < n; ++i) {
      const auto& x = data.units[i].x;
      mixes[i].reserve(2 * K);
      for (int j = 0; j < 2 * K; ++j)
        mixes[i].emplace_back(draw.margins[j], data.lower_bound,
                              P ? x.dot(draw.margins[j].beta) : 0.0);
      for (int g = 0; g < grid_size; ++g) {
        h0(i, g) = latent_score(mixes[i][k], out.grid0(g));
        h1(i, g) = latent_score(mixes[i][K + k], out.grid1(g));
      }
    }

    std::vector<Eigen::MatrixXd> cell_sum(grid_size,
                                          Eigen::MatrixXd::Zero(grid_size, 1));
    parallel_for(grid_size * grid_size, n_threads, [&](int cell) {
      int ga = cell / grid_size, gb = cell % grid_size;
      RngStream rng(seed, kCepStreamBase + (static_cast<std::uint64_t>(di) << 24) +
                              static_cast<std::uint64_t>(cell));
      Eigen::VectorXd v(2 * K + P);
      double acc = 0;
      for (int i = 0; i < n; ++i) {
        Eigen::VectorXd hv(2);
        hv << h0(i, ga), h1(i, gb);
        v(k) = out.grid0(ga);
        v(K + k) = out.grid1(gb);
        if (!rest.empty()) {
          MvnConditional cond_dist = latent.conditional(cond, hv);
          Eigen::LLT<Eigen::MatrixXd> cllt(cond_dist.cov);
          Eigen::VectorXd z(rest.size());
          for (size_t r = 0; r < rest.size(); ++r) z(r) = rng.normal();
          Eigen::VectorXd hr = cond_dist.mean + cllt.matrixL() * z;
          for (size_t r = 0; r < rest.size(); ++r) {
            double u = norm_cdf(hr(r));
            u = std::min(std::max(u, kCdfClamp), 1.0 - kCdfClamp);
            v(rest[r]) = mixes[i][rest[r]].quantile(u);
          }
        }
        v.tail(P) = data.units[i].x;
        acc += pred1.mean(v) - pred0.mean(v);
      }
      cell_sum[ga](gb, 0) = acc / n;
    });
    for (int ga = 0; ga < grid_size; ++ga)
      for (int gb = 0; gb < grid_size; ++gb) {
        out.effect(ga, gb) += cell_sum[ga](gb, 0);
        counts(ga, gb) += 1;
      }
  }
  out.effect.array() /= counts.array();

  const PosteriorDraw& last = draws.back();
  out.cloud.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    out.cloud(i, 0) = last.T(i, k);
    out.cloud(i, 1) = last.T(i, K + k);
  }
  return out;
}

EffectTable tabulate_effects(const std::vector<MediationEffects>& per_draw, int K) {
  EffectTable table;
  if (per_draw.empty()) return table;
  auto first = flatten_effects(per_draw[0], K);
  for (const auto& [name, _] : first) table.names.push_back(name);
  table.values.resize(per_draw.size(), table.names.size());
  for (size_t d = 0; d < per_draw.size(); ++d) {
    auto flat = flatten_effects(per_draw[d], K);
    for (size_t c = 0; c < flat.size(); ++c) table.values(d, c) = flat[c].second;
  }
  return table;
}

double quantile_sorted(std::vector<double> v, double q) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  double pos = q * (v.size() - 1);
  size_t i = static_cast<size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  double frac = pos - i;
  return v[i] * (1 - frac) + v[i + 1] * frac;
}

std::vector<SummaryRow> summarize_table(const EffectTable& table) {
  std::vector<SummaryRow> rows;
  const int n = static_cast<int>(table.values.rows());
  for (size_t c = 0; c < table.names.size(); ++c) {
    SummaryRow r;
    r.name = table.names[c];
    r.n = n;
    if (n > 0) {
      Eigen::VectorXd col = table.values.col(c);
      r.mean = col.mean();
      r.sd = n > 1 ? std::sqrt((col.array() - r.mean).square().sum() / (n - 1)) : 0.0;
      std::vector<double> v(col.data(), col.data() + n);
      r.lo = quantile_sorted(v, 0.025);
      r.hi = quantile_sorted(v, 0.975);
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace copmed
