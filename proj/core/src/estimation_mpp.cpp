/*
 * Copyright 2026 The spatialbench Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "spb/error.hpp"
#include "spb/estimation.hpp"
#include "spb/kernels.hpp"

namespace spb {

void MppPriors::validate() const {
  if (!(a_eta > 0.0 && b_eta > 0.0 && a_eps > 0.0 && b_eps > 0.0))
    throw ConfigError("MPP priors: inverse-gamma parameters must be > 0");
  if (!(a_kappa > 0.0) || !(b_kappa > a_kappa) || !std::isfinite(b_kappa))
    throw ConfigError("MPP priors: need 0 < a_kappa < b_kappa");
}

namespace {

double cross(const Location& o, const Location& a, const Location& b) {
  return (a.lon - o.lon) * (b.lat - o.lat) - (a.lat - o.lat) * (b.lon - o.lon);
}

double min_pair_distance(std::vector<Location> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const Location& a, const Location& b) { return a.lon < b.lon; });
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size() && pts[j].lon - pts[i].lon < best; ++j)
      best = std::min(best, distance(pts[i], pts[j]));
  }
  return best;
}

double max_pair_distance(std::vector<Location> pts) {
  std::sort(pts.begin(), pts.end(), [](const Location& a, const Location& b) {
    return a.lon < b.lon || (a.lon == b.lon && a.lat < b.lat);
  });
  std::vector<Location> hull;
  for (int pass = 0; pass < 2; ++pass) {
    const std::size_t start = hull.size();
    for (const auto& p : pts) {
      while (hull.size() >= start + 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 0.0)
        hull.pop_back();
      hull.push_back(p);
    }
    hull.pop_back();
    std::reverse(pts.begin(), pts.end());
  }
  double best = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j) best = std::max(best, distance(hull[i], hull[j]));
  return best;
}

}  // namespace

MppPriors default_mpp_priors(std::span<const Location> locs, double residual_variance,
                             double sigma_eps_guess) {
  if (locs.size() < 2) throw DataError("MPP priors: need at least two locations");
  std::vector<Location> pts(locs.begin(), locs.end());
  MppPriors p;
  p.a_eta = 2.0;
  p.b_eta = std::max(residual_variance, 1e-12) / 2.0;
  p.a_eps = 2.0;
  p.b_eps = std::max(sigma_eps_guess, 1e-12) / 2.0;
  p.a_kappa = 3.0 / max_pair_distance(pts);
  p.b_kappa = 3.0 / min_pair_distance(pts);
  return p;
}

namespace {

// Everything that depends on kappa alone.
struct KappaState {
  double kappa = 0.0;
  DenseMatrix knot_corr;    // R*
  DenseMatrix chol_lower;   // L*, R* = L* L*'
  DenseMatrix cross;        // P = R(s, knots), n x r
  DenseMatrix A;            // P R*^{-1}
  Eigen::VectorXd delta;    // 1 - diag(A R* A')
  double log_det_corr = 0.0;
};

KappaState make_state(double kappa, std::span<const Location> locs,
                      const std::vector<Location>& knots) {
  KappaState s;
  s.kappa = kappa;
  const auto r = static_cast<Eigen::Index>(knots.size());
  const auto n = static_cast<Eigen::Index>(locs.size());
  s.knot_corr.resize(r, r);
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = 0; i < r; ++i) s.knot_corr(i, j) = std::exp(-kappa * distance(knots[i], knots[j]));
  const CholeskyFactor f = CholeskyFactor::with_jitter(s.knot_corr);
  s.chol_lower = f.lower();
  s.log_det_corr = f.log_det();
  s.cross.resize(n, r);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < r; ++j) s.cross(i, j) = std::exp(-kappa * distance(locs[i], knots[j]));
  s.A = f.solve(DenseMatrix(s.cross.transpose())).transpose();
  s.delta = (1.0 - (s.A.array() * s.cross.array()).rowwise().sum()).max(0.0).matrix();
  return s;
}

// log p(Z | kappa, sigma_nu^2, sigma_eps^2) with beta integrated under a flat prior.
double collapsed_loglik(const KappaState& s, const DenseMatrix& X, const Eigen::VectorXd& z,
                        const Eigen::VectorXd& V, double sigma_nu_sq, double sigma_eps_sq) {
  const Eigen::Index r = s.chol_lower.cols();
  DenseMatrix U = s.chol_lower.triangularView<Eigen::Lower>().solve(DenseMatrix(s.cross.transpose()))
                      .transpose();
  U *= std::sqrt(sigma_nu_sq);
  Eigen::VectorXd d = sigma_nu_sq * s.delta + sigma_eps_sq * V;
  const SmwSolver solver(LowRankPlusDiag{std::move(U), DenseMatrix::Identity(r, r), std::move(d)});
  const Eigen::VectorXd siz = solver.solve(z);
  double quad = z.dot(siz);
  double ld = solver.log_det();
  if (X.cols() > 0) {
    const DenseMatrix six = solver.solve(X);
    const Eigen::LLT<DenseMatrix> m(X.transpose() * six);
    if (m.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd xsz = X.transpose() * siz;
    quad -= xsz.dot(m.solve(xsz));
    const DenseMatrix l = m.matrixL();
    ld += 2.0 * l.diagonal().array().log().sum();
  }
  return -0.5 * (ld + quad);
}

double draw_inv_gamma(std::mt19937_64& rng, double shape, double scale) {
  std::gamma_distribution<double> g(shape, 1.0 / scale);
  return 1.0 / g(rng);
}

Eigen::VectorXd draw_normal(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

}  // namespace

double split_rhat(std::span<const double> draws) {
  const std::size_t half = draws.size() / 2;
  if (half < 2) return std::numeric_limits<double>::quiet_NaN();
  const std::span<const double> a = draws.subspan(0, half);
  const std::span<const double> b = draws.subspan(draws.size() - half, half);
  auto mean_var = [](std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::pair<double, double>(m, s / static_cast<double>(x.size() - 1));
  };
  const auto [ma, va] = mean_var(a);
  const auto [mb, vb] = mean_var(b);
  const double nn = static_cast<double>(half);
  const double w = 0.5 * (va + vb);
  const double grand = 0.5 * (ma + mb);
  const double bvar = nn * ((ma - grand) * (ma - grand) + (mb - grand) * (mb - grand));
  if (w <= 0.0) return 1.0;
  const double vhat = (nn - 1.0) / nn * w + bvar / nn;
  return std::sqrt(vhat / w);
}

MppChain mcmc_fit_mpp(const SpatialDataset& data, const TrendSpec& trend,
                      const std::vector<Location>& knots, const MppPriors& priors,
                      const MppOptions& opt) {
  priors.validate();
  if (opt.chain_length < 1 || opt.burn_in < 0 || opt.thin < 1)
    throw ConfigError("MPP: invalid chain length, burn-in or thinning");
  if (knots.empty()) throw ConfigError("MPP: no knots");
  if (!(opt.proposal_sd > 0.0)) throw ConfigError("MPP: proposal_sd must be > 0");
  const bool use_data = opt.likelihood_enabled && !data.empty();
  if (opt.likelihood_enabled && data.empty()) throw DataError("MPP: no data and likelihood enabled");

  const std::vector<Location> empty_locs;
  const std::vector<Location>& locs = use_data ? data.locations() : empty_locs;
  const auto n = static_cast<Eigen::Index>(locs.size());
  const auto r = static_cast<Eigen::Index>(knots.size());
  const DenseMatrix X = use_data ? trend.design(locs) : DenseMatrix(0, 0);
  const Eigen::Index p = X.cols();
  const Eigen::VectorXd z = use_data ? data.value_vector() : Eigen::VectorXd();
  const Eigen::VectorXd V = use_data ? data.weight_vector() : Eigen::VectorXd();

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Initial state.
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double sigma_nu_sq = priors.b_eta / std::max(priors.a_eta - 1.0, 1.0);
  double sigma_eps_sq = priors.b_eps / std::max(priors.a_eps - 1.0, 1.0);
  if (use_data) {
    const Eigen::VectorXd res = ols_residuals(X, z, &beta);
    sigma_nu_sq = std::max(res.squaredNorm() / static_cast<double>(n) - sigma_eps_sq,
                           0.5 * res.squaredNorm() / static_cast<double>(n));
  }
  double kappa = std::sqrt(priors.a_kappa * priors.b_kappa);
  if (opt.fixed_kappa) kappa = *opt.fixed_kappa;
  if (opt.fixed_sigma_nu_sq) sigma_nu_sq = *opt.fixed_sigma_nu_sq;
  if (opt.fixed_sigma_eps_sq) sigma_eps_sq = *opt.fixed_sigma_eps_sq;
  if (!(kappa > 0.0 && sigma_nu_sq > 0.0 && sigma_eps_sq > 0.0))
    throw ConfigError("MPP: fixed hyperparameters must be > 0");

  KappaState st = make_state(kappa, locs, knots);
  auto loglik = [&](const KappaState& s) {
    return use_data ? collapsed_loglik(s, X, z, V, sigma_nu_sq, sigma_eps_sq) : 0.0;
  };
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(r);
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(n);

  MppChain chain;
  chain.priors = priors;
  double sd = opt.proposal_sd;
  int accepted = 0;
  int proposed = 0;
  int window_acc = 0;
  int window_n = 0;
  const long total = opt.burn_in + static_cast<long>(opt.chain_length) * opt.thin;
  chain.samples.reserve(static_cast<std::size_t>(opt.chain_length));

  for (long it = 0; it < total; ++it) {
    const bool burning = it < opt.burn_in;

    // 1. kappa | sigma^2, Z  (random walk on log kappa, uniform prior).
    if (!opt.fixed_kappa) {
      const double cur_ll = loglik(st);
      const double prop = std::exp(std::log(st.kappa) + sd * draw_normal(rng, 1)[0]);
      bool acc = false;
      if (prop > priors.a_kappa && prop < priors.b_kappa) {
        KappaState cand = make_state(prop, locs, knots);
        const double log_ratio = loglik(cand) - cur_ll + std::log(prop) - std::log(st.kappa);
        if (std::isfinite(log_ratio) && std::log(unif(rng)) < log_ratio) {
          st = std::move(cand);
          acc = true;
        }
      } else {
        unif(rng);  // keep the stream aligned across accept/reject paths
      }
      if (!burning) {
        ++proposed;
        accepted += acc ? 1 : 0;
      } else {
        ++window_n;
        window_acc += acc ? 1 : 0;
        if (window_n == 50) {
          const double rate = window_acc / 50.0;
          sd *= rate > 0.44 ? 1.25 : 0.8;
          sd = std::clamp(sd, 1e-3, 5.0);
          window_n = 0;
          window_acc = 0;
        }
      }
    }

    // 2. (beta, eta) | kappa, sigma^2, Z with xi integrated out.
    const DenseMatrix corr_inv = [&] {
      const DenseMatrix li =
          st.chol_lower.triangularView<Eigen::Lower>().solve(DenseMatrix::Identity(r, r));
      return DenseMatrix(li.transpose() * li);
    }();
    if (use_data) {
      const Eigen::VectorXd dinv = (sigma_nu_sq * st.delta + sigma_eps_sq * V).cwiseInverse();
      DenseMatrix M(p + r, n);
      M.topRows(p) = X.transpose();
      M.bottomRows(r) = st.A.transpose();
      DenseMatrix prec = M * dinv.asDiagonal() * M.transpose();
      prec.bottomRightCorner(r, r) += corr_inv / sigma_nu_sq;
      const Eigen::VectorXd rhs = M * dinv.cwiseProduct(z);
      const Eigen::LLT<DenseMatrix> llt(prec);
      if (llt.info() != Eigen::Success) throw NumericalError("MPP: (beta, eta) precision not SPD");
      Eigen::VectorXd draw = llt.solve(rhs);
      draw += llt.matrixU().solve(draw_normal(rng, p + r));
      beta = draw.head(p);
      eta = draw.tail(r);
    } else {
      eta = std::sqrt(sigma_nu_sq) * (st.chol_lower * draw_normal(rng, r));
    }

    // 3. xi | beta, eta, sigma^2, Z.
    double xi_ss = 0.0;
    int n_xi = 0;
    if (use_data) {
      const Eigen::VectorXd mean_part = z - X * beta - st.A * eta;
      const Eigen::VectorXd e = draw_normal(rng, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double pv = sigma_nu_sq * st.delta[i];
        if (pv <= 1e-12 * sigma_nu_sq) {
          xi[i] = 0.0;
          continue;
        }
        const double nv = sigma_eps_sq * V[i];
        const double v = 1.0 / (1.0 / pv + 1.0 / nv);
        xi[i] = v * mean_part[i] / nv + std::sqrt(v) * e[i];
        xi_ss += xi[i] * xi[i] / st.delta[i];
        ++n_xi;
      }
    }

    // 4. sigma_nu^2 | eta, xi, kappa.
    if (!opt.fixed_sigma_nu_sq) {
      const double q = eta.dot(corr_inv * eta);
      sigma_nu_sq = draw_inv_gamma(rng, priors.a_eta + 0.5 * static_cast<double>(r + n_xi),
                                   priors.b_eta + 0.5 * (q + xi_ss));
    }

    // 5. sigma_eps^2 | everything else.
    if (!opt.fixed_sigma_eps_sq) {
      double sse = 0.0;
      if (use_data) {
        const Eigen::VectorXd e = z - X * beta - st.A * eta - xi;
        sse = e.cwiseProduct(V.cwiseInverse()).dot(e);
      }
      sigma_eps_sq = draw_inv_gamma(rng, priors.a_eps + 0.5 * static_cast<double>(n),
                                    priors.b_eps + 0.5 * sse);
    }

    if (!burning && (it - opt.burn_in) % opt.thin == 0) {
      MppSample s;
      s.params.beta = beta;
      s.params.kappa = st.kappa;
      s.params.sigma_nu_sq = sigma_nu_sq;
      s.params.sigma_eps_sq = sigma_eps_sq;
      s.eta = eta;
      chain.samples.push_back(std::move(s));
    }
  }

  chain.kappa_acceptance = proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0;
  std::vector<double> k, nu, eps;
  for (const auto& s : chain.samples) {
    k.push_back(s.params.kappa);
    nu.push_back(s.params.sigma_nu_sq);
    eps.push_back(s.params.sigma_eps_sq);
  }
  chain.rhat_kappa = split_rhat(k);
  chain.rhat_sigma_nu_sq = split_rhat(nu);
  chain.rhat_sigma_eps_sq = split_rhat(eps);
  return chain;
}

}  // namespace spb
