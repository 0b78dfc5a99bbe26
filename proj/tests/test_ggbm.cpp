#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "gbergomi/errors.hpp"
#include "gbergomi/ggbm.hpp"
#include "gbergomi/rng.hpp"
#include "gbergomi/specfun.hpp"
#include "support/quadrature.hpp"
#include "support/stats.hpp"

using namespace gbergomi;

namespace {

// Oracle for E[V_t V_s], t < s: int_0^t (t-u)^{H-1/2} (s-u)^{H-1/2} du.
// Substituting w = t-u and then w = y^{1/(H+1/2)} removes the endpoint
// singularity, leaving a smooth integrand for Romberg.
long double spot_cov_oracle(double h, double t, double s) {
  const long double hp = h + 0.5L;
  const long double hm = h - 0.5L;
  const long double gap = s - t;
  auto f = [&](long double y) -> long double {
    return std::pow(std::pow(y, 1.0L / hp) + gap, hm) / hp;
  };
  return oracle::romberg(f, 0.0L, std::pow((long double)t, hp), 22, 1e-13L);
}

// Oracle for the forward-started covariance int_0^T (t-u)^{H-1/2}(s-u)^{H-1/2} du
// with T < min(t, s), where the integrand is smooth on [0, T].
long double forward_cov_oracle(double h, double T, double t, double s) {
  const long double hm = h - 0.5L;
  auto f = [&](long double u) -> long double {
    return std::pow((long double)t - u, hm) * std::pow((long double)s - u, hm);
  };
  return oracle::romberg(f, 0.0L, (long double)T, 22, 1e-13L);
}

}  // namespace

TEST_CASE("ggbm covariance basics") {
  // Variance t^alpha / Gamma(1+beta) and symmetry.
  for (double beta : {0.6, 0.9, 1.0}) {
    for (double alpha : {0.14, 0.8, 1.0}) {
      for (double t : {0.3, 1.0, 2.5}) {
        const double var = ggbm_cov(beta, alpha, t, t);
        CHECK(var == doctest::Approx(std::pow(t, alpha) / std::tgamma(1.0 + beta))
                         .epsilon(1e-14));
      }
      CHECK(ggbm_cov(beta, alpha, 0.7, 1.9) ==
            doctest::Approx(ggbm_cov(beta, alpha, 1.9, 0.7)).epsilon(1e-15));
    }
  }

  // beta = alpha = 1 is Brownian motion.
  CHECK(ggbm_cov(1.0, 1.0, 0.4, 1.3) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(ggbm_cov(1.0, 1.0, 2.0, 0.5) == doctest::Approx(0.5).epsilon(1e-15));

  // Stationary increments: E[(X_t - X_s)^2] depends only on |t-s|.
  for (double beta : {0.7, 1.0}) {
    const double alpha = 0.9;
    auto incr_var = [&](double s, double t) {
      return ggbm_cov(beta, alpha, t, t) + ggbm_cov(beta, alpha, s, s) -
             2.0 * ggbm_cov(beta, alpha, t, s);
    };
    const double ref = std::pow(0.6, alpha) / std::tgamma(1.0 + beta);
    CHECK(incr_var(0.2, 0.8) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(incr_var(1.7, 2.3) == doctest::Approx(ref).epsilon(1e-12));
  }

  CHECK_THROWS_AS(ggbm_cov(0.0, 1.0, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(ggbm_cov(0.5, 2.0, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(ggbm_cov(0.5, 1.0, -1.0, 1.0), std::domain_error);
}

TEST_CASE("ggbm even moments") {
  CHECK(ggbm_even_moment(0.7, 0.9, 1.7, 0) == 1.0);

  // n = 1 must agree with the covariance diagonal.
  for (double beta : {0.6, 0.9, 1.0})
    for (double t : {0.5, 1.0, 2.0})
      CHECK(ggbm_even_moment(beta, 0.8, t, 1) ==
            doctest::Approx(ggbm_cov(beta, 0.8, t, t)).epsilon(1e-13));

  // n = 2: 4!/(4 Gamma(2 beta + 1)) t^{2 alpha} = 6 t^{2 alpha}/Gamma(2 beta + 1).
  for (double beta : {0.6, 0.9}) {
    const double t = 1.3, alpha = 0.8;
    CHECK(ggbm_even_moment(beta, alpha, t, 2) ==
          doctest::Approx(6.0 * std::pow(t, 2.0 * alpha) / std::tgamma(2.0 * beta + 1.0))
              .epsilon(1e-13));
  }

  // beta = 1 collapses to Gaussian moments (2n-1)!! t^{n alpha}.
  const double alpha = 0.9, t = 0.7;
  double dfac = 1.0;
  for (int n = 1; n <= 6; ++n) {
    dfac *= 2 * n - 1;
    CHECK(ggbm_even_moment(1.0, alpha, t, n) ==
          doctest::Approx(dfac * std::pow(t, n * alpha)).epsilon(1e-12));
  }

  CHECK_THROWS_AS(ggbm_even_moment(0.5, 0.8, 1.0, -1), std::domain_error);
}

TEST_CASE("characteristic function and mgf against the subordinated mixture") {
  // An increment is sqrt(Y) |delta|^{alpha/2} G in law with Y grey-law
  // distributed, so the Monte Carlo mixture gives an estimate of both
  // transforms that is independent of the Mittag-Leffler code path.
  const double beta = 0.75, alpha = 0.9, delta = 0.7;
  const GreyLaw law(beta);
  Philox rng(2026u, 7u);
  const int n = 200000;
  const double scale = std::pow(std::abs(delta), 0.5 * alpha);
  std::vector<double> cosv(n), expv(n);
  const double u_char = 1.4, u_mgf = 0.8;
  for (int i = 0; i < n; ++i) {
    const double x = std::sqrt(sample_m_wright(law, rng)) * scale * rng.gaussian();
    cosv[i] = std::cos(u_char * x);
    expv[i] = std::exp(u_mgf * x);
  }
  const auto mc_char = oracle::mean_se(cosv);
  const auto mc_mgf = oracle::mean_se(expv);
  CHECK(std::abs(ggbm_char(beta, alpha, u_char, delta) - mc_char.mean) <=
        3.0 * mc_char.se);
  CHECK(std::abs(ggbm_mgf(beta, alpha, u_mgf, delta) - mc_mgf.mean) <= 3.0 * mc_mgf.se);

  // The transform pair evaluates the Mittag-Leffler function at opposite signs.
  CHECK(ggbm_char(beta, alpha, 1.0, 1.0) ==
        doctest::Approx(mittag_leffler(beta, -0.5)).epsilon(1e-15));
  CHECK(ggbm_mgf(beta, alpha, 1.0, 1.0) ==
        doctest::Approx(mittag_leffler(beta, 0.5)).epsilon(1e-15));
}

TEST_CASE("spot Volterra covariance") {
  // Diagonal t^{2H}/(2H).
  for (double h : {0.07, 0.25, 0.45})
    for (double t : {0.1, 0.5, 1.5})
      CHECK(volterra_cov_spot(h, t, t) ==
            doctest::Approx(std::pow(t, 2.0 * h) / (2.0 * h)).epsilon(1e-14));

  // Off-diagonal against direct quadrature of the kernel product.
  for (double h : {0.07, 0.2, 0.4}) {
    for (auto [t, s] : {std::pair{0.2, 0.9}, {0.5, 0.6}, {1.0, 2.5}, {0.05, 1.0}}) {
      const double ref = static_cast<double>(spot_cov_oracle(h, t, s));
      CHECK(volterra_cov_spot(h, t, s) == doctest::Approx(ref).epsilon(1e-10));
      CHECK(volterra_cov_spot(h, s, t) == doctest::Approx(ref).epsilon(1e-10));
    }
  }

  // H = 1/2 collapses to Brownian motion.
  CHECK(volterra_cov_spot(0.5, 0.3, 1.1) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(volterra_cov_spot(0.5, 2.0, 1.1) == doctest::Approx(1.1).epsilon(1e-14));

  // Self-similarity: scaling time by c scales the covariance by c^{2H}.
  for (double h : {0.1, 0.35}) {
    const double c = 3.7;
    CHECK(volterra_cov_spot(h, c * 0.4, c * 1.2) ==
          doctest::Approx(std::pow(c, 2.0 * h) * volterra_cov_spot(h, 0.4, 1.2))
              .epsilon(1e-11));
  }

  CHECK(volterra_cov_spot(0.2, 0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(volterra_cov_spot(0.0, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(volterra_cov_spot(0.3, -0.1, 1.0), std::domain_error);
}

TEST_CASE("forward Volterra covariance") {
  // Quadrature arbitration of the closed form, smooth case T < min(t, s).
  for (double h : {0.07, 0.2, 0.4}) {
    for (auto [T, t, s] : {std::tuple{0.25, 0.3, 0.4}, {0.25, 0.26, 0.333},
                           {1.0 / 12, 0.1, 0.15}, {0.5, 0.6, 1.5}}) {
      const double ref = static_cast<double>(forward_cov_oracle(h, T, t, s));
      CHECK(volterra_cov_forward(h, T, t, s) == doctest::Approx(ref).epsilon(1e-9));
    }
  }

  // Edge t = T reuses the spot oracle: int_0^T (T-u)^{H-1/2}(s-u)^{H-1/2} du.
  for (double h : {0.07, 0.3}) {
    const double T = 0.25, s = 0.4;
    const double ref = static_cast<double>(spot_cov_oracle(h, T, s));
    CHECK(volterra_cov_forward(h, T, T, s) == doctest::Approx(ref).epsilon(1e-10));
  }

  // Diagonal (t^{2H} - (t-T)^{2H}) / (2H), and T = t matches the spot diagonal.
  for (double h : {0.07, 0.45}) {
    const double T = 0.2, t = 0.5;
    CHECK(volterra_cov_forward(h, T, t, t) ==
          doctest::Approx((std::pow(t, 2 * h) - std::pow(t - T, 2 * h)) / (2 * h))
              .epsilon(1e-14));
    CHECK(volterra_cov_forward(h, t, t, t) ==
          doctest::Approx(volterra_cov_spot(h, t, t)).epsilon(1e-14));
    CHECK(volterra_cov_forward(h, T, t, t) < volterra_cov_spot(h, t, t));
  }

  // Starting the forward window at min(t, s) recovers the full spot covariance.
  for (double h : {0.1, 0.3}) {
    for (auto [t, s] : {std::pair{0.3, 0.8}, {1.2, 0.7}}) {
      const double lo = std::min(t, s);
      CHECK(volterra_cov_forward(h, lo, t, s) ==
            doctest::Approx(volterra_cov_spot(h, t, s)).epsilon(1e-12));
    }
  }

  // H = 1/2: the kernel is 1, so the covariance is just T.
  for (auto [t, s] : {std::pair{0.3, 0.3}, {0.3, 1.4}, {2.0, 0.9}})
    CHECK(volterra_cov_forward(0.5, 0.25, t, s) == doctest::Approx(0.25).epsilon(1e-14));

  CHECK_THROWS_AS(volterra_cov_forward(0.2, 0.0, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(volterra_cov_forward(0.2, 0.5, 0.4, 1.0), std::domain_error);
}

TEST_CASE("Volterra-Brownian cross covariance") {
  // H = 1/2: overlap length of [a, b] with [0, t].
  CHECK(volterra_brownian_cross_cov(0.5, 1.0, 0.2, 0.6) ==
        doctest::Approx(0.4).epsilon(1e-14));
  CHECK(volterra_brownian_cross_cov(0.5, 0.5, 0.2, 0.9) ==
        doctest::Approx(0.3).epsilon(1e-14));
  CHECK(volterra_brownian_cross_cov(0.5, 0.5, 0.7, 0.9) == 0.0);

  // Smooth-case quadrature of int_a^b (t-u)^{H-1/2} du with b < t.
  for (double h : {0.07, 0.3}) {
    const double t = 1.0, a = 0.2, b = 0.7;
    const long double hm = h - 0.5L;
    auto f = [&](long double u) -> long double { return std::pow(1.0L - u, hm); };
    const double ref = static_cast<double>(oracle::romberg(f, a, b, 22, 1e-13L));
    CHECK(volterra_brownian_cross_cov(h, t, a, b) == doctest::Approx(ref).epsilon(1e-11));
  }

  // b past t truncates at t.
  const double h = 0.12, t = 0.8, a = 0.3;
  CHECK(volterra_brownian_cross_cov(h, t, a, 5.0) ==
        doctest::Approx(std::pow(t - a, h + 0.5) / (h + 0.5)).epsilon(1e-14));

  CHECK(volterra_brownian_cross_cov(0.2, 0.5, 0.5, 0.9) == 0.0);
  CHECK_THROWS_AS(volterra_brownian_cross_cov(0.2, 1.0, 0.5, 0.3), std::domain_error);
}

TEST_CASE("covariance matrix blocks and factorization") {
  // Forward kind on a monthly VIX window past T = 0.25.
  {
    CovSpec spec;
    spec.kind = CovKind::kVolterraForward;
    spec.h = 0.07;
    spec.forward_start = 0.25;
    const int intervals = 100;
    const double delta = 1.0 / 12.0;
    for (int j = 0; j <= intervals; ++j)
      spec.grid.push_back(0.25 + delta * j / intervals);
    CovMatrix cm(spec);
    CHECK(cm.dim() == intervals + 1);
    // The forward field is smooth in t, so a fine grid is numerically
    // low-rank and the factorization is allowed to fall back to jitter.
    CHECK(cm.at(3, 17) == doctest::Approx(volterra_cov_forward(
                              0.07, 0.25, spec.grid[3], spec.grid[17]))
                              .epsilon(1e-15));

    // Cholesky round trip L L^T = C.
    const int n = cm.dim();
    double max_err = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        double acc = 0.0;
        for (int k = 0; k <= j; ++k) acc += cm.chol()[i * n + k] * cm.chol()[j * n + k];
        max_err = std::max(max_err, std::abs(acc - cm.at(i, j)));
      }
    }
    CHECK(max_err < 1e-10);
  }

  // Spot-with-increments kind: block layout and values.
  {
    CovSpec spec;
    spec.kind = CovKind::kVolterraSpotIncrements;
    spec.h = 0.1;
    const int m = 16;
    for (int j = 1; j <= m; ++j) spec.grid.push_back(j / 16.0);
    CovMatrix cm(spec);
    CHECK(cm.dim() == 2 * m);
    CHECK_FALSE(cm.jittered());
    CHECK(cm.at(2, 5) ==
          doctest::Approx(volterra_cov_spot(0.1, spec.grid[2], spec.grid[5]))
              .epsilon(1e-15));
    CHECK(cm.at(4, m + 2) == doctest::Approx(volterra_brownian_cross_cov(
                                 0.1, spec.grid[4], spec.grid[1], spec.grid[2]))
                                 .epsilon(1e-15));
    CHECK(cm.at(m + 3, m + 3) == doctest::Approx(1.0 / 16.0).epsilon(1e-14));
    CHECK(cm.at(m + 3, m + 7) == 0.0);
    CHECK(cm.at(m + 2, 4) == cm.at(4, m + 2));
  }
}

TEST_CASE("correlated draws reproduce the covariance") {
  CovSpec spec;
  spec.kind = CovKind::kVolterraSpotIncrements;
  spec.h = 0.07;
  const int m = 10;
  for (int j = 1; j <= m; ++j) spec.grid.push_back(0.1 * j);
  CovMatrix cm(spec);
  const int n = cm.dim();

  // correlate() is the plain lower-triangular product.
  {
    std::vector<double> z(n), out(n);
    Philox rng(5u, 0u);
    for (auto& v : z) v = rng.gaussian();
    cm.correlate(z, out);
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j <= i; ++j) acc += cm.chol()[i * n + j] * z[j];
      CHECK(out[i] == doctest::Approx(acc).epsilon(1e-15));
    }
    std::vector<double> bad(n - 1);
    CHECK_THROWS_AS(cm.correlate(bad, out), std::invalid_argument);
  }

  // Sample covariance of transformed draws against the dense matrix.
  const int draws = 20000;
  std::vector<std::vector<double>> paths(n, std::vector<double>(draws));
  {
    Philox rng(77u, 1u);
    std::vector<double> z(n), out(n);
    for (int d = 0; d < draws; ++d) {
      for (auto& v : z) v = rng.gaussian();
      cm.correlate(z, out);
      for (int i = 0; i < n; ++i) paths[i][d] = out[i];
    }
  }
  for (auto [i, j] : {std::pair{0, 0}, {2, 7}, {3, m + 1}, {m + 2, m + 2}, {n - 1, 0}}) {
    const double est = oracle::sample_cov(paths[i], paths[j]);
    // Var of a sample covariance of a bivariate Gaussian: (c_ii c_jj + c_ij^2)/n.
    const double se = std::sqrt(
        (cm.at(i, i) * cm.at(j, j) + cm.at(i, j) * cm.at(i, j)) / draws);
    CHECK(std::abs(est - cm.at(i, j)) <= 4.0 * se);
  }
}

TEST_CASE("covariance matrix input validation") {
  CovSpec spec;
  spec.kind = CovKind::kVolterraSpot;
  spec.h = 0.1;
  CHECK_THROWS_AS(CovMatrix{spec}, std::invalid_argument);  // empty grid
  spec.grid = {0.2, 0.2};
  CHECK_THROWS_AS(CovMatrix{spec}, std::invalid_argument);  // not increasing
  spec.grid = {0.0, 0.5};
  CHECK_THROWS_AS(CovMatrix{spec}, std::invalid_argument);  // starts at zero
  spec.grid = {0.2, 0.5};
  spec.h = 1.0;
  CHECK_THROWS_AS(CovMatrix{spec}, std::domain_error);
  spec.h = 0.1;
  spec.kind = CovKind::kVolterraForward;
  spec.forward_start = 0.3;
  CHECK_THROWS_AS(CovMatrix{spec}, std::invalid_argument);  // grid precedes start
  spec.forward_start = 0.0;
  spec.grid = {0.2, 0.5};
  CHECK_THROWS_AS(CovMatrix{spec}, std::invalid_argument);
}
