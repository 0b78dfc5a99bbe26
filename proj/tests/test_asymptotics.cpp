#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "gbergomi/asymptotics.hpp"
#include "gbergomi/rng.hpp"
#include "gbergomi/specfun.hpp"
#include "support/stats.hpp"

using namespace gbergomi;

namespace {

const double kSqrtPi = std::sqrt(std::acos(-1.0));

AsymptoticInputs paper_like() {
  AsymptoticInputs a;
  a.xi0_flat = 0.235 * 0.235;
  a.h = 0.07;
  a.beta = 0.9;
  a.eta = 1.23;
  a.delta = 1.0 / 12;
  return a;
}

// Mixture Monte Carlo of the integrated first or second Malliavin moment,
// built from first principles: sample the mixing variable and the Gaussian
// layer, flatten the (r - s)^... singularity by substitution, and keep the
// integrand as the raw expectation with its own Wick compensation. Nothing
// here calls the closed forms under test.
oracle::MeanSe mixture_j_oracle(const AsymptoticInputs& a, int order, long n) {
  const double c = 1.0 / std::tgamma(a.h + 0.5);
  const double b = a.eta * a.eta * c * c / (4.0 * a.h);
  const double pw = order == 1 ? a.h + 0.5 : 2.0 * a.h;
  const GreyLaw law(a.beta);
  std::vector<double> term(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) {
    Philox rng(911, static_cast<std::uint64_t>(i));
    const double y = sample_m_wright(law, rng);
    const double u = rng.uniform();
    const double r = a.delta * std::pow(u, 1.0 / pw);
    const double sd = std::pow(r, a.h) / std::sqrt(2.0 * a.h);
    const double z = rng.gaussian();
    const double wick = std::exp(a.eta * c * std::sqrt(y) * sd * z -
                                 b * y * std::pow(r, 2.0 * a.h));
    const double weight = order == 1 ? a.eta * c * std::sqrt(y) : a.eta * a.eta * c * c * y;
    term[static_cast<size_t>(i)] =
        a.xi0_flat * std::pow(a.delta, pw) / pw * weight * wick;
  }
  return oracle::mean_se(term);
}

}  // namespace

TEST_CASE("beta one reduces to the rough Bergomi closed forms") {
  for (double h : {0.07, 0.2, 0.45}) {
    for (double eta : {0.468, 1.23}) {
      AsymptoticInputs a = paper_like();
      a.beta = 1.0;
      a.h = h;
      a.eta = eta;
      const double c = 1.0 / std::tgamma(h + 0.5);
      const double hp = h + 0.5;
      CHECK(j1(a) == doctest::Approx(a.xi0_flat * eta * c * std::pow(a.delta, hp) / hp)
                         .epsilon(1e-12));
      CHECK(j2(a) == doctest::Approx(a.xi0_flat * eta * eta * c * c *
                                     std::pow(a.delta, 2 * h) / (2 * h))
                         .epsilon(1e-12));
      const double skew = eta * std::pow(a.delta, h - 0.5) /
                          (2.0 * std::tgamma(hp)) * (hp / (2 * h) - 1.0 / hp);
      CHECK(vix_atm_skew_limit(a) == doctest::Approx(skew).epsilon(1e-12));
      CHECK(vix_atm_level_limit(a) ==
            doctest::Approx(eta * c / 2 * std::pow(a.delta, h - 0.5) / hp).epsilon(1e-12));
    }
  }
}

TEST_CASE("eta scaling orders and trivial zeros") {
  AsymptoticInputs a = paper_like();
  AsymptoticInputs a2 = a;
  a2.eta = 2.0 * a.eta;
  CHECK(j1(a2) == doctest::Approx(2.0 * j1(a)).epsilon(1e-12));
  CHECK(j2(a2) == doctest::Approx(4.0 * j2(a)).epsilon(1e-12));
  CHECK(j3(0.01, a2) == doctest::Approx(8.0 * j3(0.01, a)).epsilon(1e-12));

  AsymptoticInputs z = a;
  z.eta = 0.0;
  CHECK(j1(z) == 0.0);
  CHECK(j2(z) == 0.0);
  CHECK(j3(0.01, z) == 0.0);
  CHECK(vix_atm_level_limit(z) == 0.0);
  CHECK(vix_atm_skew_limit(z) == 0.0);
  CHECK(spx_skew_scaled_limit(a, 0.0) == 0.0);
}

TEST_CASE("j1 and j2 match the mixture quadrature oracle") {
  const AsymptoticInputs a = paper_like();
  const long n = 400000;
  const oracle::MeanSe m1 = mixture_j_oracle(a, 1, n);
  CHECK(std::abs(j1(a) - m1.mean) <= 3.0 * m1.se);
  const oracle::MeanSe m2 = mixture_j_oracle(a, 2, n);
  CHECK(std::abs(j2(a) - m2.mean) <= 3.0 * m2.se);
}

TEST_CASE("scaled j3 approaches its limit with the predicted deficit") {
  const AsymptoticInputs a = paper_like();
  const double c = 1.0 / std::tgamma(a.h + 0.5);
  const double limit = -3.0 * a.xi0_flat * std::pow(a.eta * c, 3) * kSqrtPi /
                       (4.0 * std::tgamma(1.0 + 1.5 * a.beta) * (3.0 * a.h - 0.5));
  CHECK(limit > 0.0);
  // The relative deficit at finite t is exactly (t/(t+delta))^{1/2-3h}, so
  // "within 1%" only happens once that power is small; check both the exact
  // deficit shape at a moderate t and the limit itself further down.
  for (double t : {1e-6, 1e-9}) {
    const double scaled = std::pow(t, 0.5 - 3.0 * a.h) * j3(t, a);
    const double deficit = std::pow(t / (t + a.delta), 0.5 - 3.0 * a.h);
    CHECK(scaled / limit == doctest::Approx(1.0 - deficit).epsilon(1e-10));
  }
  const double t = 1e-9;
  CHECK(std::pow(t, 0.5 - 3.0 * a.h) * j3(t, a) ==
        doctest::Approx(limit).epsilon(0.01));
}

TEST_CASE("vix limits have the documented signs across the parameter box") {
  for (double h : {0.05, 0.1, 0.2, 0.3, 0.45}) {
    for (double beta : {0.3, 0.6, 0.9, 1.0}) {
      for (double eta : {0.5, 1.23, 2.5}) {
        AsymptoticInputs a = paper_like();
        a.h = h;
        a.beta = beta;
        a.eta = eta;
        CHECK(vix_atm_level_limit(a) > 0.0);
        CHECK(vix_atm_skew_limit(a) > 0.0);
        if (h < 1.0 / 6.0) CHECK(vix_atm_curvature_scaled_limit(a) > 0.0);
      }
    }
  }
}

TEST_CASE("curvature regime and degenerate inputs raise") {
  AsymptoticInputs a = paper_like();
  a.h = 0.2;
  CHECK_THROWS_AS(vix_atm_curvature_scaled_limit(a), std::domain_error);
  a.h = 1.0 / 6.0;
  CHECK_THROWS_AS(vix_atm_curvature_scaled_limit(a), std::domain_error);
  CHECK_THROWS_AS(j3(0.01, a), std::domain_error);
  a = paper_like();
  a.eta = 0.0;
  CHECK_THROWS_AS(vix_atm_curvature_scaled_limit(a), std::domain_error);
  a = paper_like();
  a.h = 0.5;
  CHECK_THROWS_AS(vix_atm_level_limit(a), std::domain_error);
  CHECK_THROWS_AS(vix_atm_skew_limit(a), std::domain_error);
  CHECK_NOTHROW(spx_skew_scaled_limit(a, -0.7));
}

TEST_CASE("input validation rejects out-of-range fields") {
  AsymptoticInputs a = paper_like();
  a.xi0_flat = 0.0;
  CHECK_THROWS_AS(j1(a), std::invalid_argument);
  a = paper_like();
  a.h = 0.6;
  CHECK_THROWS_AS(j1(a), std::invalid_argument);
  a = paper_like();
  a.beta = 0.0;
  CHECK_THROWS_AS(j2(a), std::invalid_argument);
  a = paper_like();
  a.beta = 1.1;
  CHECK_THROWS_AS(j2(a), std::invalid_argument);
  a = paper_like();
  a.eta = -1.0;
  CHECK_THROWS_AS(j1(a), std::invalid_argument);
  a = paper_like();
  a.delta = 0.0;
  CHECK_THROWS_AS(j1(a), std::invalid_argument);
  a = paper_like();
  CHECK_THROWS_AS(j3(-0.1, a), std::invalid_argument);
  CHECK_THROWS_AS(spx_skew_scaled_limit(a, -1.5), std::invalid_argument);
}

TEST_CASE("spx limits reduce as expected") {
  AsymptoticInputs a = paper_like();
  CHECK(spx_atm_level_limit(a) == doctest::Approx(0.235).epsilon(1e-14));
  AsymptoticInputs b = a;
  b.eta = 3.0;
  CHECK(spx_atm_level_limit(b) == spx_atm_level_limit(a));

  AsymptoticInputs flat = a;
  flat.beta = 1.0;
  flat.h = 0.5;
  for (double rho : {-1.0, -0.7, 0.3}) {
    CHECK(spx_skew_scaled_limit(flat, rho) ==
          doctest::Approx(rho * flat.eta / 4.0).epsilon(1e-12));
  }
  CHECK(spx_skew_scaled_limit(a, -0.7) < 0.0);
}

TEST_CASE("double integral of the first Malliavin moment matches its closed form") {
  const AsymptoticInputs a = paper_like();
  const double T = 0.5;
  const double c = 1.0 / std::tgamma(a.h + 0.5);
  const double b = a.eta * a.eta * c * c / (4.0 * a.h);
  const double hp = a.h + 0.5;
  const GreyLaw law(a.beta);
  const long n = 400000;
  std::vector<double> term(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) {
    Philox rng(913, static_cast<std::uint64_t>(i));
    const double y = sample_m_wright(law, rng);
    const double s = T * rng.uniform();
    const double u = s + (T - s) * std::pow(rng.uniform(), 1.0 / hp);
    const double sd = std::pow(u, a.h) / std::sqrt(2.0 * a.h);
    const double z = rng.gaussian();
    const double wick = std::exp(a.eta * c * std::sqrt(y) * sd * z -
                                 b * y * std::pow(u, 2.0 * a.h));
    term[static_cast<size_t>(i)] = T * std::pow(T - s, hp) / hp * a.xi0_flat *
                                   a.eta * c * std::sqrt(y) * wick;
  }
  const oracle::MeanSe m = oracle::mean_se(term);
  const double closed = a.xi0_flat * a.eta * c * kSqrtPi /
                        std::tgamma(1.0 + 0.5 * a.beta) * std::pow(T, a.h + 1.5) /
                        (hp * (2.0 * a.h + 3.0));
  CHECK(std::abs(closed - m.mean) <= 3.0 * m.se);
}

TEST_CASE("limits are continuous in beta") {
  const double step = 1e-3;
  for (int kind = 0; kind < 5; ++kind) {
    double prev = 0.0;
    bool have = false;
    for (double beta = step; beta <= 1.0 + 1e-12; beta += step) {
      AsymptoticInputs a = paper_like();
      a.beta = std::min(beta, 1.0);
      double v = 0.0;
      switch (kind) {
        case 0: v = j1(a); break;
        case 1: v = j2(a); break;
        case 2: v = vix_atm_level_limit(a); break;
        case 3: v = vix_atm_skew_limit(a); break;
        default: v = spx_skew_scaled_limit(a, -0.7); break;
      }
      if (have) CHECK(std::abs(v - prev) <= 0.01 * (std::abs(prev) + 1e-12));
      prev = v;
      have = true;
    }
  }
}
