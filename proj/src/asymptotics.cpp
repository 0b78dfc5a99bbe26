#include "gbergomi/asymptotics.hpp"

#include <cmath>
#include <stdexcept>

namespace gbergomi {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;  // sqrt(pi)

double kernel_c(double h) { return 1.0 / std::tgamma(h + 0.5); }

void need_rough(const AsymptoticInputs& a) {
  a.validate();
  if (a.h >= 0.5) throw std::domain_error("VIX limit needs h below 1/2");
}

}  // namespace

void AsymptoticInputs::validate() const {
  if (!(xi0_flat > 0.0)) throw std::invalid_argument("xi0 must be positive");
  if (!(h > 0.0 && h <= 0.5)) throw std::invalid_argument("h must lie in (0, 1/2]");
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in (0, 1]");
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be nonnegative");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (!(t_mkt > 0.0)) throw std::invalid_argument("t_mkt must be positive");
}

double j1(const AsymptoticInputs& a) {
  a.validate();
  const double c = kernel_c(a.h);
  return a.xi0_flat * a.eta * c * kSqrtPi / (2.0 * std::tgamma(1.0 + 0.5 * a.beta)) *
         std::pow(a.delta, a.h + 0.5) / (a.h + 0.5);
}

double j2(const AsymptoticInputs& a) {
  a.validate();
  const double c = kernel_c(a.h);
  return a.xi0_flat * a.eta * a.eta * c * c * std::pow(a.delta, 2.0 * a.h) /
         (std::tgamma(1.0 + a.beta) * 2.0 * a.h);
}

double j3(double t, const AsymptoticInputs& a) {
  a.validate();
  if (!(t >= 0.0)) throw std::invalid_argument("j3 needs t >= 0");
  if (a.h == 1.0 / 6.0) throw std::domain_error("j3 prefactor has a pole at h = 1/6");
  const double c = kernel_c(a.h);
  const double e3 = std::pow(a.eta * c, 3);
  const double p = 3.0 * a.h - 0.5;
  return a.xi0_flat * e3 * 3.0 * kSqrtPi /
         (4.0 * std::tgamma(1.0 + 1.5 * a.beta) * p) *
         (std::pow(t + a.delta, p) - std::pow(t, p));
}

double vix_atm_level_limit(const AsymptoticInputs& a) {
  need_rough(a);
  return j1(a) / (2.0 * a.delta * a.xi0_flat);
}

double vix_atm_skew_limit(const AsymptoticInputs& a) {
  need_rough(a);
  if (a.eta == 0.0) return 0.0;  // both terms scale linearly in eta
  return j2(a) / (2.0 * j1(a)) - j1(a) / (2.0 * a.delta * a.xi0_flat);
}

double vix_atm_curvature_scaled_limit(const AsymptoticInputs& a) {
  a.validate();
  if (a.h >= 1.0 / 6.0) throw std::domain_error("curvature limit needs h below 1/6");
  if (a.eta == 0.0) throw std::domain_error("curvature limit diverges at eta = 0");
  const double c = kernel_c(a.h);
  // t^{1/2-3h} j3(t) tends to minus the unshifted term's coefficient.
  const double limit_j3 = -3.0 * a.xi0_flat * std::pow(a.eta * c, 3) * kSqrtPi /
                          (4.0 * std::tgamma(1.0 + 1.5 * a.beta) * (3.0 * a.h - 0.5));
  const double first = j1(a);
  return 2.0 * a.delta * a.xi0_flat / (3.0 * first * first) * limit_j3;
}

double spx_atm_level_limit(const AsymptoticInputs& a) {
  a.validate();
  return std::sqrt(a.xi0_flat);
}

double spx_skew_scaled_limit(const AsymptoticInputs& a, double rho) {
  a.validate();
  if (!(rho >= -1.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in [-1, 1]");
  const double c = kernel_c(a.h);
  return rho * a.eta * c * kSqrtPi /
         ((2.0 * a.h + 1.0) * (2.0 * a.h + 3.0) * std::tgamma(1.0 + 0.5 * a.beta));
}

}  // namespace gbergomi
