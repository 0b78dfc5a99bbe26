#include "gbergomi/ggbm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gbergomi/errors.hpp"
#include "gbergomi/numerics.hpp"
#include "gbergomi/specfun.hpp"

namespace gbergomi {
namespace {

void check_beta_alpha(double beta, double alpha) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::domain_error("beta must lie in (0, 1]");
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::domain_error("alpha must lie in (0, 2)");
}

void check_h(double h) {
  if (!(h > 0.0 && h < 1.0)) throw std::domain_error("h must lie in (0, 1)");
}

// G_H(v, w) = int_0^v s^{H-1/2} (s+w)^{H-1/2} ds for v > 0, w >= 0.
// Via the Euler integral this is
//   v^{H+1/2} (v+w)^{H-1/2} / (H+1/2) * 2F1(1/2-H, 1; 3/2+H; v/(v+w)),
// with the hypergeometric argument in [0, 1).
double kernel_inner_integral(double h, double v, double w) {
  if (v <= 0.0) return 0.0;
  if (w <= 0.0) return std::pow(v, 2.0 * h) / (2.0 * h);
  const double x = v / (v + w);
  const double head =
      std::pow(v, h + 0.5) * std::pow(v + w, h - 0.5) / (h + 0.5);
  return head * gauss_2f1(0.5 - h, 1.0, 1.5 + h, x);
}

}  // namespace

double ggbm_cov(double beta, double alpha, double t, double s) {
  check_beta_alpha(beta, alpha);
  if (t < 0.0 || s < 0.0) throw std::domain_error("times must be nonnegative");
  const double num =
      std::pow(t, alpha) + std::pow(s, alpha) - std::pow(std::abs(t - s), alpha);
  return 0.5 * num / std::tgamma(1.0 + beta);
}

double ggbm_even_moment(double beta, double alpha, double t, int n) {
  check_beta_alpha(beta, alpha);
  if (t < 0.0) throw std::domain_error("time must be nonnegative");
  if (n < 0) throw std::domain_error("moment order must be nonnegative");
  if (n == 0) return 1.0;
  // (2n)! / (2^n Gamma(beta n + 1)) * t^{n alpha}, kept in logs for large n.
  const double log_coeff = std::lgamma(2.0 * n + 1.0) - n * std::log(2.0) -
                           std::lgamma(beta * n + 1.0);
  return std::exp(log_coeff + n * alpha * std::log(t));
}

double ggbm_char(double beta, double alpha, double u, double delta) {
  check_beta_alpha(beta, alpha);
  return mittag_leffler(beta, -0.5 * u * u * std::pow(std::abs(delta), alpha));
}

double ggbm_mgf(double beta, double alpha, double u, double delta) {
  check_beta_alpha(beta, alpha);
  return mittag_leffler(beta, 0.5 * u * u * std::pow(std::abs(delta), alpha));
}

double volterra_cov_spot(double h, double t, double s) {
  check_h(h);
  if (t < 0.0 || s < 0.0) throw std::domain_error("times must be nonnegative");
  if (t == 0.0 || s == 0.0) return 0.0;
  if (t == s) return std::pow(t, 2.0 * h) / (2.0 * h);
  const double lo = std::min(t, s);
  return kernel_inner_integral(h, lo, std::abs(t - s));
}

double volterra_cov_forward(double h, double forward_start, double t, double s) {
  check_h(h);
  const double tt = forward_start;
  if (!(tt > 0.0)) throw std::domain_error("forward start must be positive");
  if (t < tt || s < tt)
    throw std::domain_error("observation times must not precede the forward start");
  if (t == s)
    return (std::pow(t, 2.0 * h) - std::pow(t - tt, 2.0 * h)) / (2.0 * h);
  const double lo = std::min(t, s);
  const double gap = std::abs(t - s);
  return kernel_inner_integral(h, lo, gap) - kernel_inner_integral(h, lo - tt, gap);
}

double volterra_brownian_cross_cov(double h, double t, double a, double b) {
  check_h(h);
  if (a < 0.0 || b < a) throw std::domain_error("need 0 <= a <= b");
  if (t <= a) return 0.0;
  const double hp = h + 0.5;
  const double cut = std::min(b, t);
  return (std::pow(t - a, hp) - std::pow(t - cut, hp)) / hp;
}

CovMatrix::CovMatrix(const CovSpec& spec) {
  check_h(spec.h);
  const auto& g = spec.grid;
  const int m = static_cast<int>(g.size());
  if (m == 0) throw std::invalid_argument("empty time grid");
  double prev = 0.0;
  for (double t : g) {
    if (!(t > prev)) throw std::invalid_argument("grid must be strictly increasing and positive");
    prev = t;
  }
  if (spec.kind == CovKind::kVolterraForward) {
    if (!(spec.forward_start > 0.0))
      throw std::invalid_argument("forward covariance needs a positive forward start");
    if (g.front() < spec.forward_start)
      throw std::invalid_argument("grid must start at or after the forward start");
  }

  n_ = (spec.kind == CovKind::kVolterraSpotIncrements) ? 2 * m : m;
  cov_.assign(static_cast<size_t>(n_) * n_, 0.0);
  auto set = [&](int i, int j, double v) {
    cov_[static_cast<size_t>(i) * n_ + j] = v;
    cov_[static_cast<size_t>(j) * n_ + i] = v;
  };

  switch (spec.kind) {
    case CovKind::kVolterraSpot:
      for (int i = 0; i < m; ++i)
        for (int j = 0; j <= i; ++j) set(i, j, volterra_cov_spot(spec.h, g[i], g[j]));
      break;
    case CovKind::kVolterraForward:
      for (int i = 0; i < m; ++i)
        for (int j = 0; j <= i; ++j)
          set(i, j, volterra_cov_forward(spec.h, spec.forward_start, g[i], g[j]));
      break;
    case CovKind::kVolterraSpotIncrements:
      for (int i = 0; i < m; ++i)
        for (int j = 0; j <= i; ++j) set(i, j, volterra_cov_spot(spec.h, g[i], g[j]));
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          const double a = (j == 0) ? 0.0 : g[j - 1];
          set(i, m + j, volterra_brownian_cross_cov(spec.h, g[i], a, g[j]));
        }
      }
      for (int j = 0; j < m; ++j) {
        const double a = (j == 0) ? 0.0 : g[j - 1];
        set(m + j, m + j, g[j] - a);
      }
      break;
  }

  chol_ = cov_;
  int bad = cholesky_lower(chol_, n_);
  if (bad >= 0) {
    double max_diag = 0.0;
    for (int i = 0; i < n_; ++i) max_diag = std::max(max_diag, at(i, i));
    chol_ = cov_;
    for (int i = 0; i < n_; ++i) chol_[static_cast<size_t>(i) * n_ + i] += 1e-12 * max_diag;
    bad = cholesky_lower(chol_, n_);
    if (bad >= 0)
      throw CholeskyError("covariance not positive definite at minor " + std::to_string(bad), bad);
    jittered_ = true;
  }
}

void CovMatrix::correlate(std::span<const double> z, std::span<double> out) const {
  if (static_cast<int>(z.size()) != n_ || static_cast<int>(out.size()) != n_)
    throw std::invalid_argument("correlate buffer size mismatch");
  for (int i = 0; i < n_; ++i) {
    double acc = 0.0;
    const double* row = chol_.data() + static_cast<size_t>(i) * n_;
    for (int j = 0; j <= i; ++j) acc += row[j] * z[j];
    out[i] = acc;
  }
}

}  // namespace gbergomi
