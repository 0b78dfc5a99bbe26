#include "gbergomi/model.hpp"

#include <quadmath.h>

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "gbergomi/errors.hpp"
#include "gbergomi/numerics.hpp"
#include "gbergomi/rng.hpp"
#include "gbergomi/specfun.hpp"

namespace gbergomi {
namespace {

constexpr int kZetaCap = 1000;
constexpr double kVixScale = 0.235 * 0.235;

}  // namespace

ForwardCurve ForwardCurve::flat(double xi0) {
  if (!(xi0 > 0.0)) throw std::invalid_argument("flat forward variance must be positive");
  return ForwardCurve([xi0](double) { return xi0; });
}

ForwardCurve ForwardCurve::scenario(int which) {
  switch (which) {
    case 1:
      return ForwardCurve([](double) { return kVixScale; });
    case 2:
      return ForwardCurve([](double t) { return kVixScale * (1.0 + t) * (1.0 + t); });
    case 3:
      return ForwardCurve([](double t) { return kVixScale * std::sqrt(1.0 + t); });
    default:
      throw std::invalid_argument("forward curve scenarios are numbered 1 to 3");
  }
}

ForwardCurve ForwardCurve::from_function(std::function<double(double)> f) {
  if (!f) throw std::invalid_argument("forward curve function is empty");
  return ForwardCurve(std::move(f));
}

double ForwardCurve::operator()(double t) const {
  if (t < 0.0) throw std::domain_error("forward curve evaluated at negative time");
  const double v = f_(t);
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::domain_error("forward variance curve must be positive, got " +
                            std::to_string(v) + " at t = " + std::to_string(t));
  return v;
}

void ModelParams::validate() const {
  if (!(h > 0.0 && h < 1.0)) throw std::domain_error("h must lie in (0, 1)");
  if (!(beta > 0.0 && beta <= 1.0)) throw std::domain_error("beta must lie in (0, 1]");
  if (!(eta >= 0.0)) throw std::domain_error("eta must be nonnegative");
  if (!(rho >= -1.0 && rho <= 1.0)) throw std::domain_error("rho must lie in [-1, 1]");
}

GBergomiModel::GBergomiModel(const ModelParams& params, ForwardCurve xi0)
    : p_(params), curve_(std::move(xi0)) {
  p_.validate();
  c_ = 1.0 / std::tgamma(p_.h + 0.5);
  b_ = p_.eta * p_.eta * c_ * c_ / (4.0 * p_.h);
  // Ratios of the moment-series coefficients, via log-gammas so large k stays
  // finite: c_k = Gamma(1+k/2) / (k! Gamma(1+beta k/2)). The quad table is
  // the master copy: the deep-negative series cancels through peaks of e^50
  // and ratio noise is amplified by the full peak, so 80-bit ratios are not
  // enough there.
  zeta_ratio_q_.resize(kZetaCap);
  zeta_ratio_.resize(kZetaCap);
  auto log_ck = [&](int k) -> __float128 {
    return lgammaq(1.0Q + 0.5Q * k) - lgammaq(k + 1.0Q) -
           lgammaq(1.0Q + 0.5Q * (__float128)p_.beta * k);
  };
  __float128 prev = 0.0Q;  // log c_0 = 0
  for (int k = 1; k <= kZetaCap; ++k) {
    const __float128 cur = log_ck(k);
    zeta_ratio_q_[k - 1] = expq(cur - prev);
    zeta_ratio_[k - 1] = static_cast<long double>(zeta_ratio_q_[k - 1]);
    prev = cur;
  }
}

double GBergomiModel::wick_normalizer(double t) const {
  if (t < 0.0) throw std::domain_error("time must be nonnegative");
  return mittag_leffler(p_.beta, b_ * std::pow(t, 2.0 * p_.h));
}

// Quad-precision pass for moderately deep negative arguments. The alternating
// series cancels much harder than exp does (for beta = 0.05 the largest term
// is already e^{54} at m = -15), so the attempt polices its own cancellation
// budget and reports failure instead of returning noise.
static std::optional<double> zeta_series_quad(double m,
                                              std::span<const __float128> ratio) {
  __float128 sum = 1, term = 1, peak = 1;
  const __float128 mq = m;
  int calm = 0;
  for (size_t k = 1; k <= ratio.size(); ++k) {
    term *= mq * ratio[k - 1];
    sum += term;
    __float128 mag = term < 0 ? -term : term;
    if (mag > peak) {
      peak = mag;
      // Cap chosen so peak * quad epsilon stays far below the smallest value
      // the tier is trusted for (~1e-5 near m = -46).
      if (peak > 3e21Q) return std::nullopt;
    }
    __float128 asum = sum < 0 ? -sum : sum;
    const __float128 scale = asum > peak ? asum : peak;
    if (mag <= 1e-33Q * scale) {
      if (++calm >= 2) return static_cast<double>(sum);
    } else {
      calm = 0;
    }
  }
  return std::nullopt;
}

double GBergomiModel::zeta(double m) const {
  // Negative arguments cancel. The plain series is kept down to m = -5, where
  // extended precision still leaves ~12 digits for every beta. Below that a
  // quad-precision pass takes over, and when even 34 digits cannot absorb the
  // cancellation (very negative m with small beta), the last resort is
  // quadrature against the mixing density (y = r^2 flattens the sqrt):
  //   E[exp(m sqrt(Y))] = int_0^inf 2 r exp(m r) M_beta(r^2) dr.
  // Simulated paths essentially never land down there.
  if (m < -5.0) {
    if (p_.beta == 1.0) return std::exp(m);
    if (auto v = zeta_series_quad(m, zeta_ratio_q_)) return *v;
    const double upper = 50.0 / -m;
    return adaptive_simpson(
        [&](double r) {
          return 2.0 * r * std::exp(m * r) * m_wright_density(p_.beta, r * r);
        },
        0.0, upper, 1e-12);
  }
  long double sum = 1.0L, term = 1.0L, peak = 1.0L;
  int calm = 0;
  for (int k = 1; k <= kZetaCap; ++k) {
    term *= (long double)m * zeta_ratio_[k - 1];
    sum += term;
    const long double mag = std::abs(term);
    if (mag > peak) peak = mag;
    const long double scale = std::max(std::abs(sum), peak);
    if (mag <= 1e-17L * scale) {
      if (++calm >= 2) return static_cast<double>(sum);
    } else {
      calm = 0;
    }
  }
  throw NonConvergence("zeta series did not settle at m = " + std::to_string(m),
                       static_cast<double>(sum));
}

double GBergomiModel::spot_variance(double t, double v, double y) const {
  if (y < 0.0) throw std::domain_error("subordinator draw must be nonnegative");
  return curve_(t) * std::exp(p_.eta * c_ * std::sqrt(y) * v) / wick_normalizer(t);
}

double GBergomiModel::forward_variance(double t_obs, double s, double v) const {
  if (t_obs < 0.0 || s < t_obs) throw std::domain_error("need 0 <= t_obs <= s");
  const double h2 = 2.0 * p_.h;
  const double residual = mittag_leffler(p_.beta, b_ * std::pow(s - t_obs, h2));
  return curve_(s) * residual * zeta(p_.eta * c_ * v) /
         mittag_leffler(p_.beta, b_ * std::pow(s, h2));
}

double GBergomiModel::vix_squared_from_path(double t_obs, std::span<const double> grid,
                                            std::span<const double> v,
                                            double delta) const {
  const size_t n = grid.size();
  if (n < 2 || v.size() != n) throw std::invalid_argument("grid and path sizes disagree");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (std::abs(grid.front() - t_obs) > 1e-12 ||
      std::abs(grid.back() - (t_obs + delta)) > 1e-9)
    throw std::invalid_argument("grid must span [t_obs, t_obs + delta]");
  KahanSum acc;
  double prev_t = grid[0], prev_f = forward_variance(t_obs, grid[0], v[0]);
  for (size_t j = 1; j < n; ++j) {
    const double f = forward_variance(t_obs, grid[j], v[j]);
    acc.add(0.5 * (prev_f + f) * (grid[j] - prev_t));
    prev_t = grid[j];
    prev_f = f;
  }
  return acc.value() / delta;
}

VixBounds GBergomiModel::vix_bounds(double T, double delta, int n_inner,
                                    std::uint64_t seed) const {
  if (T < 0.0) throw std::domain_error("maturity must be nonnegative");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (n_inner < 2) throw std::invalid_argument("need at least two inner draws");

  VixBounds out;
  const int panels = 4, order = 16;
  out.upper = std::sqrt(
      integrate_gl([&](double s) { return curve_(s); }, T, T + delta, panels, order) /
      delta);

  const double h2 = 2.0 * p_.h;
  // Integrand of the lower bound at quadrature node s:
  //   sqrt(xi0(s) E_beta(b (s-T)^{2H}) / E_beta(b s^{2H})) E[sqrt(zeta(eta c v))],
  // v ~ N(0, (s^{2H} - (s-T)^{2H}) / (2H)). The (s-T)^{2H} kink at the left
  // endpoint defeats a uniform rule, so the panels shrink dyadically toward T;
  // on each panel the integrand looks analytic and order 16 is plenty.
  const auto& rule = gl_rule(order);
  std::vector<double> edges{T};
  if (T > 0.0) {
    const int levels = 12;
    for (int k = levels; k >= 1; --k) edges.push_back(T + delta * std::ldexp(1.0, -k));
  }
  edges.push_back(T + delta);
  KahanSum acc, var_acc;
  int node_index = 0;
  for (size_t pnl = 0; pnl + 1 < edges.size(); ++pnl) {
    const double a = edges[pnl];
    const double width = edges[pnl + 1] - a;
    for (int q = 0; q < order; ++q, ++node_index) {
      const double s = a + 0.5 * width * (rule.nodes[q] + 1.0);
      const double w = 0.5 * width * rule.weights[q];
      const double det = std::sqrt(
          curve_(s) * mittag_leffler(p_.beta, b_ * std::pow(s - T, h2)) /
          mittag_leffler(p_.beta, b_ * std::pow(s, h2)));
      const double var_v = (std::pow(s, h2) - std::pow(s - T, h2)) / h2;
      double mean_sqrt_zeta, se_sqrt_zeta = 0.0;
      if (T == 0.0 || var_v <= 0.0 || p_.eta == 0.0) {
        mean_sqrt_zeta = 1.0;
      } else if (p_.beta == 1.0) {
        // E[exp(eta c v / 2)] for Gaussian v.
        mean_sqrt_zeta = std::exp(p_.eta * p_.eta * c_ * c_ * var_v / 8.0);
      } else {
        Philox rng(seed, static_cast<std::uint64_t>(node_index));
        const double sd = std::sqrt(var_v);
        KahanSum s1, s2;
        for (int i = 0; i < n_inner; ++i) {
          const double z = std::sqrt(zeta(p_.eta * c_ * sd * rng.gaussian()));
          s1.add(z);
          s2.add(z * z);
        }
        mean_sqrt_zeta = s1.value() / n_inner;
        const double var_z =
            (s2.value() - n_inner * mean_sqrt_zeta * mean_sqrt_zeta) / (n_inner - 1);
        se_sqrt_zeta = std::sqrt(std::max(var_z, 0.0) / n_inner);
      }
      acc.add(w * det * mean_sqrt_zeta);
      const double contrib = w * det * se_sqrt_zeta;
      var_acc.add(contrib * contrib);
    }
  }
  out.lower = acc.value() / delta;
  out.lower_se = std::sqrt(var_acc.value()) / delta;
  return out;
}

}  // namespace gbergomi
