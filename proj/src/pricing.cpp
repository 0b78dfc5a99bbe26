#include "gbergomi/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "gbergomi/errors.hpp"

namespace gbergomi {

namespace {

void check_times(double t, double T) {
  if (!(T >= t)) throw std::invalid_argument("maturity precedes observation time");
}

double intrinsic_call(double x, double k) {
  return std::max(std::exp(x) - std::exp(k), 0.0);
}

// Sum of squared residuals of vol against a atan(b u + c) + d with (a, d)
// given by the linear least-squares solution at fixed (b, c).
double separable_ssr(std::span<const double> u, std::span<const double> vol,
                     double b, double c, double* a_out, double* d_out) {
  const size_t n = u.size();
  double sg = 0.0, sgg = 0.0, sv = 0.0, sgv = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double g = std::atan(b * u[i] + c);
    sg += g;
    sgg += g * g;
    sv += vol[i];
    sgv += g * vol[i];
  }
  const double nn = static_cast<double>(n);
  const double det = nn * sgg - sg * sg;
  double a = 0.0, d = sv / nn;
  // A flat arctan column cannot identify a; pin it to zero and keep the mean.
  if (det > 1e-12 * nn * (sgg + 1e-30)) {
    a = (nn * sgv - sg * sv) / det;
    d = (sv - a * sg) / nn;
  }
  double ssr = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = a * std::atan(b * u[i] + c) + d - vol[i];
    ssr += r * r;
  }
  if (a_out) *a_out = a;
  if (d_out) *d_out = d;
  return ssr;
}

}  // namespace

double bs_call(const BsInputs& in) {
  check_times(in.t, in.T);
  if (!(in.sigma >= 0.0)) throw std::invalid_argument("sigma must be nonnegative");
  const double sv = in.sigma * std::sqrt(in.T - in.t);
  if (sv == 0.0) return intrinsic_call(in.x, in.k);
  const double dp = (in.x - in.k) / sv + 0.5 * sv;
  return std::exp(in.x) * norm_cdf(dp) - std::exp(in.k) * norm_cdf(dp - sv);
}

double implied_vol(double price, double t, double x, double k, double T) {
  check_times(t, T);
  if (!std::isfinite(price)) throw std::invalid_argument("price must be finite");
  const double fwd = std::exp(x);
  const double floor = intrinsic_call(x, k);
  const double slack = 1e-14 * (1.0 + floor);
  if (price < floor - slack)
    throw std::invalid_argument("price below the intrinsic bound (e^x - e^k)+");
  if (price >= fwd)
    throw std::invalid_argument("price at or above the forward bound e^x");
  if (price <= floor + slack) return 0.0;
  if (T == t)
    throw std::invalid_argument("zero time to expiry admits only intrinsic prices");

  const double tau = T - t;
  const double sq_tau = std::sqrt(tau);
  auto value = [&](double sigma) {
    return bs_call({t, x, k, sigma, T});
  };
  double lo = 1e-8, hi = 5.0;
  while (value(hi) < price) {
    hi *= 2.0;
    if (hi > 20.0) throw NumericalError("implied vol exceeds 20");
  }
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    (value(mid) > price ? hi : lo) = mid;
  }
  double sigma = 0.5 * (lo + hi);
  // Newton sharpens the last digits; vega can underflow far from the money,
  // in which case the bisection value already saturates double precision.
  for (int i = 0; i < 8; ++i) {
    const double sv = sigma * sq_tau;
    const double dp = (x - k) / sv + 0.5 * sv;
    const double vega = fwd * norm_pdf(dp) * sq_tau;
    if (!(vega > 1e-300)) break;
    const double step = (price - value(sigma)) / vega;
    sigma += step;
    if (!(sigma > 0.0)) {
      sigma = 0.5 * (lo + hi);
      break;
    }
    if (std::abs(step) < 1e-14 * (1.0 + sigma)) break;
  }
  return sigma;
}

std::vector<SmilePoint> smile_from_samples(std::span<const double> samples,
                                           double forward, double maturity,
                                           std::span<const double> strikes) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  if (!(forward > 0.0)) throw std::invalid_argument("forward must be positive");
  if (!(maturity > 0.0)) throw std::invalid_argument("maturity must be positive");
  const double x = std::log(forward);
  const long n = static_cast<long>(samples.size());
  std::vector<double> pay(samples.size());
  std::vector<SmilePoint> out;
  out.reserve(strikes.size());
  for (double strike : strikes) {
    if (!(strike > 0.0)) throw std::invalid_argument("strikes must be positive");
    for (size_t i = 0; i < samples.size(); ++i)
      pay[i] = std::max(samples[i] - strike, 0.0);
    double price = pairwise_sum(pay) / n;
    const double k = std::log(strike);
    const double floor = intrinsic_call(x, k);
    price = std::clamp(price, floor, std::nextafter(forward, 0.0));
    out.push_back({k, implied_vol(price, 0.0, x, k, maturity)});
  }
  return out;
}

SmileFit fit_arctan_smile(std::span<const double> u, std::span<const double> vol,
                          SmileCoord coord) {
  if (u.size() != vol.size()) throw std::invalid_argument("points have mismatched sizes");
  if (u.size() < 4) throw std::invalid_argument("need at least four points");
  const auto [lo_it, hi_it] = std::minmax_element(u.begin(), u.end());
  const double u_lo = *lo_it, u_hi = *hi_it;
  const double span = u_hi - u_lo;
  if (!(span > 0.0))
    throw std::invalid_argument("degenerate point set: all abscissae coincide");

  double best_b = 0.0, best_c = 0.0;
  double best = std::numeric_limits<double>::infinity();
  // Candidate list kept small: scale-free slopes against the data span,
  // inflection anchored at interior quantiles of the abscissae.
  std::vector<std::pair<double, double>> seeds;
  for (int ib = 0; ib < 16; ++ib) {
    const double b = std::pow(10.0, -1.3 + 2.7 * ib / 15.0) / span;
    for (int ic = 0; ic < 10; ++ic) {
      const double anchor = u_lo + span * (0.05 + 0.9 * ic / 9.0);
      seeds.emplace_back(b, -b * anchor);
    }
  }
  std::vector<std::pair<double, std::pair<double, double>>> ranked;
  ranked.reserve(seeds.size());
  for (const auto& [b, c] : seeds)
    ranked.emplace_back(separable_ssr(u, vol, b, c, nullptr, nullptr),
                        std::make_pair(b, c));
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });
  const size_t polish = std::min<size_t>(5, ranked.size());
  for (size_t i = 0; i < polish; ++i) {
    const auto [b0, c0] = ranked[i].second;
    const double start[2] = {b0, c0};
    const double step[2] = {0.3 * std::abs(b0) + 1e-6, 0.3 * (1.0 + std::abs(c0))};
    const NelderMeadResult r = nelder_mead(
        [&](std::span<const double> p) {
          return separable_ssr(u, vol, p[0], p[1], nullptr, nullptr);
        },
        start, step, 1e-14, 4000);
    if (r.value < best) {
      best = r.value;
      best_b = r.x[0];
      best_c = r.x[1];
    }
  }

  SmileFit fit;
  fit.coord = coord;
  fit.u_min = u_lo;
  fit.u_max = u_hi;
  fit.b = best_b;
  fit.c = best_c;
  separable_ssr(u, vol, best_b, best_c, &fit.a, &fit.d);
  if (fit.b < 0.0) {
    fit.a = -fit.a;
    fit.b = -fit.b;
    fit.c = -fit.c;
  }
  fit.residual = std::sqrt(best);
  // The form is monotone in u, so positivity on the range is decided at the
  // endpoints.
  const double at_lo = fit.a * std::atan(fit.b * u_lo + fit.c) + fit.d;
  const double at_hi = fit.a * std::atan(fit.b * u_hi + fit.c) + fit.d;
  fit.positive_on_range = at_lo > 0.0 && at_hi > 0.0;
  return fit;
}

AtmMetrics atm_metrics(const SmileFit& fit, double forward) {
  if (!(forward > 0.0)) throw std::invalid_argument("forward must be positive");
  const double u0 = fit.coord == SmileCoord::strike ? forward : std::log(forward);
  const double w = fit.b * u0 + fit.c;
  const double den = 1.0 + w * w;
  AtmMetrics m;
  m.level = fit.a * std::atan(w) + fit.d;
  m.skew = fit.a * fit.b / den;
  m.curvature = -2.0 * fit.a * fit.b * fit.b * w / (den * den);
  if (fit.coord == SmileCoord::strike) {
    // sigma(k) = f(e^k): d/dk = K f', d2/dk2 = K f' + K^2 f''.
    m.skew_log = forward * m.skew;
    m.curvature_log = forward * m.skew + forward * forward * m.curvature;
  } else {
    m.skew_log = m.skew;
    m.curvature_log = m.curvature;
  }
  return m;
}

CubicSpline smile_spline(std::span<const double> u, std::span<const double> vol) {
  if (u.size() != vol.size()) throw std::invalid_argument("points have mismatched sizes");
  std::vector<size_t> order(u.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t l, size_t r) { return u[l] < u[r]; });
  std::vector<double> xs(u.size()), ys(u.size());
  for (size_t i = 0; i < order.size(); ++i) {
    xs[i] = u[order[i]];
    ys[i] = vol[order[i]];
  }
  return CubicSpline(std::move(xs), std::move(ys));
}

}  // namespace gbergomi
