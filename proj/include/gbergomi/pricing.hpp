#pragma once

#include <span>
#include <vector>

#include "gbergomi/numerics.hpp"

namespace gbergomi {

// Log-coordinates throughout: x is log-price, k is log-strike.
struct BsInputs {
  double t = 0.0;
  double x = 0.0;
  double k = 0.0;
  double sigma = 0.0;
  double T = 0.0;
};

// Call price; sigma sqrt(T - t) = 0 falls back to the intrinsic value.
double bs_call(const BsInputs& in);

// Unique nonnegative vol reproducing the price. The price must sit in the
// static band [(e^x - e^k)+, e^x); the violated bound is named in the error.
// Bisection on [1e-8, 5] (the bracket doubles as needed) then Newton polish.
double implied_vol(double price, double t, double x, double k, double T);

struct SmilePoint {
  double log_strike = 0.0;
  double vol = 0.0;
};

// Prices calls at the given strikes off terminal-value samples and inverts
// each to a vol. Noisy deep strikes are clamped into the static band instead
// of throwing, so an MC price a hair below intrinsic reads as vol zero.
std::vector<SmilePoint> smile_from_samples(std::span<const double> samples,
                                           double forward, double maturity,
                                           std::span<const double> strikes);

// Coordinate the smile abscissae are expressed in. Fits run in whatever the
// input declares; atm_metrics converts to log-strike where needed.
enum class SmileCoord { strike, log_strike };

struct SmileFit {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;  // vol = a atan(b u + c) + d
  double residual = 0.0;                      // L2 norm of vol residuals
  SmileCoord coord = SmileCoord::strike;
  bool positive_on_range = true;  // fitted level positive over [u_min, u_max]
  double u_min = 0.0, u_max = 0.0;
};

// Least squares over (b, c) with (a, d) solved linearly per candidate;
// deterministic multi-start grid plus simplex polish. Canonical form has
// b >= 0 (the arctan form is invariant under flipping all of a, b, c).
SmileFit fit_arctan_smile(std::span<const double> u, std::span<const double> vol,
                          SmileCoord coord);

struct AtmMetrics {
  double level = 0.0;
  double skew = 0.0;       // derivative in the fit's own coordinate
  double curvature = 0.0;  // second derivative, same coordinate
  double skew_log = 0.0;   // log-strike convention, what calibration consumes
  double curvature_log = 0.0;
};

// Analytic derivatives of the fitted form at the forward.
AtmMetrics atm_metrics(const SmileFit& fit, double forward);

// Interpolating spline through the smile points, for inspection only;
// calibration consumes the arctan fit.
CubicSpline smile_spline(std::span<const double> u, std::span<const double> vol);

}  // namespace gbergomi
