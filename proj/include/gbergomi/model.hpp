#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gbergomi {

// Initial forward variance curve xi_0. Evaluation validates positivity so a
// user-supplied curve cannot silently feed a negative variance downstream.
class ForwardCurve {
 public:
  static ForwardCurve flat(double xi0);
  // 1: flat 0.235^2; 2: 0.235^2 (1+t)^2; 3: 0.235^2 sqrt(1+t).
  static ForwardCurve scenario(int which);
  static ForwardCurve from_function(std::function<double(double)> f);

  double operator()(double t) const;

 private:
  explicit ForwardCurve(std::function<double(double)> f) : f_(std::move(f)) {}
  std::function<double(double)> f_;
};

struct ModelParams {
  double h = 0.1;     // (0, 1)
  double beta = 1.0;  // (0, 1]; 1 recovers the rough Bergomi model
  double eta = 1.0;   // >= 0
  double rho = 0.0;   // [-1, 1]
  void validate() const;
};

struct VixBounds {
  double lower = 0.0;
  double lower_se = 0.0;  // zero when the lower bound is closed-form
  double upper = 0.0;
};

class GBergomiModel {
 public:
  GBergomiModel(const ModelParams& params, ForwardCurve xi0);

  const ModelParams& params() const { return p_; }
  double xi0(double t) const { return curve_(t); }
  double kernel_const() const { return c_; }  // 1/Gamma(H+1/2)
  double drift_const() const { return b_; }   // eta^2 c^2 / (4H)

  // E_beta(b t^{2H}); divides the grey exponential so E[V_t] = xi0(t).
  double wick_normalizer(double t) const;

  // zeta(m) = E[exp(m sqrt(Y))] for the grey mixing variable Y, as the
  // moment series sum_k Gamma(1+k/2) m^k / (k! Gamma(1+beta k/2)).
  double zeta(double m) const;

  // Instantaneous variance given the Volterra value v and the draw y of Y.
  double spot_variance(double t, double v, double y) const;

  // Forward variance xi_T(s) observed at t_obs = T <= s, from the
  // forward-started Volterra value v:
  //   xi0(s) E_beta(b (s-T)^{2H}) zeta(eta c v) / E_beta(b s^{2H}).
  double forward_variance(double t_obs, double s, double v) const;

  // (1/delta) trapezoid of the forward variances over the grid, which must
  // start at t_obs and span a window of length delta.
  double vix_squared_from_path(double t_obs, std::span<const double> grid,
                               std::span<const double> v, double delta) const;

  // Jensen sandwich for E[VIX_T]. The upper bound integrates xi0 only; the
  // lower one needs E[sqrt(zeta(eta c v))] per quadrature node, estimated by
  // Monte Carlo except at T = 0 and at beta = 1 where it is closed-form.
  VixBounds vix_bounds(double T, double delta, int n_inner,
                       std::uint64_t seed) const;

 private:
  ModelParams p_;
  ForwardCurve curve_;
  double c_ = 0.0, b_ = 0.0;
  // Term ratios c_k/c_{k-1}, k = 1..cap. Precision matters: the series
  // alternates for negative arguments and rounding in the ratios is amplified
  // by the full cancellation scale, so the deep-negative tier keeps a quad
  // copy and the everyday tier an 80-bit one.
  std::vector<long double> zeta_ratio_;
  std::vector<__float128> zeta_ratio_q_;
};

}  // namespace gbergomi
