#pragma once

namespace gbergomi {

// Inputs for the short-maturity ATM closed forms. These assume a flat
// forward variance curve, so the level enters as a single number; delta is
// the VIX averaging window and t_mkt the option expiry used when rescaling
// market targets during calibration.
struct AsymptoticInputs {
  double xi0_flat = 0.235 * 0.235;
  double h = 0.1;           // (0, 1/2]; the VIX limits need h < 1/2 strictly
  double beta = 1.0;        // (0, 1]
  double eta = 1.0;         // >= 0
  double delta = 1.0 / 12;  // VIX window, one month
  double t_mkt = 0.094;     // > 0
  void validate() const;
};

// Integrated Malliavin moments of the forward variance over the VIX window:
// j1 integrates E[D_0 V_r], j2 integrates E[D_0 D_0 V_r] over (0, delta),
// j3 integrates the third derivative over (t, t + delta). j3 diverges as
// t drops to 0 when h < 1/6, which is why the curvature limit below carries
// the t^{1/2-3h} scaling; it also rejects h = 1/6 where its prefactor has a
// pole.
double j1(const AsymptoticInputs& a);
double j2(const AsymptoticInputs& a);
double j3(double t, const AsymptoticInputs& a);

// Short-maturity ATM implied-vol limits for VIX options, h in (0, 1/2).
double vix_atm_level_limit(const AsymptoticInputs& a);
double vix_atm_skew_limit(const AsymptoticInputs& a);

// lim of t^{1/2-3h} times the ATM curvature, h in (0, 1/6) where it is
// positive. Rejects eta = 0 since j1 sits squared in the denominator.
double vix_atm_curvature_scaled_limit(const AsymptoticInputs& a);

// Short-maturity ATM limits for SPX options. The skew limit divides by
// t^{h+3/2}; it stays finite at h = 1/2, where it reduces to the classical
// Bergomi value rho * eta / 4 for beta = 1.
double spx_atm_level_limit(const AsymptoticInputs& a);
double spx_skew_scaled_limit(const AsymptoticInputs& a, double rho);

}  // namespace gbergomi
