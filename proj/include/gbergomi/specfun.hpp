#pragma once

#include "gbergomi/rng.hpp"

namespace gbergomi {

// E_beta(z) = sum_n z^n / Gamma(beta n + 1), beta in (0, 1]. Taylor series
// below a cached per-beta crossover, exponential asymptotic expansion above
// it; negative arguments switch to the spectral integral once the series
// starts cancelling. Throws NumericalError when exp(z^{1/beta}) overflows.
double mittag_leffler(double beta, double z);

// M-Wright (Mainardi) density M_beta on [0, inf), beta in (0, 1) strictly;
// beta = 1 is a point mass at 1 and raises domain_error.
double m_wright_density(double beta, double x);

// E[Y^kappa] = Gamma(1+kappa) / Gamma(1+beta*kappa), kappa > -1.
double m_wright_moment(double beta, double kappa);

struct GreyLaw {
  explicit GreyLaw(double beta);
  double beta;
};

// Kanter-style sampler: Y = S^{-beta} for S one-sided beta-stable with
// E[exp(-l S)] = exp(-l^beta). Consumes one uniform and one exponential;
// beta = 1 returns 1 without touching the generator.
double sample_m_wright(const GreyLaw& law, Philox& rng);

// Gauss hypergeometric 2F1(a, b; c; x) for x <= 1. Terminating series when a
// or b is a non-positive integer, Pfaff for x < 0, direct series to 0.6,
// the 1-x connection formula above, Gauss summation at x = 1.
double gauss_2f1(double a, double b, double c, double x);

}  // namespace gbergomi
