#pragma once

#include <span>
#include <vector>

namespace gbergomi {

// Covariance of generalised grey Brownian motion B^{beta,alpha}:
// (t^alpha + s^alpha - |t-s|^alpha) / (2 Gamma(1+beta)).
double ggbm_cov(double beta, double alpha, double t, double s);

// E[(B^{beta,alpha}_t)^{2n}] = (2n)! t^{n alpha} / (2^n Gamma(beta n + 1)).
double ggbm_even_moment(double beta, double alpha, double t, int n);

// Characteristic function of an increment over a window of length delta:
// E[exp(i u X)] = E_beta(-u^2 |delta|^alpha / 2). Real-valued.
double ggbm_char(double beta, double alpha, double u, double delta);

// Moment generating function, E_beta(+u^2 |delta|^alpha / 2).
double ggbm_mgf(double beta, double alpha, double u, double delta);

// Riemann-Liouville Volterra process V_t = int_0^t (t-u)^{H-1/2} dB_u.
// Spot covariance E[V_t V_s].
double volterra_cov_spot(double h, double t, double s);

// Forward-started kernel integrated only to T: V^t_T = int_0^T (t-u)^{H-1/2} dB_u
// for t >= T. Covariance E[V^t_T V^s_T].
double volterra_cov_forward(double h, double forward_start, double t, double s);

// E[V_t (B_b - B_a)] for an increment of the driving motion over (a, b].
double volterra_brownian_cross_cov(double h, double t, double a, double b);

enum class CovKind {
  kVolterraSpot,            // levels V_{t_1..t_m}
  kVolterraSpotIncrements,  // levels V_{t_1..t_m} then increments dB_1..dB_m
  kVolterraForward,         // forward levels V^{t_j}_T on the grid
};

struct CovSpec {
  CovKind kind = CovKind::kVolterraSpot;
  double h = 0.1;
  double forward_start = 0.0;  // T, used by kVolterraForward
  std::vector<double> grid;    // strictly increasing, positive
};

// Dense covariance with its lower Cholesky factor. A failed factorization is
// retried once with diagonal jitter of 1e-12 times the largest variance;
// persisting failure throws CholeskyError naming the leading minor.
class CovMatrix {
 public:
  explicit CovMatrix(const CovSpec& spec);

  int dim() const { return n_; }
  double at(int i, int j) const { return cov_[static_cast<size_t>(i) * n_ + j]; }
  const std::vector<double>& dense() const { return cov_; }
  const std::vector<double>& chol() const { return chol_; }
  bool jittered() const { return jittered_; }

  // out = L z.
  void correlate(std::span<const double> z, std::span<double> out) const;

 private:
  int n_ = 0;
  std::vector<double> cov_, chol_;
  bool jittered_ = false;
};

}  // namespace gbergomi
