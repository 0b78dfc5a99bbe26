#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gbergomi {

// Compensated accumulator (Kahan-Neumaier).
class KahanSum {
 public:
  void add(double x) {
    double t = s_ + x;
    if (std::abs(s_) >= std::abs(x))
      c_ += (s_ - t) + x;
    else
      c_ += (x - t) + s_;
    s_ = t;
  }
  double value() const { return s_ + c_; }

 private:
  double s_ = 0.0, c_ = 0.0;
};

// Pairwise sum, stable for long Monte Carlo reductions and independent of
// thread count because it only sees the final slot array.
double pairwise_sum(std::span<const double> x);

double norm_pdf(double x);
double norm_cdf(double x);

// In-place lower Cholesky of a row-major symmetric matrix. Returns -1 on
// success, otherwise the 0-based index of the first non-positive leading
// minor. The strict upper triangle is zeroed on success.
int cholesky_lower(std::vector<double>& a, int n);

struct GlRule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;
};

// Cached Gauss-Legendre rule of order n.
const GlRule& gl_rule(int n);

// Integrate f over [a, b] with `panels` equal GL panels of order n.
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int panels, int n);

// Adaptive Simpson with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 30);

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  long evals = 0;
  bool converged = false;
};

// Deterministic Nelder-Mead. `step` sets the initial simplex edge per
// coordinate. Stops when the simplex f-spread falls under tol (relative to
// 1 + |f_best|) or when max_evals is exhausted.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> x0,
                             std::span<const double> step, double tol,
                             long max_evals);

// Natural cubic spline for curve inspection.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> x, std::vector<double> y);
  double operator()(double x) const;

 private:
  std::vector<double> x_, y_, m_;  // m_ holds second derivatives
};

}  // namespace gbergomi
