#include "gbergomi/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "gbergomi/errors.hpp"

namespace gbergomi {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 32) {
    KahanSum s;
    for (double v : x) s.add(v);
    return s.value();
  }
  size_t h = x.size() / 2;
  return pairwise_sum(x.first(h)) + pairwise_sum(x.subspan(h));
}

double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

int cholesky_lower(std::vector<double>& a, int n) {
  for (int j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return j;
    double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) a[i * n + j] = 0.0;
  return -1;
}

const GlRule& gl_rule(int n) {
  if (n < 1) throw std::invalid_argument("gl_rule: order must be positive");
  static std::mutex mu;
  static std::map<int, GlRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GlRule r;
  r.nodes.assign(n, 0.0);
  r.weights.assign(n, 0.0);
  // Newton on the Legendre recurrence, Abramowitz-Stegun style start.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = -p0 / dp;
      x += dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return cache.emplace(n, std::move(r)).first->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int panels, int n) {
  if (panels < 1) throw std::invalid_argument("integrate_gl: panels must be positive");
  const GlRule& r = gl_rule(n);
  KahanSum s;
  double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * w;
    for (int i = 0; i < n; ++i)
      s.add(0.5 * w * r.weights[i] * f(lo + 0.5 * w * (r.nodes[i] + 1.0)));
  }
  return s.value();
}

namespace {
double simpson_step(const std::function<double(double)>& f, double a, double b,
                    double fa, double fm, double fb, double whole, double tol,
                    int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth) {
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> x0,
                             std::span<const double> step, double tol,
                             long max_evals) {
  const size_t d = x0.size();
  if (d == 0 || step.size() != d)
    throw std::invalid_argument("nelder_mead: dimension mismatch");

  std::vector<std::vector<double>> pts(d + 1, std::vector<double>(x0.begin(), x0.end()));
  for (size_t i = 0; i < d; ++i) pts[i + 1][i] += step[i];
  std::vector<double> fv(d + 1);
  long evals = 0;
  auto eval = [&](const std::vector<double>& p) {
    ++evals;
    return f(std::span<const double>(p));
  };
  for (size_t i = 0; i <= d; ++i) fv[i] = eval(pts[i]);

  std::vector<size_t> ord(d + 1);
  std::vector<double> xc(d), xr(d), xe(d), xk(d);
  NelderMeadResult res;
  while (evals < max_evals) {
    for (size_t i = 0; i <= d; ++i) ord[i] = i;
    std::stable_sort(ord.begin(), ord.end(),
                     [&](size_t a, size_t b) { return fv[a] < fv[b]; });
    size_t best = ord[0], worst = ord[d], second = ord[d - 1];
    if (std::abs(fv[worst] - fv[best]) <= tol * (1.0 + std::abs(fv[best]))) {
      res.converged = true;
      break;
    }
    for (size_t j = 0; j < d; ++j) {
      double c = 0.0;
      for (size_t i = 0; i <= d; ++i)
        if (i != worst) c += pts[i][j];
      xc[j] = c / d;
    }
    for (size_t j = 0; j < d; ++j) xr[j] = xc[j] + (xc[j] - pts[worst][j]);
    double fr = eval(xr);
    if (fr < fv[ord[0]]) {
      for (size_t j = 0; j < d; ++j) xe[j] = xc[j] + 2.0 * (xc[j] - pts[worst][j]);
      double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        fv[worst] = fe;
      } else {
        pts[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      pts[worst] = xr;
      fv[worst] = fr;
    } else {
      bool outside = fr < fv[worst];
      const std::vector<double>& far = outside ? xr : pts[worst];
      for (size_t j = 0; j < d; ++j) xk[j] = xc[j] + 0.5 * (far[j] - xc[j]);
      double fk = eval(xk);
      if (fk < (outside ? fr : fv[worst])) {
        pts[worst] = xk;
        fv[worst] = fk;
      } else {
        for (size_t i = 0; i <= d; ++i) {
          if (i == best) continue;
          for (size_t j = 0; j < d; ++j)
            pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
          fv[i] = eval(pts[i]);
        }
      }
    }
  }
  size_t b = 0;
  for (size_t i = 1; i <= d; ++i)
    if (fv[i] < fv[b]) b = i;
  res.x = pts[b];
  res.value = fv[b];
  res.evals = evals;
  return res;
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  size_t n = x_.size();
  if (n < 2 || y_.size() != n)
    throw std::invalid_argument("CubicSpline: need at least two matching points");
  for (size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1]))
      throw std::invalid_argument("CubicSpline: abscissae must be strictly increasing");
  m_.assign(n, 0.0);
  if (n == 2) return;
  // Thomas solve of the natural-spline tridiagonal system.
  std::vector<double> diag(n, 0.0), rhs(n, 0.0), sub(n, 0.0);
  for (size_t i = 1; i + 1 < n; ++i) {
    double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
    sub[i] = hl;
    diag[i] = 2.0 * (hl + hr);
    rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
  }
  for (size_t i = 2; i + 1 < n; ++i) {
    double w = sub[i] / diag[i - 1];
    diag[i] -= w * (x_[i] - x_[i - 1]);
    rhs[i] -= w * rhs[i - 1];
  }
  for (size_t i = n - 2; i >= 1; --i) {
    double upper = (i + 2 < n) ? (x_[i + 1] - x_[i]) * m_[i + 1] : 0.0;
    m_[i] = (rhs[i] - upper) / diag[i];
    if (i == 1) break;
  }
}

double CubicSpline::operator()(double x) const {
  size_t n = x_.size();
  size_t i = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
  if (i == 0) i = 1;
  if (i >= n) i = n - 1;
  double h = x_[i] - x_[i - 1];
  double a = (x_[i] - x) / h, b = (x - x_[i - 1]) / h;
  return a * y_[i - 1] + b * y_[i] +
         ((a * a * a - a) * m_[i - 1] + (b * b * b - b) * m_[i]) * h * h / 6.0;
}

}  // namespace gbergomi
