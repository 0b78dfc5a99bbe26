#include "gbergomi/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

#include "gbergomi/errors.hpp"
#include "gbergomi/ggbm.hpp"
#include "gbergomi/numerics.hpp"
#include "gbergomi/rng.hpp"
#include "gbergomi/specfun.hpp"

namespace gbergomi {

namespace {

void check_paths(const McConfig& cfg) {
  if (cfg.n_paths < 2) throw std::invalid_argument("need at least two paths");
  if (cfg.workers < 1) throw std::invalid_argument("workers must be positive");
  if (cfg.antithetic && cfg.n_paths % 2 != 0)
    throw std::invalid_argument("antithetic pairing needs an even path count");
}

// Same fallback as CovMatrix: the forward Volterra family is analytic in the
// observation time, so fine grids are numerically rank deficient and a tiny
// ridge is part of normal operation.
std::vector<double> chol_with_jitter(std::vector<double> a, int n) {
  std::vector<double> work = a;
  int bad = cholesky_lower(work, n);
  if (bad < 0) return work;
  double max_diag = 0.0;
  for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, a[static_cast<size_t>(i) * n + i]);
  const double jit = 1e-12 * max_diag;
  work = a;
  for (int i = 0; i < n; ++i) work[static_cast<size_t>(i) * n + i] += jit;
  bad = cholesky_lower(work, n);
  if (bad >= 0) throw CholeskyError("joint gaussian factorization failed", bad);
  return work;
}

// zeta below the long double series switch is exact but slow, and the VIX
// engine lands there on every few-sigma node. ln zeta is smooth (the left
// tail decays like 1/m^2, not exponentially), so a per-beta log spline gives
// ~1e-9 relative accuracy at lookup cost. Cached across engine calls; built
// eagerly so path bodies stay lock-free.
class DeepZeta {
 public:
  explicit DeepZeta(const GBergomiModel& model) : model_(&model) {
    if (model.params().beta == 1.0) return;  // zeta is exp(m) there already
    static std::mutex mx;
    static std::map<double, std::shared_ptr<const CubicSpline>> cache;
    std::lock_guard<std::mutex> lock(mx);
    auto it = cache.find(model.params().beta);
    if (it == cache.end()) {
      const int n = 512;
      std::vector<double> xs(n), ys(n);
      for (int k = 0; k < n; ++k) {
        xs[k] = kLo + (kHi - kLo) * k / (n - 1);
        ys[k] = std::log(model.zeta(xs[k]));
      }
      it = cache.emplace(model.params().beta,
                         std::make_shared<const CubicSpline>(std::move(xs), std::move(ys)))
               .first;
    }
    spline_ = it->second;
  }

  double operator()(double m) const {
    if (!spline_ || m >= kHi || m < kLo) return model_->zeta(m);
    return std::exp((*spline_)(m));
  }

 private:
  static constexpr double kLo = -46.0;
  static constexpr double kHi = -5.0;
  const GBergomiModel* model_;
  std::shared_ptr<const CubicSpline> spline_;
};

}  // namespace

void run_paths(long n, int workers, const std::function<void(long)>& body) {
  if (n < 0) throw std::invalid_argument("negative path count");
  if (workers < 1) throw std::invalid_argument("workers must be positive");
  if (workers == 1) {
    for (long p = 0; p < n; ++p) body(p);
    return;
  }
  std::exception_ptr err;
#ifdef _OPENMP
#pragma omp parallel for num_threads(workers) schedule(static)
#endif
  for (long p = 0; p < n; ++p) {
    try {
      body(p);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(gbergomi_run_paths)
#endif
      {
        if (!err) err = std::current_exception();
      }
    }
  }
  if (err) std::rethrow_exception(err);
}

std::vector<double> simulate_vix(const GBergomiModel& model, double T,
                                 double delta, int n_intervals,
                                 const McConfig& cfg) {
  if (!(T >= 0.0)) throw std::invalid_argument("forward start must be nonnegative");
  if (!(delta > 0.0)) throw std::invalid_argument("window must be positive");
  if (n_intervals < 1) throw std::invalid_argument("need at least one interval");
  check_paths(cfg);
  const int nn = n_intervals + 1;  // grid nodes
  if (cfg.truncation_l < 1 || cfg.truncation_l >= nn)
    throw std::invalid_argument("truncation head out of range");

  std::vector<double> tau(nn);
  for (int j = 0; j < nn; ++j) tau[j] = T + delta * j / n_intervals;

  // Trapezoid weight folded with the forward variance at v = 0, so a path
  // only multiplies by zeta at each node.
  std::vector<double> wbase(nn);
  for (int j = 0; j < nn; ++j) {
    const double w = (j == 0 || j == nn - 1) ? 0.5 : 1.0;
    wbase[j] = w * (delta / n_intervals) * model.forward_variance(T, tau[j], 0.0) / delta;
  }

  std::vector<double> out(static_cast<size_t>(cfg.n_paths));

  if (T == 0.0) {
    // The forward Volterra process started at zero is identically zero.
    double v2 = 0.0;
    for (int j = 0; j < nn; ++j) v2 += wbase[j];
    std::fill(out.begin(), out.end(), std::sqrt(std::max(0.0, v2)));
    return out;
  }

  const double h = model.params().h;
  const double ec = model.params().eta * model.kernel_const();

  // Exact joint draw on the first head nodes, then the lag-one conditional
  // recursion: marginal variances stay exact, only correlations beyond the
  // immediate neighbour are approximated.
  const int head = cfg.truncation_l + 1;
  std::vector<double> a(static_cast<size_t>(head) * head);
  for (int i = 0; i < head; ++i)
    for (int j = 0; j < head; ++j)
      a[static_cast<size_t>(i) * head + j] = volterra_cov_forward(h, T, tau[i], tau[j]);
  const std::vector<double> chol = chol_with_jitter(std::move(a), head);

  std::vector<double> sd(nn), lag(nn, 0.0);
  for (int j = 0; j < nn; ++j)
    sd[j] = std::sqrt(volterra_cov_forward(h, T, tau[j], tau[j]));
  for (int j = head; j < nn; ++j) {
    const double r = volterra_cov_forward(h, T, tau[j], tau[j - 1]) / (sd[j] * sd[j - 1]);
    lag[j] = std::min(r, 1.0);
  }

  const DeepZeta zeta(model);

  run_paths(cfg.n_paths, cfg.workers, [&](long p) {
    const std::uint64_t stream = cfg.antithetic ? static_cast<std::uint64_t>(p / 2)
                                                : static_cast<std::uint64_t>(p);
    const double sign = (cfg.antithetic && (p % 2 != 0)) ? -1.0 : 1.0;
    Philox rng(cfg.seed, stream);
    std::vector<double> v(nn);
    for (int i = 0; i < head; ++i) {
      const double z = sign * rng.gaussian();
      for (int j = i; j < head; ++j) v[j] = (i == 0 ? 0.0 : v[j]) + chol[static_cast<size_t>(j) * head + i] * z;
    }
    for (int j = head; j < nn; ++j) {
      const double z = sign * rng.gaussian();
      const double r = lag[j];
      v[j] = sd[j] * (r * v[j - 1] / sd[j - 1] + std::sqrt(std::max(0.0, 1.0 - r * r)) * z);
    }
    double v2 = 0.0;
    for (int j = 0; j < nn; ++j) v2 += wbase[j] * zeta(ec * v[j]);
    out[static_cast<size_t>(p)] = std::sqrt(std::max(0.0, v2));
  });
  return out;
}

std::vector<double> simulate_spot(const GBergomiModel& model, double T,
                                  int n_steps, const McConfig& cfg) {
  if (!(T > 0.0)) throw std::invalid_argument("maturity must be positive");
  if (n_steps < 1) throw std::invalid_argument("need at least one step");
  check_paths(cfg);

  const int m = n_steps;
  const double dt = T / m;
  const auto& p = model.params();
  const double ec = p.eta * model.kernel_const();
  const double rho = p.rho;
  const double rhoc = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  const double sq_dt = std::sqrt(dt);

  CovSpec spec;
  spec.kind = CovKind::kVolterraSpotIncrements;
  spec.h = p.h;
  spec.grid.resize(m);
  for (int i = 1; i <= m; ++i) spec.grid[static_cast<size_t>(i) - 1] = T * i / m;
  const CovMatrix cov(spec);

  // V at the left endpoint of each step: t_0 = 0 up to t_{m-1}.
  std::vector<double> vfac(m);
  for (int i = 0; i < m; ++i) vfac[i] = model.xi0(T * i / m) / model.wick_normalizer(T * i / m);

  const GreyLaw law(p.beta);
  std::vector<double> out(static_cast<size_t>(cfg.n_paths));

  run_paths(cfg.n_paths, cfg.workers, [&](long pth) {
    const std::uint64_t stream = cfg.antithetic ? static_cast<std::uint64_t>(pth / 2)
                                                : static_cast<std::uint64_t>(pth);
    const double sign = (cfg.antithetic && (pth % 2 != 0)) ? -1.0 : 1.0;
    Philox rng(cfg.seed, stream);
    const double sqy = std::sqrt(sample_m_wright(law, rng));
    std::vector<double> z(2 * static_cast<size_t>(m)), g(2 * static_cast<size_t>(m));
    for (auto& zi : z) zi = sign * rng.gaussian();
    cov.correlate(z, g);  // g[0..m-1] Volterra levels, g[m..2m-1] B increments
    double x = 0.0;
    double var = vfac[0];
    for (int i = 1; i <= m; ++i) {
      const double zp = sign * rng.gaussian();
      const double dw = rho * g[static_cast<size_t>(m) + i - 1] + rhoc * sq_dt * zp;
      x += -0.5 * var * dt + std::sqrt(var) * dw;
      if (i < m) var = vfac[i] * std::exp(ec * sqy * g[static_cast<size_t>(i) - 1]);
    }
    out[static_cast<size_t>(pth)] = std::exp(x);
  });
  return out;
}

MarkovianNodes markovian_nodes(double h, int n, double t_lo, double t_hi) {
  if (!(h > 0.0 && h <= 0.5)) throw std::invalid_argument("h must lie in (0, 1/2]");
  if (n < 1) throw std::invalid_argument("need at least one node");
  if (!(t_lo > 0.0 && t_hi > t_lo)) throw std::invalid_argument("bad time range");
  if (h == 0.5) return {{0.0}, {1.0}, 0.0};

  const double hp = 0.5 - h;  // spectral density cmu x^{-h-1/2} on (0, inf)
  const double cmu = 1.0 / (std::tgamma(0.5 - h) * std::tgamma(0.5 + h));
  const auto kernel = [&](double t) { return std::pow(t, h - 0.5) / std::tgamma(h + 0.5); };
  const double eps_l = 1.5e-3, eps_r = 1.5e-3;

  // The first bucket is (0, xi1] with its full mass kept: the low-rate tail
  // carries a big share of the kernel at long horizons and dropping it costs
  // an order of magnitude in accuracy. xi1 balances that bucket's Jensen
  // error at t_hi against the log-range the remaining buckets must cover.
  const double vr = hp / (2.0 + hp) - (hp / (1.0 + hp)) * (hp / (1.0 + hp));
  const double xi1 = std::pow(
      2.0 * hp * eps_l * kernel(t_hi) / (cmu * vr * t_hi * t_hi), 1.0 / (2.0 + hp));
  // Right cutoff from the integrand scale of the dropped high-rate tail at t_lo.
  const double target = eps_r * kernel(t_lo) * t_lo / cmu;  // e^{-t_lo x} x^{-h-1/2}
  double x_max = 30.0 / t_lo;
  for (int it = 0; it < 200; ++it) {
    const double next = (-std::log(target) - (h + 0.5) * std::log(x_max)) / t_lo;
    if (std::abs(next - x_max) < 1e-12 * x_max) {
      x_max = next;
      break;
    }
    x_max = next;
  }
  if (!(x_max > xi1)) throw NumericalError("rate range collapsed");

  MarkovianNodes out;
  out.x.resize(static_cast<size_t>(n));
  out.w.resize(static_cast<size_t>(n));
  std::vector<double> edge(static_cast<size_t>(n) + 1, 0.0);
  if (n == 1) {
    edge[1] = x_max;
  } else {
    for (int i = 0; i < n; ++i)
      edge[static_cast<size_t>(i) + 1] = xi1 * std::pow(x_max / xi1, static_cast<double>(i) / (n - 1));
  }
  for (int i = 0; i < n; ++i) {
    const double lo = edge[static_cast<size_t>(i)];
    const double hi = edge[static_cast<size_t>(i) + 1];
    const double i0 = cmu * (std::pow(hi, hp) - std::pow(lo, hp)) / hp;
    const double i1 = cmu * (std::pow(hi, 1.0 + hp) - std::pow(lo, 1.0 + hp)) / (1.0 + hp);
    out.w[static_cast<size_t>(i)] = i0;
    out.x[static_cast<size_t>(i)] = i1 / i0;
  }

  double sup = 0.0;
  const int grid = 400;
  for (int k = 0; k < grid; ++k) {
    const double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(k) / (grid - 1));
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += out.w[static_cast<size_t>(i)] * std::exp(-out.x[static_cast<size_t>(i)] * t);
    sup = std::max(sup, std::abs(s - kernel(t)) / kernel(t));
  }
  out.sup_rel_error = sup;
  return out;
}

std::vector<double> simulate_spot_markovian(const GBergomiModel& model, double T,
                                            int n_steps, int n_factors,
                                            const McConfig& cfg) {
  if (!(T > 0.0)) throw std::invalid_argument("maturity must be positive");
  if (n_steps < 1) throw std::invalid_argument("need at least one step");
  if (n_factors < 1) throw std::invalid_argument("need at least one factor");
  check_paths(cfg);

  const int m = n_steps;
  const double dt = T / m;
  const auto& p = model.params();
  const MarkovianNodes nodes = markovian_nodes(p.h, n_factors, dt, T);
  const int nf = static_cast<int>(nodes.x.size());
  const double rho = p.rho;
  const double rhoc = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  const double sq_dt = std::sqrt(dt);

  // The kernel already carries 1/Gamma(H+1/2): the factor sum approximates
  // c * Volterra, so the exponent is eta sqrt(Y) F with no extra constant.
  // Normalize by the compensator of the factor sum itself, not the exact
  // kernel's: Var(F_t) falls short of the true Volterra variance at any finite
  // node count (badly so at small H where half the variance sits below the
  // step scale), and dividing by the exact normalizer would bias E[V] low by
  // that gap. With the factor sum's own variance E[V] = xi0 holds at every
  // node count, and when the kernel is exact (H = 1/2) the two normalizers
  // coincide.
  std::vector<double> vfac(m);
  for (int i = 0; i < m; ++i) {
    const double t = T * i / m;
    double vhat = 0.0;
    for (int a = 0; a < nf; ++a)
      for (int b = 0; b < nf; ++b) {
        const double s = nodes.x[static_cast<size_t>(a)] + nodes.x[static_cast<size_t>(b)];
        vhat += nodes.w[static_cast<size_t>(a)] * nodes.w[static_cast<size_t>(b)] *
                (s > 0.0 ? -std::expm1(-s * t) / s : t);
      }
    vfac[i] = model.xi0(t) / mittag_leffler(p.beta, 0.5 * p.eta * p.eta * vhat);
  }
  std::vector<double> decay(static_cast<size_t>(nf));
  for (int i = 0; i < nf; ++i) decay[static_cast<size_t>(i)] = std::exp(-nodes.x[static_cast<size_t>(i)] * dt);

  // One step's joint gaussian: OU innovations against their own rates plus
  // the driving Brownian increment in the last slot.
  const bool degenerate = (nf == 1 && nodes.x[0] == 0.0);  // h = 1/2, innovation is dB itself
  std::vector<double> chol;
  const int jd = nf + 1;
  if (!degenerate) {
    std::vector<double> c(static_cast<size_t>(jd) * jd);
    // expm1 matters: rates span many decades and 1 - e^{-s dt} underflows to
    // noise for the small ones, which leaves the matrix inconsistent.
    for (int i = 0; i < nf; ++i) {
      for (int j = 0; j < nf; ++j) {
        const double s = nodes.x[static_cast<size_t>(i)] + nodes.x[static_cast<size_t>(j)];
        c[static_cast<size_t>(i) * jd + j] = s > 0.0 ? -std::expm1(-s * dt) / s : dt;
      }
      const double xi = nodes.x[static_cast<size_t>(i)];
      const double cross = xi > 0.0 ? -std::expm1(-xi * dt) / xi : dt;
      c[static_cast<size_t>(i) * jd + nf] = cross;
      c[static_cast<size_t>(nf) * jd + i] = cross;
    }
    c[static_cast<size_t>(nf) * jd + nf] = dt;
    chol = chol_with_jitter(std::move(c), jd);
  }

  const GreyLaw law(p.beta);
  std::vector<double> out(static_cast<size_t>(cfg.n_paths));

  run_paths(cfg.n_paths, cfg.workers, [&](long pth) {
    const std::uint64_t stream = cfg.antithetic ? static_cast<std::uint64_t>(pth / 2)
                                                : static_cast<std::uint64_t>(pth);
    const double sign = (cfg.antithetic && (pth % 2 != 0)) ? -1.0 : 1.0;
    Philox rng(cfg.seed, stream);
    const double sqy = std::sqrt(sample_m_wright(law, rng));
    std::vector<double> state(static_cast<size_t>(nf), 0.0);
    std::vector<double> z(static_cast<size_t>(jd)), e(static_cast<size_t>(jd));
    double x = 0.0;
    double var = vfac[0];
    for (int k = 1; k <= m; ++k) {
      double db;
      if (degenerate) {
        db = sq_dt * (sign * rng.gaussian());
        e[0] = db;
      } else {
        for (int i = 0; i < jd; ++i) z[static_cast<size_t>(i)] = sign * rng.gaussian();
        for (int i = 0; i < jd; ++i) {
          double acc = 0.0;
          for (int j = 0; j <= i; ++j) acc += chol[static_cast<size_t>(i) * jd + j] * z[static_cast<size_t>(j)];
          e[static_cast<size_t>(i)] = acc;
        }
        db = e[static_cast<size_t>(nf)];
      }
      const double zp = sign * rng.gaussian();
      const double dw = rho * db + rhoc * sq_dt * zp;
      x += -0.5 * var * dt + std::sqrt(var) * dw;
      if (k < m) {
        double f = 0.0;
        for (int i = 0; i < nf; ++i) {
          state[static_cast<size_t>(i)] = decay[static_cast<size_t>(i)] * state[static_cast<size_t>(i)] + e[static_cast<size_t>(i)];
          f += nodes.w[static_cast<size_t>(i)] * state[static_cast<size_t>(i)];
        }
        var = vfac[k] * std::exp(p.eta * sqy * f);
      }
    }
    out[static_cast<size_t>(pth)] = std::exp(x);
  });
  return out;
}

McResult price_from_samples(std::span<const double> samples,
                            const std::string& engine, bool martingale_exact,
                            std::uint64_t seed) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  const long n = static_cast<long>(samples.size());
  const double mean = pairwise_sum(samples) / n;
  double se = 0.0;
  if (n > 1) {
    std::vector<double> dev(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
      const double d = samples[i] - mean;
      dev[i] = d * d;
    }
    se = std::sqrt(pairwise_sum(dev) / (static_cast<double>(n) * (n - 1)));
  }
  McResult res;
  res.mean = mean;
  res.se = se;
  res.engine = engine;
  res.martingale_exact = martingale_exact;
  res.seed = seed;
  res.n_paths = n;
  return res;
}

}  // namespace gbergomi
