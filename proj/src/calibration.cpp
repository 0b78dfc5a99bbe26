#include "gbergomi/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gbergomi/numerics.hpp"

namespace gbergomi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<size_t>(n));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < n; ++i)
    out[static_cast<size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

}  // namespace

void MarketTargets::validate() const {
  if (!(t_mkt > 0.0)) throw std::invalid_argument("t_mkt must be positive");
  if (!(vix_spot > 0.0)) throw std::invalid_argument("vix_spot must be positive");
  for (double v : {vix_level, vix_skew, vix_curvature, spx_skew})
    if (!std::isfinite(v)) throw std::invalid_argument("market targets must be finite");
}

void SearchSpec::validate() const {
  if (n_h < 1 || n_beta < 1 || n_eta < 1)
    throw std::invalid_argument("grid needs at least one point per axis");
  if (!(h_lo > 0.0) || !(h_hi < 1.0 / 6) || h_hi < h_lo)
    throw std::invalid_argument("h grid must sit inside (0, 1/6)");
  if (!(beta_lo > 0.0) || beta_hi > 1.0 || beta_hi < beta_lo)
    throw std::invalid_argument("beta grid must sit inside (0, 1]");
  if (!(eta_lo > 0.0) || eta_hi < eta_lo)
    throw std::invalid_argument("eta grid must be positive");
  if (polish_starts < 0) throw std::invalid_argument("polish_starts must be nonnegative");
  if (!(polish_tol > 0.0)) throw std::invalid_argument("polish_tol must be positive");
  if (polish_max_evals < 1) throw std::invalid_argument("polish_max_evals must be positive");
  if (weights.size() != 3) throw std::invalid_argument("weights must have three entries");
  for (double w : weights)
    if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
}

double vix_objective(double h, double beta, double eta, const MarketTargets& targets,
                     std::span<const double> weights) {
  targets.validate();
  if (weights.size() != 3) throw std::invalid_argument("weights must have three entries");

  AsymptoticInputs a;
  a.xi0_flat = targets.vix_spot * targets.vix_spot;
  a.h = h;
  a.beta = beta;
  a.eta = eta;
  a.t_mkt = targets.t_mkt;
  double level, skew, curvature;
  try {
    a.validate();
    level = vix_atm_level_limit(a);
    skew = vix_atm_skew_limit(a);
    curvature = vix_atm_curvature_scaled_limit(a);
  } catch (const std::invalid_argument&) {
    return kInf;
  } catch (const std::domain_error&) {
    return kInf;
  }

  // The market curvature was observed at expiry t_mkt; undo its t^{3h-1/2}
  // factor with the candidate h so both sides live on the scaled limit.
  const double c_scaled = targets.vix_curvature * std::pow(targets.t_mkt, 0.5 - 3.0 * h);
  const double r1 = level - targets.vix_level;
  const double r2 = skew - targets.vix_skew;
  const double r3 = curvature - c_scaled;
  const double obj = weights[0] * r1 * r1 + weights[1] * r2 * r2 + weights[2] * r3 * r3;
  return std::isfinite(obj) ? obj : kInf;
}

double vix_objective(double h, double beta, double eta, const MarketTargets& targets) {
  const double unit[3] = {1.0, 1.0, 1.0};
  return vix_objective(h, beta, eta, targets, unit);
}

CalibrationResult calibrate_vix(const MarketTargets& targets, const SearchSpec& spec) {
  targets.validate();
  spec.validate();

  const std::vector<double> hs = linspace(spec.h_lo, spec.h_hi, spec.n_h);
  const std::vector<double> betas = linspace(spec.beta_lo, spec.beta_hi, spec.n_beta);
  const std::vector<double> etas = linspace(spec.eta_lo, spec.eta_hi, spec.n_eta);

  struct GridPoint {
    double obj;
    double h, beta, eta;
  };
  std::vector<GridPoint> pts;
  pts.reserve(hs.size() * betas.size() * etas.size());
  long evals = 0;
  for (double h : hs)
    for (double beta : betas)
      for (double eta : etas) {
        const double obj = vix_objective(h, beta, eta, targets, spec.weights);
        ++evals;
        pts.push_back({obj, h, beta, eta});
      }
  // stable_sort keeps grid order on ties, so the lowest index wins.
  std::stable_sort(pts.begin(), pts.end(),
                   [](const GridPoint& a, const GridPoint& b) { return a.obj < b.obj; });

  CalibrationResult res;
  res.h = pts[0].h;
  res.beta = pts[0].beta;
  res.eta = pts[0].eta;
  res.objective = pts[0].obj;
  res.grid_objective = pts[0].obj;
  res.converged = false;

  const auto f = [&](std::span<const double> x) {
    return vix_objective(x[0], x[1], x[2], targets, spec.weights);
  };
  const double step_h = hs.size() > 1 ? (spec.h_hi - spec.h_lo) / (spec.n_h - 1) : 0.01;
  const double step_b =
      betas.size() > 1 ? (spec.beta_hi - spec.beta_lo) / (spec.n_beta - 1) : 0.05;
  const double step_e = etas.size() > 1 ? (spec.eta_hi - spec.eta_lo) / (spec.n_eta - 1) : 0.1;
  const int starts = std::min<int>(spec.polish_starts, static_cast<int>(pts.size()));
  for (int s = 0; s < starts; ++s) {
    if (!std::isfinite(pts[static_cast<size_t>(s)].obj)) break;
    const double x0[3] = {pts[static_cast<size_t>(s)].h, pts[static_cast<size_t>(s)].beta,
                          pts[static_cast<size_t>(s)].eta};
    const double step[3] = {step_h, step_b, step_e};
    const NelderMeadResult nm =
        nelder_mead(f, x0, step, spec.polish_tol, spec.polish_max_evals);
    evals += nm.evals;
    if (nm.value < res.objective) {
      res.h = nm.x[0];
      res.beta = nm.x[1];
      res.eta = nm.x[2];
      res.objective = nm.value;
      res.converged = nm.converged;
    }
  }
  res.evaluations = evals;
  if (!res.converged)
    res.note = res.objective == res.grid_objective
                   ? "no polish run improved on the grid"
                   : "polish hit its evaluation cap";

  // Report the residuals at the reported optimum.
  AsymptoticInputs a;
  a.xi0_flat = targets.vix_spot * targets.vix_spot;
  a.h = res.h;
  a.beta = res.beta;
  a.eta = res.eta;
  a.t_mkt = targets.t_mkt;
  if (std::isfinite(res.objective)) {
    res.resid_level = vix_atm_level_limit(a) - targets.vix_level;
    res.resid_skew = vix_atm_skew_limit(a) - targets.vix_skew;
    res.resid_curvature = vix_atm_curvature_scaled_limit(a) -
                          targets.vix_curvature * std::pow(targets.t_mkt, 0.5 - 3.0 * res.h);
  }
  return res;
}

RhoFit calibrate_rho(double h, double beta, double eta, const MarketTargets& targets,
                     bool allow_positive_rho) {
  targets.validate();
  AsymptoticInputs a;
  a.xi0_flat = targets.vix_spot * targets.vix_spot;
  a.h = h;
  a.beta = beta;
  a.eta = eta;
  a.t_mkt = targets.t_mkt;
  a.validate();

  // scaled skew = rho * slope, so the least-squares problem in rho is exactly
  // solvable and only needs clamping to the allowed interval.
  const double slope = spx_skew_scaled_limit(a, 1.0);
  const double target = targets.spx_skew * std::pow(targets.t_mkt, -(h + 1.5));
  const double rho_hi = allow_positive_rho ? 1.0 : 0.0;
  RhoFit fit;
  if (slope == 0.0) {
    fit.rho = 0.0;  // objective is flat in rho; pick the uncorrelated point
    fit.residual = std::abs(target);
    return fit;
  }
  fit.rho = std::clamp(target / slope, -1.0, rho_hi);
  fit.residual = std::abs(fit.rho * slope - target);
  return fit;
}

double smile_rmse(std::span<const SmilePoint> model, std::span<const SmilePoint> market) {
  if (model.size() != market.size())
    throw std::invalid_argument("smiles have different sizes");
  if (model.empty()) throw std::invalid_argument("empty smile");
  double ss = 0.0;
  for (size_t i = 0; i < model.size(); ++i) {
    if (std::abs(model[i].log_strike - market[i].log_strike) >
        1e-12 * (1.0 + std::abs(market[i].log_strike)))
      throw std::invalid_argument("smiles sampled at different strikes");
    const double d = model[i].vol - market[i].vol;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(model.size()));
}

SmileGridResult grid_search_smile(std::span<const std::vector<double>> grid,
                                  const SmilePricer& pricer,
                                  std::span<const SmilePoint> market,
                                  const SmileMetric& metric) {
  if (grid.empty()) throw std::invalid_argument("empty parameter grid");
  if (!pricer) throw std::invalid_argument("missing pricer");
  const SmileMetric& m = metric ? metric : SmileMetric(smile_rmse);

  SmileGridResult res;
  res.surface.reserve(grid.size());
  bool any = false;
  for (size_t i = 0; i < grid.size(); ++i) {
    SmileGridPoint pt;
    pt.params = grid[i];
    try {
      const std::vector<SmilePoint> smile = pricer(grid[i]);
      pt.error = m(smile, market);
      pt.ok = std::isfinite(pt.error);
    } catch (const std::exception&) {
      pt.ok = false;  // pricer failures leave a hole in the surface
    }
    if (pt.ok && (!any || pt.error < res.best_error)) {
      any = true;
      res.best_error = pt.error;
      res.best_index = i;
      res.best_params = pt.params;
    }
    res.surface.push_back(std::move(pt));
  }
  if (!any) throw std::runtime_error("every grid point failed to price");
  return res;
}

}  // namespace gbergomi
