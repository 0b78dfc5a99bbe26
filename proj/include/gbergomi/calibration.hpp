#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gbergomi/asymptotics.hpp"
#include "gbergomi/pricing.hpp"

namespace gbergomi {

// ATM VIX smile observables plus the scaled SPX skew, all at a common option
// expiry t_mkt. vix_spot fixes the flat forward-variance level xi0 = vix_spot^2.
struct MarketTargets {
  double vix_level = 0.0;      // ATM VIX implied vol
  double vix_skew = 0.0;       // ATM VIX skew, strike units
  double vix_curvature = 0.0;  // ATM VIX curvature, strike units
  double spx_skew = 0.0;       // ATM SPX skew, strike units
  double t_mkt = 0.094;        // expiry the observables were read at
  double vix_spot = 0.235;

  void validate() const;
};

// Search box and optimizer budget for calibrate_vix. Grid bounds are
// inclusive; beta_hi = 1 keeps the log-normal edge reachable.
struct SearchSpec {
  int n_h = 20;
  int n_beta = 20;
  int n_eta = 20;
  double h_lo = 0.01;
  double h_hi = 0.16;
  double beta_lo = 0.05;
  double beta_hi = 1.0;
  double eta_lo = 0.05;
  double eta_hi = 4.0;
  int polish_starts = 5;      // distinct grid points handed to Nelder-Mead
  double polish_tol = 1e-10;
  int polish_max_evals = 2000;
  // Relative weights of the level / skew / curvature residuals. Unit weights
  // reproduce the plain sum of squares.
  std::vector<double> weights = {1.0, 1.0, 1.0};

  void validate() const;
};

struct CalibrationResult {
  double h = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double objective = 0.0;
  // Signed residuals (model limit minus scaled market value) at the optimum.
  double resid_level = 0.0;
  double resid_skew = 0.0;
  double resid_curvature = 0.0;
  // Trace summary.
  double grid_objective = 0.0;  // best value seen on the raw grid
  long evaluations = 0;         // objective calls, grid plus polish
  bool converged = true;        // false if no polish run beat the grid
  std::string note;
};

struct RhoFit {
  double rho = 0.0;
  double residual = 0.0;  // |scaled model skew - scaled market skew| at rho
};

// Sum of squared differences between the short-expiry ATM limits at
// (h, beta, eta) and the market targets. The curvature comparison follows the
// scaled form: lim C_T / T^{3h-1/2} against c_mkt / t_mkt^{3h-1/2}, with the
// candidate h in the market-side exponent. Parameters outside the admissible
// region (h >= 1/6, beta > 1, eta <= 0, ...) return +infinity so optimizers
// can probe freely. As eta -> 0 with zero targets the objective tends to 0,
// but eta = 0 itself has no curvature limit and maps to +infinity.
double vix_objective(double h, double beta, double eta, const MarketTargets& targets,
                     std::span<const double> weights);
double vix_objective(double h, double beta, double eta, const MarketTargets& targets);

// Stage one: deterministic grid scan over (h, beta, eta) followed by
// Nelder-Mead polish from the best polish_starts grid points. Ties on the
// grid break towards the lowest (h, beta, eta) index.
CalibrationResult calibrate_vix(const MarketTargets& targets, const SearchSpec& spec = {});

// Stage two, with (h, beta, eta) frozen: the scaled SPX skew limit is linear
// in rho, so the minimizer over a closed interval is the clamped exact solve.
// Default bounds [-1, 0]; allow_positive_rho widens to [-1, 1]. When eta = 0
// the skew is flat in rho and the canonical minimizer rho = 0 is returned.
RhoFit calibrate_rho(double h, double beta, double eta, const MarketTargets& targets,
                     bool allow_positive_rho = false);

// One grid point of a smile-distance search. ok = false marks a parameter
// vector whose pricer call failed (for Monte Carlo pricers: a thrown error);
// such points carry no error value and never win.
struct SmileGridPoint {
  std::vector<double> params;
  double error = 0.0;
  bool ok = false;
};

struct SmileGridResult {
  std::vector<double> best_params;
  double best_error = 0.0;
  std::size_t best_index = 0;
  std::vector<SmileGridPoint> surface;  // one entry per grid point, in order
};

using SmilePricer = std::function<std::vector<SmilePoint>(const std::vector<double>&)>;
using SmileMetric =
    std::function<double(std::span<const SmilePoint>, std::span<const SmilePoint>)>;

// Root-mean-square vol difference between two smiles sampled at the same
// strikes. Throws if the log-strikes disagree.
double smile_rmse(std::span<const SmilePoint> model, std::span<const SmilePoint> market);

// Evaluates pricer on every parameter vector in grid and ranks the results
// against the market smile. metric defaults to smile_rmse. Pricer failures
// are recorded as missing points rather than aborting the search; ties break
// towards the lowest grid index. Throws if the grid is empty or every point
// failed.
SmileGridResult grid_search_smile(std::span<const std::vector<double>> grid,
                                  const SmilePricer& pricer,
                                  std::span<const SmilePoint> market,
                                  const SmileMetric& metric = {});

}  // namespace gbergomi
