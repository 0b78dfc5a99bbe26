#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gbergomi/model.hpp"

namespace gbergomi {

struct McConfig {
  long n_paths = 100000;
  int workers = 1;          // 1 runs the plain serial reference loop
  std::uint64_t seed = 1;
  bool antithetic = false;  // pairs share Y, odd paths negate every gaussian
  int truncation_l = 8;     // exact Cholesky head length in the VIX engine
};

struct McResult {
  double mean = 0.0;
  double se = 0.0;
  std::string engine;
  bool martingale_exact = false;
  std::uint64_t seed = 0;
  long n_paths = 0;
};

// Runs body(p) for p in [0, n). workers == 1 is a plain loop; more workers
// use an OpenMP static schedule. Bodies write disjoint slots only, so results
// are bitwise identical across worker counts. Exceptions are captured and
// rethrown on the calling thread.
void run_paths(long n, int workers, const std::function<void(long)>& body);

// Per-path VIX_T samples on a trapezoid grid of n_intervals over
// [T, T + delta]. The forward Volterra layer is drawn exactly on the first
// truncation_l + 1 nodes and extended by the one-step conditional recursion
// beyond. T = 0 needs no randomness at all.
std::vector<double> simulate_vix(const GBergomiModel& model, double T,
                                 double delta, int n_intervals,
                                 const McConfig& cfg);

// Terminal spot samples S_T (initial value 1) from the exact joint Gaussian
// layer: Volterra levels and driving increments drawn in one Cholesky pass,
// then a log-Euler scheme whose discrete expectation is exactly 1.
std::vector<double> simulate_spot(const GBergomiModel& model, double T,
                                  int n_steps, const McConfig& cfg);

// Multi-factor Markovian lift of the kernel.
struct MarkovianNodes {
  std::vector<double> x;  // mean-reversion rates
  std::vector<double> w;  // weights
  double sup_rel_error = 0.0;  // of sum w e^{-xt} against the kernel on [t_lo, t_hi]
};

// Moment-matched nodes on a geometric partition of the kernel's spectral
// measure. h = 1/2 is the degenerate single-node case.
MarkovianNodes markovian_nodes(double h, int n, double t_lo, double t_hi);

// Terminal spot samples from the n_factors OU approximation of the Volterra
// layer; same log-Euler spot scheme as simulate_spot.
std::vector<double> simulate_spot_markovian(const GBergomiModel& model, double T,
                                            int n_steps, int n_factors,
                                            const McConfig& cfg);

// Mean and standard error of a payoff sample, stamped with provenance.
McResult price_from_samples(std::span<const double> samples,
                            const std::string& engine, bool martingale_exact,
                            std::uint64_t seed);

}  // namespace gbergomi
