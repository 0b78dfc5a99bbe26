// Batch front end: simulation, pricing, bounds, asymptotic sweeps, and
// calibration, driven by a key = value config file with flag overrides.
// Exit codes: 0 success, 1 numerical failure, 2 bad input or config.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gbergomi/asymptotics.hpp"
#include "gbergomi/calibration.hpp"
#include "gbergomi/errors.hpp"
#include "gbergomi/model.hpp"
#include "gbergomi/montecarlo.hpp"
#include "gbergomi/pricing.hpp"
#include "gbergomi/specfun.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;
using namespace gbergomi;

struct CliConfig {
  // model block
  double h = 0.1;
  double beta = 1.0;
  double eta = 1.0;
  double rho = 0.0;
  double vix_spot = 0.235;
  int scenario = 0;  // 0 = flat vix_spot^2, 1..3 = the stock curves
  // mc block
  long paths = 100000;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = unset, resolved from GBERGOMI_WORKERS or 1
  bool antithetic = false;
  int truncation = 8;
  std::string engine = "cholesky";  // vix | cholesky | markovian
  int nodes = 20;
  // grid block
  int vix_points = 100;
  int steps_per_year = 312;
  // task block
  double maturity = 0.25;
  double delta = 1.0 / 12;
  int inner = 20000;          // inner samples for the lower bound
  double t_min = 1.0 / 12;    // bounds sweep
  double t_max = 1.0;
  int t_points = 4;
  std::string strikes;        // comma list; empty = engine default grid
  std::string sweep = "beta";  // asymptotics: beta | h
  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = std::numeric_limits<double>::quiet_NaN();
  int n = 0;
  double forward = 0.0;       // VIX futures level behind a market smile file
  double spx_forward = 0.0;
  std::string weights = "1,1,1";
  bool allow_positive_rho = false;
  // target block (direct calibration targets)
  double t_vix_level = 0.0;
  double t_vix_skew = 0.0;
  double t_vix_curvature = 0.0;
  double t_spx_skew = 0.0;
  double t_mkt = 0.094;
  // io block
  std::string out = ".";
  std::string vix_smile;
  std::string spx_smile;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      while (pos < item.size() && std::isspace<char>(item[pos], std::locale::classic())) ++pos;
      if (pos != item.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::invalid_argument("bad number '" + item + "' in " + what);
    }
  }
  return out;
}

// The ordered key list doubles as the reproducibility header and the schema.
std::vector<std::pair<std::string, std::string>> config_items(const CliConfig& c) {
  return {
      {"model.h", fmt(c.h)},
      {"model.beta", fmt(c.beta)},
      {"model.eta", fmt(c.eta)},
      {"model.rho", fmt(c.rho)},
      {"model.vix_spot", fmt(c.vix_spot)},
      {"model.scenario", std::to_string(c.scenario)},
      {"mc.paths", std::to_string(c.paths)},
      {"mc.seed", std::to_string(c.seed)},
      {"mc.workers", std::to_string(c.workers)},
      {"mc.antithetic", c.antithetic ? "1" : "0"},
      {"mc.truncation", std::to_string(c.truncation)},
      {"mc.engine", c.engine},
      {"mc.nodes", std::to_string(c.nodes)},
      {"grid.vix_points", std::to_string(c.vix_points)},
      {"grid.steps_per_year", std::to_string(c.steps_per_year)},
      {"task.maturity", fmt(c.maturity)},
      {"task.delta", fmt(c.delta)},
      {"task.inner", std::to_string(c.inner)},
      {"task.t_min", fmt(c.t_min)},
      {"task.t_max", fmt(c.t_max)},
      {"task.t_points", std::to_string(c.t_points)},
      {"task.strikes", c.strikes},
      {"task.sweep", c.sweep},
      {"task.lo", fmt(c.lo)},
      {"task.hi", fmt(c.hi)},
      {"task.n", std::to_string(c.n)},
      {"task.forward", fmt(c.forward)},
      {"task.spx_forward", fmt(c.spx_forward)},
      {"task.weights", c.weights},
      {"task.allow_positive_rho", c.allow_positive_rho ? "1" : "0"},
      {"target.vix_level", fmt(c.t_vix_level)},
      {"target.vix_skew", fmt(c.t_vix_skew)},
      {"target.vix_curvature", fmt(c.t_vix_curvature)},
      {"target.spx_skew", fmt(c.t_spx_skew)},
      {"target.t_mkt", fmt(c.t_mkt)},
      {"io.out", c.out},
      {"io.vix_smile", c.vix_smile},
      {"io.spx_smile", c.spx_smile},
  };
}

void apply_key(CliConfig& c, const std::string& key, const std::string& value) {
  const auto num = [&] {
    try {
      size_t pos = 0;
      const double v = std::stod(value, &pos);
      if (pos != value.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("bad value '" + value + "' for config key " + key);
    }
  };
  const auto integer = [&] {
    const double v = num();
    if (v != std::floor(v)) throw std::invalid_argument(key + " must be an integer");
    return static_cast<long>(v);
  };
  if (key == "model.h") c.h = num();
  else if (key == "model.beta") c.beta = num();
  else if (key == "model.eta") c.eta = num();
  else if (key == "model.rho") c.rho = num();
  else if (key == "model.vix_spot") c.vix_spot = num();
  else if (key == "model.scenario") c.scenario = static_cast<int>(integer());
  else if (key == "mc.paths") c.paths = integer();
  else if (key == "mc.seed") c.seed = static_cast<std::uint64_t>(integer());
  else if (key == "mc.workers") c.workers = static_cast<int>(integer());
  else if (key == "mc.antithetic") c.antithetic = integer() != 0;
  else if (key == "mc.truncation") c.truncation = static_cast<int>(integer());
  else if (key == "mc.engine") c.engine = value;
  else if (key == "mc.nodes") c.nodes = static_cast<int>(integer());
  else if (key == "grid.vix_points") c.vix_points = static_cast<int>(integer());
  else if (key == "grid.steps_per_year") c.steps_per_year = static_cast<int>(integer());
  else if (key == "task.maturity") c.maturity = num();
  else if (key == "task.delta") c.delta = num();
  else if (key == "task.inner") c.inner = static_cast<int>(integer());
  else if (key == "task.t_min") c.t_min = num();
  else if (key == "task.t_max") c.t_max = num();
  else if (key == "task.t_points") c.t_points = static_cast<int>(integer());
  else if (key == "task.strikes") c.strikes = value;
  else if (key == "task.sweep") c.sweep = value;
  else if (key == "task.lo") c.lo = num();
  else if (key == "task.hi") c.hi = num();
  else if (key == "task.n") c.n = static_cast<int>(integer());
  else if (key == "task.forward") c.forward = num();
  else if (key == "task.spx_forward") c.spx_forward = num();
  else if (key == "task.weights") c.weights = value;
  else if (key == "task.allow_positive_rho") c.allow_positive_rho = integer() != 0;
  else if (key == "target.vix_level") c.t_vix_level = num();
  else if (key == "target.vix_skew") c.t_vix_skew = num();
  else if (key == "target.vix_curvature") c.t_vix_curvature = num();
  else if (key == "target.spx_skew") c.t_spx_skew = num();
  else if (key == "target.t_mkt") c.t_mkt = num();
  else if (key == "io.out") c.out = value;
  else if (key == "io.vix_smile") c.vix_smile = value;
  else if (key == "io.spx_smile") c.spx_smile = value;
  else throw std::invalid_argument("unknown config key: " + key);
}

void load_config_file(CliConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    if (strip(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected key = value");
    apply_key(c, strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
  }
}

void resolve_workers(CliConfig& c) {
  if (c.workers > 0) return;
  if (const char* env = std::getenv("GBERGOMI_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) {
      c.workers = w;
      return;
    }
  }
  c.workers = 1;
}

GBergomiModel make_model(const CliConfig& c) {
  ModelParams p;
  p.h = c.h;
  p.beta = c.beta;
  p.eta = c.eta;
  p.rho = c.rho;
  if (c.scenario < 0 || c.scenario > 3)
    throw std::invalid_argument("model.scenario must be 0..3");
  ForwardCurve curve = c.scenario == 0 ? ForwardCurve::flat(c.vix_spot * c.vix_spot)
                                       : ForwardCurve::scenario(c.scenario);
  return GBergomiModel(p, std::move(curve));
}

McConfig make_mc(const CliConfig& c) {
  McConfig m;
  m.n_paths = c.paths;
  m.workers = c.workers;
  m.seed = c.seed;
  m.antithetic = c.antithetic;
  m.truncation_l = c.truncation;
  return m;
}

std::string model_class(double beta) {
  return beta == 1.0 ? "rBergomi-equivalent" : "gBergomi";
}

std::ofstream open_out(const CliConfig& c, const std::string& name) {
  const std::string path = c.out + "/" + name;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

void write_header(std::ostream& os, const CliConfig& c, const std::string& task) {
  os << "# gbergomi " << task << "\n";
  os << "# model_class = " << model_class(c.beta) << "\n";
  for (const auto& [k, v] : config_items(c)) os << "# " << k << " = " << v << "\n";
}

json config_json(const CliConfig& c, const std::string& task) {
  json j;
  j["task"] = task;
  j["model_class"] = model_class(c.beta);
  json cfg;
  for (const auto& [k, v] : config_items(c)) cfg[k] = v;
  j["config"] = cfg;
  return j;
}

int spot_steps(const CliConfig& c) {
  const int steps =
      static_cast<int>(std::lround(std::ceil(c.steps_per_year * c.maturity)));
  return std::max(steps, 1);
}

std::vector<double> run_engine(const CliConfig& c, const GBergomiModel& model) {
  const McConfig mc = make_mc(c);
  if (c.engine == "vix")
    return simulate_vix(model, c.maturity, c.delta, c.vix_points, mc);
  if (c.engine == "cholesky") return simulate_spot(model, c.maturity, spot_steps(c), mc);
  if (c.engine == "markovian")
    return simulate_spot_markovian(model, c.maturity, spot_steps(c), c.nodes, mc);
  throw std::invalid_argument("mc.engine must be vix, cholesky, or markovian");
}

// --- market smile ingestion -------------------------------------------------

struct MarketQuotes {
  std::vector<double> strike;
  std::vector<double> vol;
  double maturity = 0.0;
};

// strike,maturity,mid_price needs a forward to invert; strike,maturity,
// implied_vol is taken as is. One maturity per file.
MarketQuotes read_market_smile(const std::string& path, double forward) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open market file: " + path);
  std::string line;
  int lineno = 0;
  bool have_header = false;
  bool is_price = false;
  MarketQuotes q;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      if (line == "strike,maturity,mid_price") is_price = true;
      else if (line == "strike,maturity,implied_vol") is_price = false;
      else
        throw std::invalid_argument(path + ": header must be strike,maturity,mid_price or strike,maturity,implied_vol");
      have_header = true;
      continue;
    }
    const std::vector<double> row =
        parse_list(line, path + ":" + std::to_string(lineno));
    if (row.size() != 3)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected 3 columns");
    if (q.strike.empty()) {
      q.maturity = row[1];
    } else if (std::abs(row[1] - q.maturity) > 1e-9) {
      throw std::invalid_argument(path + ": mixed maturities in one smile file");
    }
    q.strike.push_back(row[0]);
    if (is_price) {
      if (!(forward > 0.0))
        throw std::invalid_argument("mid_price quotes need task.forward > 0");
      q.vol.push_back(implied_vol(row[2], 0.0, std::log(forward),
                                  std::log(row[0]), row[1]));
    } else {
      q.vol.push_back(row[2]);
    }
  }
  if (q.strike.size() < 4)
    throw std::invalid_argument(path + ": need at least 4 quotes to fit a smile");
  return q;
}

// --- subcommands ------------------------------------------------------------

void cmd_specfun(const CliConfig& c) {
  std::vector<double> betas = c.strikes.empty()
                                  ? std::vector<double>{0.5, 0.6, 0.9, 1.0}
                                  : parse_list(c.strikes, "beta list");
  std::printf("%6s %14s %14s %14s %14s %14s %14s\n", "beta", "E(-1)", "E(-2)",
              "M(0)", "M(1)", "mom(1)", "mom(2)");
  for (double b : betas) {
    // beta = 1 is a point mass at 1; the density columns have no value there.
    const double m0 = b < 1.0 ? m_wright_density(b, 0.0)
                              : std::numeric_limits<double>::quiet_NaN();
    const double m1 = b < 1.0 ? m_wright_density(b, 1.0)
                              : std::numeric_limits<double>::quiet_NaN();
    std::printf("%6.3f %14.10f %14.10f %14.10f %14.10f %14.10f %14.10f\n", b,
                mittag_leffler(b, -1.0), mittag_leffler(b, -2.0), m0, m1,
                m_wright_moment(b, 1.0), m_wright_moment(b, 2.0));
  }
  std::printf("E_1(1) = %.12f\n", mittag_leffler(1.0, 1.0));
}

void cmd_simulate(const CliConfig& c) {
  const GBergomiModel model = make_model(c);
  const std::vector<double> samples = run_engine(c, model);
  const bool spot = c.engine != "vix";
  const McResult res = price_from_samples(samples, c.engine, spot, c.seed);

  auto csv = open_out(c, "samples.csv");
  write_header(csv, c, "simulate");
  csv << "sample\n";
  for (double s : samples) csv << fmt(s) << "\n";

  json j = config_json(c, "simulate");
  j["engine"] = c.engine;
  j["mean"] = res.mean;
  j["se"] = res.se;
  j["n_paths"] = res.n_paths;
  j["seed"] = res.seed;
  j["martingale_exact"] = res.martingale_exact;
  auto out = open_out(c, "result.json");
  out << j.dump(2) << "\n";
}

void cmd_price(const CliConfig& c) {
  const GBergomiModel model = make_model(c);
  const std::vector<double> samples = run_engine(c, model);
  const bool vix = c.engine == "vix";
  double forward = 1.0;  // the spot engines are exactly martingale
  if (vix) forward = price_from_samples(samples, c.engine, false, c.seed).mean;

  std::vector<double> strikes;
  if (!c.strikes.empty()) {
    strikes = parse_list(c.strikes, "task.strikes");
  } else if (vix) {
    for (double m : {0.7, 0.8, 0.9, 1.0, 1.1, 1.25, 1.5}) strikes.push_back(m * forward);
  } else {
    strikes = {0.8, 0.85, 0.9, 0.95, 1.0, 1.05, 1.1, 1.15, 1.2};
  }

  const std::vector<SmilePoint> smile =
      smile_from_samples(samples, forward, c.maturity, strikes);
  // VIX smiles are displayed and fitted against strike, spot ones in log.
  const SmileCoord coord = vix ? SmileCoord::strike : SmileCoord::log_strike;
  std::vector<double> u(strikes.size()), vol(strikes.size());
  for (size_t i = 0; i < strikes.size(); ++i) {
    u[i] = vix ? strikes[i] : smile[i].log_strike;
    vol[i] = smile[i].vol;
  }
  const SmileFit fit = fit_arctan_smile(u, vol, coord);
  const AtmMetrics atm = atm_metrics(fit, forward);

  auto csv = open_out(c, "smile.csv");
  write_header(csv, c, "price");
  csv << "# forward = " << fmt(forward) << "\n";
  csv << "strike,log_strike,price,implied_vol,fit_vol\n";
  const long n = static_cast<long>(samples.size());
  for (size_t i = 0; i < strikes.size(); ++i) {
    double pay = 0.0;
    for (double s : samples) pay += std::max(s - strikes[i], 0.0);
    const double uu = vix ? strikes[i] : smile[i].log_strike;
    csv << fmt(strikes[i]) << "," << fmt(smile[i].log_strike) << ","
        << fmt(pay / n) << "," << fmt(smile[i].vol) << ","
        << fmt(fit.a * std::atan(fit.b * uu + fit.c) + fit.d) << "\n";
  }

  json j = config_json(c, "price");
  j["forward"] = forward;
  j["forward_source"] = vix ? "mc_futures" : "martingale";
  j["fit"] = {{"a", fit.a},
              {"b", fit.b},
              {"c", fit.c},
              {"d", fit.d},
              {"residual", fit.residual},
              {"coord", vix ? "strike" : "log_strike"},
              {"positive_on_range", fit.positive_on_range}};
  j["atm"] = {{"level", atm.level},
              {"skew", atm.skew},
              {"curvature", atm.curvature},
              {"skew_log", atm.skew_log},
              {"curvature_log", atm.curvature_log}};
  auto out = open_out(c, "smile.json");
  out << j.dump(2) << "\n";
}

void cmd_bounds(const CliConfig& c) {
  if (c.t_points < 1) throw std::invalid_argument("task.t_points must be positive");
  if (!(c.t_min >= 0.0) || c.t_max < c.t_min)
    throw std::invalid_argument("bounds need 0 <= task.t_min <= task.t_max");
  const GBergomiModel model = make_model(c);
  const McConfig mc = make_mc(c);

  auto csv = open_out(c, "bounds.csv");
  write_header(csv, c, "bounds");
  csv << "maturity,lower,lower_se,upper,mc,mc_se\n";
  for (int i = 0; i < c.t_points; ++i) {
    const double T = c.t_points == 1
                         ? c.t_min
                         : c.t_min + (c.t_max - c.t_min) * i / (c.t_points - 1);
    const VixBounds vb = model.vix_bounds(T, c.delta, c.inner, c.seed);
    const std::vector<double> samples =
        simulate_vix(model, T, c.delta, c.vix_points, mc);
    const McResult res = price_from_samples(samples, "vix", false, mc.seed);
    csv << fmt(T) << "," << fmt(vb.lower) << "," << fmt(vb.lower_se) << ","
        << fmt(vb.upper) << "," << fmt(res.mean) << "," << fmt(res.se) << "\n";
  }
}

void cmd_asymptotics(const CliConfig& c) {
  double lo = c.lo, hi = c.hi;
  int n = c.n;
  const bool sweep_h = c.sweep == "h";
  if (!sweep_h && c.sweep != "beta")
    throw std::invalid_argument("task.sweep must be beta or h");
  if (std::isnan(lo)) lo = sweep_h ? 0.02 : 0.05;
  if (std::isnan(hi)) hi = sweep_h ? 0.16 : 1.0;
  if (n < 1) n = sweep_h ? 15 : 20;
  if (sweep_h && !(hi < 1.0 / 6))
    throw std::invalid_argument("h sweep must stay below 1/6 for the curvature limit");

  auto csv = open_out(c, "asymptotics.csv");
  write_header(csv, c, "asymptotics");
  csv << "sweep,value,h,beta,eta,vix_level,vix_skew,vix_curvature_scaled,"
         "spx_level,spx_skew_scaled,ssr\n";
  for (int i = 0; i < n; ++i) {
    const double v = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    AsymptoticInputs a;
    a.xi0_flat = c.vix_spot * c.vix_spot;
    a.h = sweep_h ? v : c.h;
    a.beta = sweep_h ? c.beta : v;
    a.eta = c.eta;
    a.delta = c.delta;
    a.t_mkt = c.t_mkt;
    csv << c.sweep << "," << fmt(v) << "," << fmt(a.h) << "," << fmt(a.beta)
        << "," << fmt(a.eta) << "," << fmt(vix_atm_level_limit(a)) << ","
        << fmt(vix_atm_skew_limit(a)) << ","
        << fmt(vix_atm_curvature_scaled_limit(a)) << ","
        << fmt(spx_atm_level_limit(a)) << ","
        << fmt(spx_skew_scaled_limit(a, c.rho)) << "," << fmt(a.h + 1.5) << "\n";
  }
}

void cmd_calibrate(const CliConfig& c) {
  MarketTargets t;
  t.t_mkt = c.t_mkt;
  t.vix_spot = c.vix_spot;
  json market;
  MarketQuotes vq;
  const bool from_files = !c.vix_smile.empty();
  if (from_files) {
    vq = read_market_smile(c.vix_smile, c.forward);
    if (!(c.forward > 0.0))
      throw std::invalid_argument("market smiles need task.forward (VIX futures level)");
    const SmileFit fit = fit_arctan_smile(vq.strike, vq.vol, SmileCoord::strike);
    const AtmMetrics atm = atm_metrics(fit, c.forward);
    t.vix_level = atm.level;
    t.vix_skew = atm.skew_log;
    t.vix_curvature = atm.curvature_log;
    t.t_mkt = vq.maturity;
    market["vix_fit"] = {{"a", fit.a}, {"b", fit.b}, {"c", fit.c},
                         {"d", fit.d}, {"residual", fit.residual}};
    if (!c.spx_smile.empty()) {
      if (!(c.spx_forward > 0.0))
        throw std::invalid_argument("an SPX smile needs task.spx_forward");
      const MarketQuotes sq = read_market_smile(c.spx_smile, c.spx_forward);
      const SmileFit sfit = fit_arctan_smile(sq.strike, sq.vol, SmileCoord::strike);
      t.spx_skew = atm_metrics(sfit, c.spx_forward).skew_log;
      market["spx_fit"] = {{"a", sfit.a}, {"b", sfit.b}, {"c", sfit.c},
                           {"d", sfit.d}, {"residual", sfit.residual}};
    }
  } else {
    t.vix_level = c.t_vix_level;
    t.vix_skew = c.t_vix_skew;
    t.vix_curvature = c.t_vix_curvature;
    t.spx_skew = c.t_spx_skew;
  }

  SearchSpec spec;
  spec.weights = parse_list(c.weights, "task.weights");
  const CalibrationResult res = calibrate_vix(t, spec);
  const RhoFit rho = calibrate_rho(res.h, res.beta, res.eta, t, c.allow_positive_rho);

  json j = config_json(c, "calibrate");
  j["targets"] = {{"vix_level", t.vix_level},
                  {"vix_skew", t.vix_skew},
                  {"vix_curvature", t.vix_curvature},
                  {"spx_skew", t.spx_skew},
                  {"t_mkt", t.t_mkt},
                  {"vix_spot", t.vix_spot}};
  j["result"] = {{"h", res.h},
                 {"beta", res.beta},
                 {"eta", res.eta},
                 {"rho", rho.rho},
                 {"objective", res.objective},
                 {"resid_level", res.resid_level},
                 {"resid_skew", res.resid_skew},
                 {"resid_curvature", res.resid_curvature},
                 {"rho_residual", rho.residual},
                 {"grid_objective", res.grid_objective},
                 {"evaluations", res.evaluations},
                 {"converged", res.converged},
                 {"note", res.note}};
  j["result"]["model_class"] = model_class(res.beta);
  if (!market.empty()) j["market"] = market;
  auto out = open_out(c, "calibration.json");
  out << j.dump(2) << "\n";

  if (from_files) {
    // Market quotes next to the smoothed curve they were fitted with.
    const SmileFit fit = fit_arctan_smile(vq.strike, vq.vol, SmileCoord::strike);
    auto csv = open_out(c, "calibration_smile.csv");
    write_header(csv, c, "calibrate");
    csv << "strike,market_vol,fit_vol\n";
    for (size_t i = 0; i < vq.strike.size(); ++i)
      csv << fmt(vq.strike[i]) << "," << fmt(vq.vol[i]) << ","
          << fmt(fit.a * std::atan(fit.b * vq.strike[i] + fit.c) + fit.d) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CliConfig cfg;
  try {
    // The config file seeds the defaults, flags override.
    for (int i = 1; i < argc; ++i) {
      const std::string arg = argv[i];
      if (arg == "--config" && i + 1 < argc) load_config_file(cfg, argv[i + 1]);
      else if (arg.rfind("--config=", 0) == 0) load_config_file(cfg, arg.substr(9));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  CLI::App app{"grey Bergomi model toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key = value config file");

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value config file");
    sub->add_option("--model.h", cfg.h);
    sub->add_option("--model.beta", cfg.beta);
    sub->add_option("--model.eta", cfg.eta);
    sub->add_option("--model.rho", cfg.rho);
    sub->add_option("--model.vix_spot", cfg.vix_spot);
    sub->add_option("--model.scenario", cfg.scenario);
    sub->add_option("--mc.paths", cfg.paths);
    sub->add_option("--mc.seed", cfg.seed);
    sub->add_option("--mc.workers", cfg.workers);
    sub->add_option("--mc.antithetic", cfg.antithetic);
    sub->add_option("--mc.truncation", cfg.truncation);
    sub->add_option("--mc.engine", cfg.engine);
    sub->add_option("--mc.nodes", cfg.nodes);
    sub->add_option("--grid.vix_points", cfg.vix_points);
    sub->add_option("--grid.steps_per_year", cfg.steps_per_year);
    sub->add_option("--task.maturity", cfg.maturity);
    sub->add_option("--task.delta", cfg.delta);
    sub->add_option("--task.inner", cfg.inner);
    sub->add_option("--task.t_min", cfg.t_min);
    sub->add_option("--task.t_max", cfg.t_max);
    sub->add_option("--task.t_points", cfg.t_points);
    sub->add_option("--task.strikes", cfg.strikes);
    sub->add_option("--task.sweep", cfg.sweep);
    sub->add_option("--task.lo", cfg.lo);
    sub->add_option("--task.hi", cfg.hi);
    sub->add_option("--task.n", cfg.n);
    sub->add_option("--task.forward", cfg.forward);
    sub->add_option("--task.spx_forward", cfg.spx_forward);
    sub->add_option("--task.weights", cfg.weights);
    sub->add_option("--task.allow_positive_rho", cfg.allow_positive_rho);
    sub->add_option("--target.vix_level", cfg.t_vix_level);
    sub->add_option("--target.vix_skew", cfg.t_vix_skew);
    sub->add_option("--target.vix_curvature", cfg.t_vix_curvature);
    sub->add_option("--target.spx_skew", cfg.t_spx_skew);
    sub->add_option("--target.t_mkt", cfg.t_mkt);
    sub->add_option("--io.out", cfg.out);
    sub->add_option("--io.vix_smile", cfg.vix_smile);
    sub->add_option("--io.spx_smile", cfg.spx_smile);
  };
  CLI::App* specfun = app.add_subcommand("specfun", "special function probe table");
  CLI::App* simulate = app.add_subcommand("simulate", "draw VIX or spot samples");
  CLI::App* price = app.add_subcommand("price", "Monte Carlo smile plus arctan fit");
  CLI::App* bounds = app.add_subcommand("bounds", "futures bounds over a maturity grid");
  CLI::App* asym = app.add_subcommand("asymptotics", "short-maturity limit sweeps");
  CLI::App* calibrate = app.add_subcommand("calibrate", "two-stage joint calibration");
  for (CLI::App* sub : {specfun, simulate, price, bounds, asym, calibrate})
    add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  try {
    resolve_workers(cfg);
    if (specfun->parsed()) cmd_specfun(cfg);
    else if (simulate->parsed()) cmd_simulate(cfg);
    else if (price->parsed()) cmd_price(cfg);
    else if (bounds->parsed()) cmd_bounds(cfg);
    else if (asym->parsed()) cmd_asymptotics(cfg);
    else if (calibrate->parsed()) cmd_calibrate(cfg);
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failed: %s\n", e.what());
    return 1;
  }
  return 0;
}
