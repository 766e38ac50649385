#include "hswift/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <thread>

#include "hswift/errors.hpp"
#include "hswift/fixtures.hpp"

namespace hswift {

using nlohmann::json;

namespace {

constexpr const char* kParamNames[kNumParams] = {"v0", "v_bar", "sigma", "kappa", "rho"};

json params_json(const HestonParams& t) {
  return {{"kappa", t.kappa}, {"v_bar", t.v_bar}, {"sigma", t.sigma}, {"rho", t.rho}, {"v0", t.v0}};
}

json context_json(const MarketContext& c) {
  return {{"spot", c.spot}, {"rate", c.rate}, {"dividend", c.dividend}};
}

json config_json(const CalibrationConfig& c) {
  return {{"eps1", c.eps1}, {"eps2", c.eps2}, {"eps3", c.eps3},
          {"max_iterations", c.max_iterations}, {"mu0", c.mu0}};
}

json swift_json(const SwiftSettings& s) {
  json j = {{"scale_tol", s.scale_tol}, {"L", s.L}};
  j["m"] = s.m ? json(*s.m) : json(nullptr);
  j["eta"] = s.eta ? json(*s.eta) : json(nullptr);
  j["j"] = s.j ? json(*s.j) : json(nullptr);
  return j;
}

std::string cell(const json& v) {
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "-";
  return v.dump();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

json ExperimentReport::to_json() const {
  return {{"experiment", experiment}, {"columns", columns}, {"rows", rows}, {"metadata", metadata}};
}

std::string ExperimentReport::to_table() const {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> width(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) width[c] = columns[c].size();
  for (const json& row : rows) {
    std::vector<std::string> line;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      line.push_back(row.contains(columns[c]) ? cell(row.at(columns[c])) : "-");
      width[c] = std::max(width[c], line.back().size());
    }
    cells.push_back(std::move(line));
  }
  std::ostringstream out;
  out << "# " << experiment << "\n";
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      out << (c ? "  " : "");
      out << std::string(width[c] - line[c].size(), ' ') << line[c];
    }
    out << "\n";
  };
  if (!columns.empty()) emit(columns);
  for (const auto& line : cells) emit(line);
  for (const auto& [key, value] : metadata.items()) out << "# " << key << ": " << cell(value) << "\n";
  return out.str();
}

std::unique_ptr<PricingBackend> BackendConfig::make() const {
  return make_backend(name, swift, quadrature, form);
}

json BackendConfig::describe() const {
  json j = {{"backend", name}};
  if (name == "cp") {
    j["nodes"] = quadrature.nodes;
    j["u_max"] = quadrature.u_max;
    j["chf_form"] = to_string(form);
  } else {
    j["swift"] = swift_json(swift);
  }
  return j;
}

ExperimentReport run_price(const HestonParams& theta, const QuoteFile& file,
                           const BackendConfig& backend) {
  ExperimentReport report;
  report.experiment = "price";
  report.columns = {"maturity", "strike", "kind", "price"};
  const auto t0 = std::chrono::steady_clock::now();
  if (!file.quotes.empty()) {
    const auto be = backend.make();
    QuoteSetPricer pricer(*be, file.quotes, file.context, theta);
    Eigen::VectorXd prices;
    pricer.evaluate(theta, prices, nullptr);
    bool observed = false;
    for (std::size_t i = 0; i < file.quotes.size(); ++i) {
      const OptionQuote& q = file.quotes[i];
      json row = {{"maturity", q.maturity}, {"strike", q.strike}, {"kind", to_string(q.kind)},
                  {"price", prices[static_cast<Eigen::Index>(i)]}};
      if (q.price) {
        row["observed"] = *q.price;
        row["diff"] = prices[static_cast<Eigen::Index>(i)] - *q.price;
        observed = true;
      }
      report.rows.push_back(row);
    }
    if (observed) {
      report.columns.push_back("observed");
      report.columns.push_back("diff");
    }
    report.metadata["groups"] = pricer.describe();
  }
  report.metadata["wall_time"] = seconds_since(t0);
  report.metadata["backend"] = backend.describe();
  report.metadata["params"] = params_json(theta);
  report.metadata["context"] = context_json(file.context);
  return report;
}

std::vector<OptionQuote> GridSpec::quotes(const MarketContext& ctx) const {
  if (m < 0 || m > 20) throw InvalidInput("grid: m must be in [0, 20]");
  if (j_d <= 0) throw InvalidInput("grid: J_d must be positive");
  if (!(maturity > 0.0)) throw InvalidInput("grid: maturity must be positive");
  std::vector<OptionQuote> out;
  const double step = std::ldexp(1.0, -(m + 1));
  for (int k = 0; k < j_d; ++k) {
    OptionQuote q;
    const double x = (2.0 * k - j_d) * step;
    q.strike = ctx.spot * std::exp(-x);
    q.maturity = maturity;
    out.push_back(q);
  }
  return out;
}

QuoteFile generate_quotes(const HestonParams& theta, const MarketContext& ctx,
                          std::vector<OptionQuote> quotes, const GenerateOptions& options) {
  theta.validate();
  ctx.validate();
  if (!(options.noise >= 0.0)) throw InvalidInput("noise must be nonnegative");
  QuoteFile file;
  file.context = ctx;
  for (auto& q : quotes) q.price.reset();
  if (!quotes.empty()) {
    KSwiftBackend backend(options.swift);
    QuoteSetPricer pricer(backend, quotes, ctx, theta);
    Eigen::VectorXd prices;
    pricer.evaluate(theta, prices, nullptr);
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < quotes.size(); ++i) {
      double p = prices[static_cast<Eigen::Index>(i)];
      if (options.noise > 0.0) p += options.noise * normal(rng);
      quotes[i].price = std::max(p, 0.0);
    }
  }
  file.quotes = std::move(quotes);
  file.validate();
  return file;
}

ExperimentReport run_calibrate(const QuoteFile& file, const HestonParams& theta0,
                               const CalibrationConfig& config, const BackendConfig& backend) {
  const auto be = backend.make();
  const CalibrationResult res = calibrate(file.quotes, theta0, file.context, config, *be);
  ExperimentReport report;
  report.experiment = "calibrate";
  report.columns = {"iteration", "objective", "mu", "step_norm"};
  for (std::size_t i = 0; i < res.trace.size(); ++i)
    report.rows.push_back({{"iteration", static_cast<int>(i + 1)},
                           {"objective", res.trace[i].objective},
                           {"mu", res.trace[i].mu},
                           {"step_norm", res.trace[i].step_norm}});
  QuoteSetPricer pricer(*be, file.quotes, file.context, theta0);
  const Eigen::VectorXd r = residuals(res.theta_hat, pricer);
  report.metadata["stop_reason"] = to_string(res.stop_reason);
  report.metadata["iterations"] = res.iterations;
  report.metadata["final_objective"] = res.final_objective;
  report.metadata["max_abs_residual"] = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
  report.metadata["wall_time"] = res.wall_time;
  report.metadata["evaluations"] = res.evaluations;
  report.metadata["theta_hat"] = params_json(res.theta_hat);
  report.metadata["theta0"] = params_json(theta0);
  report.metadata["config"] = config_json(config);
  report.metadata["backend"] = backend.describe();
  report.metadata["context"] = context_json(file.context);
  report.metadata["quotes"] = file.quotes.size();
  return report;
}

SpeedSet parse_speed_set(const std::string& name) {
  if (name == "set1" || name == "1") return SpeedSet::set1;
  if (name == "set2" || name == "2") return SpeedSet::set2;
  if (name == "set3" || name == "3") return SpeedSet::set3;
  throw InvalidInput("unknown set '" + name + "' (expected set1, set2 or set3)");
}

const char* to_string(SpeedSet set) {
  switch (set) {
    case SpeedSet::set1: return "set1";
    case SpeedSet::set2: return "set2";
    case SpeedSet::set3: return "set3";
  }
  return "?";
}

ExperimentReport run_speed(const SpeedOptions& options) {
  if (options.reps <= 0 || options.naive_reps < 0) throw InvalidInput("reps must be positive");
  const MarketContext ctx = fixtures::set_market();
  const HestonParams target = fixtures::theta_target();
  const HestonParams start = fixtures::theta_target_start();
  const std::string set_name = options.set == SpeedSet::set1 ? "set1" : "set2";
  const QuoteFile file = generate_quotes(target, ctx, fixtures::strike_set(set_name));

  struct Entry {
    BackendConfig backend;
    int reps;
  };
  std::vector<Entry> entries;
  const std::string fast = options.set == SpeedSet::set3 ? "kswift-per-quote" : "kswift";
  entries.push_back({{fast, options.swift, options.quadrature, ChfForm::cui}, options.reps});
  entries.push_back({{"cp", options.swift, options.quadrature, ChfForm::cui}, options.reps});
  if (options.naive_reps > 0)
    entries.push_back({{"swift", options.swift, options.quadrature, ChfForm::cui},
                       options.naive_reps});

  ExperimentReport report;
  report.experiment = "speed";
  report.columns = {"backend", "reps", "mean_time", "iterations", "final_objective", "stop_reason"};
  double kswift_time = 0.0;
  for (const Entry& e : entries) {
    const auto be = e.backend.make();
    double total = 0.0;
    CalibrationResult last;
    for (int rep = 0; rep < e.reps; ++rep) {
      last = calibrate(file.quotes, start, ctx, options.config, *be);
      total += last.wall_time;
    }
    const double mean = total / e.reps;
    if (&e == &entries.front()) kswift_time = mean;
    report.rows.push_back({{"backend", e.backend.name},
                           {"reps", e.reps},
                           {"mean_time", mean},
                           {"iterations", last.iterations},
                           {"final_objective", last.final_objective},
                           {"stop_reason", to_string(last.stop_reason)},
                           {"config", e.backend.describe()}});
  }
  for (json& row : report.rows) row["ratio_to_kswift"] = row["mean_time"].get<double>() / kswift_time;
  report.columns.push_back("ratio_to_kswift");
  report.metadata["set"] = to_string(options.set);
  report.metadata["start"] = params_json(start);
  report.metadata["target"] = params_json(target);
  report.metadata["config"] = config_json(options.config);
  report.metadata["context"] = context_json(ctx);
  report.metadata["timing"] = "monotonic wall time of the calibrate call, mean over reps";
  return report;
}

ExperimentReport run_converge(const ConvergeOptions& options) {
  if (options.trials <= 0) throw InvalidInput("trials must be positive");
  if (!(options.spread >= 0.0 && options.spread < 1.0)) throw InvalidInput("spread must be in [0, 1)");
  if (options.target != "fx" && options.target != "ir" && options.target != "eq")
    throw InvalidInput("unknown target '" + options.target + "' (expected fx, ir or eq)");
  const HestonParams target = fixtures::theta_by_name(options.target);
  const MarketContext ctx = fixtures::set_market();
  const QuoteFile file = generate_quotes(target, ctx, fixtures::strike_set("set2"));

  // Starts are drawn up front so the report does not depend on scheduling.
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const ParamVector tv = target.to_vector();
  std::vector<HestonParams> starts;
  for (int t = 0; t < options.trials; ++t) {
    ParamVector v;
    for (int p = 0; p < kNumParams; ++p) v[p] = tv[p] * (1.0 + options.spread * unit(rng));
    starts.push_back(options.config.bounds.project(HestonParams::from_vector(v)));
  }

  const auto backend = options.backend.make();
  std::vector<CalibrationResult> results(starts.size());
  std::vector<std::string> failures(starts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < starts.size();) {
      try {
        results[i] = calibrate(file.quotes, starts[i], ctx, options.config, *backend);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const auto t0 = std::chrono::steady_clock::now();
  unsigned threads = options.threads > 0 ? static_cast<unsigned>(options.threads)
                                         : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(starts.size()));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  const double total = seconds_since(t0);

  ExperimentReport report;
  report.experiment = "converge";
  report.columns = {"trial", "stop_reason", "iterations", "final_objective", "time"};
  for (const char* name : kParamNames) report.columns.push_back(std::string("err_") + name);
  ParamVector sum_err{};
  double sum_it = 0, sum_time = 0, sum_obj = 0;
  int ok = 0, done = 0;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    json row = {{"trial", static_cast<int>(i)}, {"start", params_json(starts[i])}};
    if (!failures[i].empty()) {
      row["stop_reason"] = "error";
      row["error"] = failures[i];
      report.rows.push_back(row);
      continue;
    }
    const CalibrationResult& r = results[i];
    const ParamVector hv = r.theta_hat.to_vector();
    row["stop_reason"] = to_string(r.stop_reason);
    row["iterations"] = r.iterations;
    row["final_objective"] = r.final_objective;
    row["time"] = r.wall_time;
    for (int p = 0; p < kNumParams; ++p) {
      const double err = std::abs(hv[p] - tv[p]);
      row[std::string("err_") + kParamNames[p]] = err;
      sum_err[p] += err;
    }
    ++done;
    ok += r.stop_reason == StopReason::ResidualTol;
    sum_it += r.iterations;
    sum_time += r.wall_time;
    sum_obj += r.final_objective;
    report.rows.push_back(row);
  }
  const double n = std::max(done, 1);
  json mean_err;
  for (int p = 0; p < kNumParams; ++p) mean_err[kParamNames[p]] = sum_err[p] / n;
  report.metadata["target_name"] = options.target;
  report.metadata["target"] = params_json(target);
  report.metadata["trials"] = options.trials;
  report.metadata["seed"] = options.seed;
  report.metadata["spread"] = options.spread;
  report.metadata["threads"] = threads;
  report.metadata["errors"] = options.trials - done;
  report.metadata["residual_tol_fraction"] = static_cast<double>(ok) / options.trials;
  report.metadata["mean_abs_error"] = mean_err;
  report.metadata["mean_iterations"] = sum_it / n;
  report.metadata["mean_time"] = sum_time / n;
  report.metadata["mean_objective"] = sum_obj / n;
  report.metadata["total_time"] = total;
  report.metadata["config"] = config_json(options.config);
  report.metadata["backend"] = options.backend.describe();
  report.metadata["context"] = context_json(ctx);
  report.metadata["quotes"] = "set2 maturities and strikes (the original maturities are unpublished)";
  return report;
}

ConvergeSummary converge_summary(const ExperimentReport& report) {
  const json& m = report.metadata;
  ConvergeSummary s;
  for (int p = 0; p < kNumParams; ++p)
    s.mean_abs_error[p] = m.at("mean_abs_error").at(kParamNames[p]).get<double>();
  s.residual_tol_fraction = m.at("residual_tol_fraction").get<double>();
  s.mean_iterations = m.at("mean_iterations").get<double>();
  s.mean_time = m.at("mean_time").get<double>();
  s.mean_objective = m.at("mean_objective").get<double>();
  s.total_time = m.at("total_time").get<double>();
  return s;
}

ExperimentReport run_stress(const StressOptions& options) {
  const MarketContext ctx = fixtures::stress_market(options.rate);
  const HestonParams theta = fixtures::theta_stress();
  const std::vector<OptionQuote> quotes = fixtures::stress_quotes();
  const std::vector<double> targets = fixtures::stress_targets();

  ExperimentReport report;
  report.experiment = "stress";
  report.columns = {"maturity", "strike", "published", "swift", "m", "cp", "u_max"};
  for (std::size_t i = 0; i < quotes.size(); ++i) {
    const OptionQuote& q = quotes[i];
    const bool long_end = q.maturity > 1.0;
    SwiftSettings s;
    s.m = long_end ? options.m_long : options.m_short;
    const std::vector<double> strikes{q.strike};
    const SwiftParams sp = choose_swift_params(theta, q.maturity, ctx, strikes, s);
    const QuadratureConfig qc{64, long_end ? options.u_max_long : options.u_max_short};
    report.rows.push_back({{"maturity", q.maturity},
                           {"strike", q.strike},
                           {"published", targets[i]},
                           {"swift", price_single(theta, ctx, q, sp)},
                           {"m", sp.m},
                           {"cp", price_cp(theta, ctx, q, qc, options.form)},
                           {"u_max", qc.u_max}});
  }
  json sweep = json::array();
  OptionQuote deep;
  deep.strike = 200.0;
  deep.maturity = 0.04;
  for (double u : options.u_sweep)
    sweep.push_back({{"u_max", u}, {"cp", price_cp(theta, ctx, deep, {64, u}, options.form)}});
  report.metadata["cp_sweep_K200_tau0.04"] = sweep;
  report.metadata["params"] = params_json(theta);
  report.metadata["context"] = context_json(ctx);
  report.metadata["chf_form"] = to_string(options.form);
  return report;
}

}  // namespace hswift
