// hswift: price, generate, calibrate and the timing/convergence experiments.
//
// Exit codes: 0 ok, 2 bad input, 3 numerical failure, 4 calibration stopped
// short of the residual tolerance (unless --allow-partial).
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hswift/errors.hpp"
#include "hswift/experiments.hpp"
#include "hswift/fixtures.hpp"

namespace fs = std::filesystem;
using namespace hswift;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitPartial = 4;

struct BackendFlags {
  std::string backend = "kswift";
  std::optional<int> m, eta, j;
  std::optional<double> L, scale_tol;
  double u_max = 200.0;
  int nodes = 64;
  std::string chf_form = "cui";

  void add(CLI::App* app, bool with_backend = true) {
    if (with_backend)
      app->add_option("--backend", backend, "swift, kswift, kswift-per-quote or cp")
          ->capture_default_str();
    app->add_option("--m", m, "SWIFT scale (default: chosen from the tail mass)");
    app->add_option("--eta", eta, "SWIFT coefficient half-count override");
    app->add_option("--j", j, "SWIFT cosine terms override (power of two)");
    app->add_option("--L", L, "SWIFT truncation width in standard deviations");
    app->add_option("--scale-tol", scale_tol, "tail mass tolerance for choosing m");
    app->add_option("--u-max", u_max, "CP upper integration limit")->capture_default_str();
    app->add_option("--nodes", nodes, "CP Gauss-Legendre nodes")->capture_default_str();
    app->add_option("--chf-form", chf_form, "cui or schoutens (CP only)")->capture_default_str();
  }

  SwiftSettings swift() const {
    SwiftSettings s;
    s.m = m;
    s.eta = eta;
    s.j = j;
    if (L) s.L = *L;
    if (scale_tol) s.scale_tol = *scale_tol;
    return s;
  }

  BackendConfig config() const {
    BackendConfig c;
    c.name = backend;
    c.swift = swift();
    c.quadrature = QuadratureConfig{nodes, u_max};
    c.quadrature.validate();
    c.form = parse_chf_form(chf_form);
    return c;
  }
};

struct OutputFlags {
  bool json = false;
  std::string out;

  void add(CLI::App* app) {
    app->add_flag("--json", json, "print the report as JSON instead of a table");
    app->add_option("--out", out, "also write the JSON report to this path");
  }

  void emit(const ExperimentReport& report) const {
    if (json)
      std::cout << report.to_json().dump(2) << "\n";
    else
      std::cout << report.to_table();
    if (!out.empty()) {
      std::ofstream f(out);
      if (!f) throw InvalidInput("cannot write '" + out + "'");
      f << report.to_json().dump(2) << "\n";
    }
  }
};

std::string fixture_dir() {
  const char* env = std::getenv("HSWIFT_FIXTURES");
  return env ? env : "";
}

// An existing path wins; otherwise a bare name is looked up in the fixture
// directory, then among the embedded tables.
std::optional<std::string> find_file(const std::string& arg, const std::string& prefix,
                                     const std::string& suffix) {
  if (fs::exists(arg)) return arg;
  const std::string dir = fixture_dir();
  if (!dir.empty())
    for (const std::string& name : {arg, prefix + arg + suffix})
      if (fs::exists(fs::path(dir) / name)) return (fs::path(dir) / name).string();
  return std::nullopt;
}

HestonParams load_params(const std::string& arg) {
  if (auto path = find_file(arg, "theta_", ".txt")) return read_params_file(*path);
  try {
    return fixtures::theta_by_name(arg);
  } catch (const InvalidInput&) {
    throw InvalidInput("'" + arg + "' is neither a parameter file nor a fixture name");
  }
}

QuoteFile load_quotes(const std::string& arg) {
  if (auto path = find_file(arg, "", ".csv")) return read_quote_file(*path);
  if (arg == "set1" || arg == "set2") return QuoteFile{fixtures::set_market(), fixtures::strike_set(arg)};
  if (arg == "stress") return QuoteFile{fixtures::stress_market(), fixtures::stress_quotes()};
  throw InvalidInput("'" + arg + "' is neither a quote file nor a fixture name");
}

void apply_rate(QuoteFile& file, const std::optional<double>& rate) {
  if (rate) file.context.rate = *rate;
  file.context.validate();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heston pricing with Shannon wavelets, and calibration"};
  app.require_subcommand(1);

  // price
  auto* price = app.add_subcommand("price", "price every quote in a file");
  std::string price_params, price_quotes;
  std::optional<double> price_rate;
  BackendFlags price_backend;
  OutputFlags price_out;
  price->add_option("--params", price_params, "parameter file or fixture name")->required();
  price->add_option("--quotes", price_quotes, "quote file or fixture name")->required();
  price->add_option("--rate", price_rate, "override the file's interest rate");
  price_backend.add(price);
  price_out.add(price);

  // generate
  auto* gen = app.add_subcommand("generate", "synthetic quotes priced with multi-strike SWIFT");
  std::string gen_params, gen_set;
  std::optional<double> gen_rate;
  int grid_m = 5, grid_j = 256;
  std::optional<double> grid_tau;
  double gen_spot = 1.0, gen_noise = 0.0;
  std::uint64_t gen_seed = 1;
  std::string gen_format = "text", gen_path;
  BackendFlags gen_backend;
  gen->add_option("--params", gen_params, "parameter file or fixture name")->required();
  gen->add_option("--set", gen_set, "strike set: set1, set2, stress or a quote file");
  gen->add_option("--grid-tau", grid_tau, "use the log-strike grid at this maturity instead");
  gen->add_option("--grid-m", grid_m, "grid scale")->capture_default_str();
  gen->add_option("--grid-j", grid_j, "grid size J_d")->capture_default_str();
  gen->add_option("--spot", gen_spot, "spot for the grid")->capture_default_str();
  gen->add_option("--rate", gen_rate, "interest rate override");
  gen->add_option("--noise", gen_noise, "additive Gaussian noise level")->capture_default_str();
  gen->add_option("--seed", gen_seed, "noise seed")->capture_default_str();
  gen->add_option("--format", gen_format, "text or json")->capture_default_str();
  gen->add_option("--out", gen_path, "write here instead of standard output");
  gen_backend.add(gen, false);

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Levenberg-Marquardt fit to quoted prices");
  std::string cal_quotes, cal_start;
  std::optional<double> cal_rate;
  CalibrationConfig cal_config;
  bool allow_partial = false;
  BackendFlags cal_backend;
  OutputFlags cal_out;
  cal->add_option("--quotes", cal_quotes, "quote file with prices")->required();
  cal->add_option("--start", cal_start, "initial parameters: file or fixture name")->required();
  cal->add_option("--rate", cal_rate, "override the file's interest rate");
  cal->add_option("--eps1", cal_config.eps1, "objective tolerance")->capture_default_str();
  cal->add_option("--eps2", cal_config.eps2, "gradient tolerance")->capture_default_str();
  cal->add_option("--eps3", cal_config.eps3, "relative step tolerance")->capture_default_str();
  cal->add_option("--max-iter", cal_config.max_iterations, "iteration cap")->capture_default_str();
  cal->add_flag("--allow-partial", allow_partial, "exit 0 even without ResidualTol");
  cal_backend.add(cal);
  cal_out.add(cal);

  // speed
  auto* speed = app.add_subcommand("speed", "calibration wall times per backend");
  std::string speed_set = "set1";
  SpeedOptions speed_opts;
  BackendFlags speed_backend;
  OutputFlags speed_out;
  speed->add_option("--set", speed_set, "set1, set2 or set3")->capture_default_str();
  speed->add_option("--reps", speed_opts.reps, "repetitions for kswift and cp")->capture_default_str();
  speed->add_option("--naive-reps", speed_opts.naive_reps,
                    "repetitions for unaccelerated swift (0 skips it)")
      ->capture_default_str();
  speed_backend.add(speed, false);
  speed_out.add(speed);

  // converge
  auto* conv = app.add_subcommand("converge", "random-start convergence study");
  ConvergeOptions conv_opts;
  BackendFlags conv_backend;
  OutputFlags conv_out;
  conv->add_option("--target", conv_opts.target, "fx, ir or eq")->capture_default_str();
  conv->add_option("--trials", conv_opts.trials, "number of starts")->capture_default_str();
  conv->add_option("--seed", conv_opts.seed, "start seed")->capture_default_str();
  conv->add_option("--threads", conv_opts.threads, "worker threads (0: all cores)")->capture_default_str();
  conv_backend.add(conv);
  conv_out.add(conv);

  // stress
  auto* stress = app.add_subcommand("stress", "stress prices next to the published values");
  StressOptions stress_opts;
  OutputFlags stress_out;
  stress->add_option("--rate", stress_opts.rate, "interest rate")->capture_default_str();
  stress->add_option("--chf-form", [&](const CLI::results_t& r) {
    stress_opts.form = parse_chf_form(r[0]);
    return true;
  }, "cui or schoutens");
  stress_out.add(stress);

  // fixtures
  auto* fix = app.add_subcommand("fixtures", "write the embedded tables as files");
  std::string fix_dir;
  fix->add_option("dir", fix_dir, "target directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*price) {
      QuoteFile file = load_quotes(price_quotes);
      apply_rate(file, price_rate);
      price_out.emit(run_price(load_params(price_params), file, price_backend.config()));
    } else if (*gen) {
      const HestonParams theta = load_params(gen_params);
      QuoteFile base;
      if (grid_tau) {
        base.context.spot = gen_spot;
        base.quotes = GridSpec{grid_m, grid_j, *grid_tau}.quotes(base.context);
      } else {
        if (gen_set.empty()) throw InvalidInput("generate needs --set or --grid-tau");
        base = load_quotes(gen_set);
      }
      apply_rate(base, gen_rate);
      GenerateOptions opts{gen_noise, gen_seed, gen_backend.swift()};
      const QuoteFile file = generate_quotes(theta, base.context, base.quotes, opts);
      FileFormat format;
      if (gen_format == "text")
        format = FileFormat::text;
      else if (gen_format == "json")
        format = FileFormat::json;
      else
        throw InvalidInput("unknown format '" + gen_format + "'");
      if (gen_path.empty())
        std::cout << format_quote_file(file, format);
      else
        write_quote_file(gen_path, file, format);
    } else if (*cal) {
      QuoteFile file = load_quotes(cal_quotes);
      apply_rate(file, cal_rate);
      const ExperimentReport report =
          run_calibrate(file, load_params(cal_start), cal_config, cal_backend.config());
      cal_out.emit(report);
      if (report.metadata.at("stop_reason") != "ResidualTol" && !allow_partial) {
        std::cerr << "calibration stopped with " << report.metadata.at("stop_reason").get<std::string>()
                  << " (use --allow-partial to accept)\n";
        return kExitPartial;
      }
    } else if (*speed) {
      speed_opts.set = parse_speed_set(speed_set);
      speed_opts.swift = speed_backend.swift();
      speed_opts.quadrature = speed_backend.config().quadrature;
      speed_out.emit(run_speed(speed_opts));
    } else if (*conv) {
      conv_opts.backend = conv_backend.config();
      conv_out.emit(run_converge(conv_opts));
    } else if (*stress) {
      stress_out.emit(run_stress(stress_opts));
    } else if (*fix) {
      fixtures::write_all(fix_dir);
    }
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const OverflowError& e) {
    std::cerr << "numerical failure: " << e.what()
              << "\nremedies: lower --u-max, raise --m, or use --chf-form cui\n";
    return kExitNumerical;
  } catch (const NoConvergence& e) {
    std::cerr << "numerical failure: " << e.what() << "\nremedies: pass --m explicitly or raise --scale-tol\n";
    return kExitNumerical;
  } catch (const SingularSystem& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
