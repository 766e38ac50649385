#pragma once
// Experiment drivers behind the CLI. Each returns a report whose rows carry
// the configuration that produced them.
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hswift/backends.hpp"
#include "hswift/calibration.hpp"
#include "hswift/quotes.hpp"

namespace hswift {

struct ExperimentReport {
  std::string experiment;  // stress, speed, converge, price, calibrate
  std::vector<std::string> columns;
  nlohmann::json rows = nlohmann::json::array();  // objects keyed by column
  nlohmann::json metadata = nlohmann::json::object();

  nlohmann::json to_json() const;
  /// Fixed-width table followed by the metadata, one key per line.
  std::string to_table() const;
};

/// Everything needed to build a backend.
struct BackendConfig {
  std::string name = "kswift";  // swift, kswift, kswift-per-quote, cp
  SwiftSettings swift;
  QuadratureConfig quadrature;
  ChfForm form = ChfForm::cui;

  std::unique_ptr<PricingBackend> make() const;
  nlohmann::json describe() const;
};

ExperimentReport run_price(const HestonParams& theta, const QuoteFile& file,
                           const BackendConfig& backend);

/// Strikes at x_k = (2k - j_d) / 2^{m+1}, k = 0 .. j_d - 1, one maturity.
struct GridSpec {
  int m = 5;
  int j_d = 256;
  double maturity = 1.0;
  std::vector<OptionQuote> quotes(const MarketContext& ctx) const;
};

struct GenerateOptions {
  double noise = 0.0;  // standard deviation of additive Gaussian noise
  std::uint64_t seed = 1;
  SwiftSettings swift;
};

/// Call (or put) prices for the given quotes via multi-strike SWIFT, plus
/// optional noise. Prices are floored at zero: deep out-of-the-money values
/// can come out a few 1e-7 below it.
QuoteFile generate_quotes(const HestonParams& theta, const MarketContext& ctx,
                          std::vector<OptionQuote> quotes, const GenerateOptions& options = {});

ExperimentReport run_calibrate(const QuoteFile& file, const HestonParams& theta0,
                               const CalibrationConfig& config, const BackendConfig& backend);

/// Protocols for the timing experiment. set3 is Set 2 with every strike
/// repriced from scratch (per-quote recomputation).
enum class SpeedSet { set1, set2, set3 };
SpeedSet parse_speed_set(const std::string& name);
const char* to_string(SpeedSet set);

struct SpeedOptions {
  SpeedSet set = SpeedSet::set1;
  int reps = 100;       // kswift and cp
  int naive_reps = 1;   // unaccelerated swift takes minutes per run; 0 skips it
  CalibrationConfig config;
  SwiftSettings swift;
  QuadratureConfig quadrature;
};

/// Calibrates the fixture set from the perturbed start with each backend and
/// reports mean wall time, iterations and final objective, plus the ratios
/// cp/kswift and swift/kswift.
ExperimentReport run_speed(const SpeedOptions& options);

struct ConvergeOptions {
  std::string target = "fx";  // fx, ir, eq
  int trials = 100;
  std::uint64_t seed = 1;
  double spread = 0.10;  // starts uniform in target * (1 +- spread)
  int threads = 0;       // 0: hardware concurrency
  CalibrationConfig config;
  BackendConfig backend;
};

/// Random-start convergence study on Set 2 quotes generated at the target.
ExperimentReport run_converge(const ConvergeOptions& options);

/// Summary of run_converge, read back from its metadata.
struct ConvergeSummary {
  ParamVector mean_abs_error{};
  double residual_tol_fraction = 0.0;
  double mean_iterations = 0.0;
  double mean_time = 0.0;
  double mean_objective = 0.0;
  double total_time = 0.0;
};
ConvergeSummary converge_summary(const ExperimentReport& report);

struct StressOptions {
  double rate = 0.0;
  int m_long = 3;
  int m_short = 7;
  double u_max_long = 6.0;
  double u_max_short = 200.0;
  std::vector<double> u_sweep = {100, 125, 150, 175, 200, 250, 300, 350, 400};
  ChfForm form = ChfForm::cui;
};

/// Stress prices with SWIFT and CP next to the published values, plus the CP
/// u_max sweep for the deep out-of-the-money short-maturity quote.
ExperimentReport run_stress(const StressOptions& options = {});

}  // namespace hswift
