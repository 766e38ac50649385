#include "hswift/fixtures.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hswift/errors.hpp"

namespace hswift::fixtures {

namespace {

HestonParams make(double kappa, double v_bar, double sigma, double rho, double v0) {
  return HestonParams{kappa, v_bar, sigma, rho, v0};
}

}  // namespace

HestonParams theta_table1() { return make(3.0, 0.1, 0.25, -0.8, 0.08); }
HestonParams theta_stress() { return theta_target_start(); }
HestonParams theta_target() { return make(1.5768, 0.0398, 0.0175, -0.5711, 0.0175); }
HestonParams theta_target_start() { return make(1.5768, 0.0398, 0.5751, -0.5711, 0.0175); }
HestonParams theta_fx() { return make(0.5, 0.04, 1.0, -0.9, 0.04); }
HestonParams theta_ir() { return make(0.3, 0.04, 0.9, -0.5, 0.04); }
HestonParams theta_eq() { return make(1.0, 0.09, 1.0, 0.04, 0.09); }

HestonParams theta_by_name(const std::string& name) {
  if (name == "table1") return theta_table1();
  if (name == "stress") return theta_stress();
  if (name == "target") return theta_target();
  if (name == "target-start") return theta_target_start();
  if (name == "fx") return theta_fx();
  if (name == "ir") return theta_ir();
  if (name == "eq") return theta_eq();
  throw InvalidInput("unknown parameter set '" + name +
                     "' (expected table1, stress, target, target-start, fx, ir, eq)");
}

const std::vector<double>& set2_maturities() {
  static const std::vector<double> t = {
      0.119047619047619, 0.238095238095238, 0.357142857142857, 0.476190476190476,
      0.595238095238095, 0.714285714285714, 1.07142857142857,  1.42857142857143};
  return t;
}

const std::vector<std::vector<double>>& set2_strikes() {
  static const std::vector<std::vector<double>> k = {
      {0.9371, 0.9956, 1.0427, 1.2287, 1.3939}, {0.8603, 0.9868, 1.0463, 1.2399, 1.4102},
      {0.8112, 0.9728, 1.0499, 1.2485, 1.4291}, {0.7760, 0.9588, 1.0530, 1.2659, 1.4456},
      {0.7470, 0.9464, 1.0562, 1.2646, 1.4603}, {0.7216, 0.9358, 1.0593, 1.2715, 1.4736},
      {0.6699, 0.9175, 1.0663, 1.2859, 1.5005}, {0.6137, 0.9025, 1.0766, 1.3046, 1.5328}};
  return k;
}

double set1_maturity() { return 0.119047619047619; }

MarketContext set_market() { return MarketContext{1.0, 0.02, 0.0}; }
MarketContext stress_market(double rate) { return MarketContext{100.0, rate, 0.0}; }

std::vector<OptionQuote> strike_set(const std::string& set) {
  if (set != "set1" && set != "set2") throw InvalidInput("unknown strike set '" + set + "'");
  std::vector<OptionQuote> quotes;
  const auto& taus = set2_maturities();
  const auto& strikes = set2_strikes();
  if (set == "set1") {
    // Same 40 strikes, one expiry; sorted so the file reads naturally.
    std::vector<double> all;
    for (const auto& row : strikes) all.insert(all.end(), row.begin(), row.end());
    std::sort(all.begin(), all.end());
    for (double k : all) quotes.push_back({k, set1_maturity(), std::nullopt, OptionKind::call});
    return quotes;
  }
  for (std::size_t i = 0; i < taus.size(); ++i)
    for (double k : strikes[i]) quotes.push_back({k, taus[i], std::nullopt, OptionKind::call});
  return quotes;
}

std::vector<OptionQuote> stress_quotes() {
  std::vector<OptionQuote> quotes;
  for (double tau : {45.0, 0.04})
    for (double k : {50.0, 100.0, 200.0}) quotes.push_back({k, tau, std::nullopt, OptionKind::call});
  return quotes;
}

std::vector<double> stress_targets() { return {65.565, 46.911, 27.198, 50.000, 1.046, 1.079e-3}; }

std::uint64_t checksum() {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g;", v);
    for (int i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& theta : {theta_table1(), theta_target(), theta_target_start(), theta_fx(),
                            theta_ir(), theta_eq()})
    for (double v : {theta.kappa, theta.v_bar, theta.sigma, theta.rho, theta.v0}) feed(v);
  for (double t : set2_maturities()) feed(t);
  for (const auto& row : set2_strikes())
    for (double k : row) feed(k);
  feed(set1_maturity());
  for (double v : stress_targets()) feed(v);
  return h;
}

void write_all(const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto path = [&](const std::string& name) { return (std::filesystem::path(dir) / name).string(); };
  for (const char* name : {"table1", "stress", "target", "target-start", "fx", "ir", "eq"}) {
    std::ofstream out(path(std::string("theta_") + name + ".txt"));
    out << format_params(theta_by_name(name));
  }
  write_quote_file(path("set1.csv"), QuoteFile{set_market(), strike_set("set1")});
  write_quote_file(path("set2.csv"), QuoteFile{set_market(), strike_set("set2")});
  write_quote_file(path("stress.csv"), QuoteFile{stress_market(), stress_quotes()});
}

}  // namespace hswift::fixtures
