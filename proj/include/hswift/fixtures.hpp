#pragma once

// Parameter sets and strike/maturity tables used by the experiments.

#include <cstdint>
#include <string>
#include <vector>

#include "hswift/heston.hpp"
#include "hswift/option.hpp"
#include "hswift/quotes.hpp"

namespace hswift::fixtures {

/// The first row of the parameter table as printed: (3, 0.1, 0.25, -0.8, 0.08).
HestonParams theta_table1();
/// Parameters that reproduce the published stress prices. They coincide with
/// theta_target_start(), not with theta_table1(); see the README.
HestonParams theta_stress();
HestonParams theta_target();       // Set 1/2 generating parameters
HestonParams theta_target_start(); // same with sigma perturbed
HestonParams theta_fx();
HestonParams theta_ir();
HestonParams theta_eq();

/// Parameter set by name: table1, stress, target, target-start, fx, ir, eq.
HestonParams theta_by_name(const std::string& name);

/// Eight maturities and the 8 x 5 strike table (row = maturity).
const std::vector<double>& set2_maturities();
const std::vector<std::vector<double>>& set2_strikes();
/// The single maturity shared by all Set 1 strikes.
double set1_maturity();

/// Market for Sets 1 and 2 (spot 1, rate 0.02).
MarketContext set_market();
/// Market for the stress tests (spot 100, rate 0 unless overridden).
MarketContext stress_market(double rate = 0.0);

/// Quotes without prices. set: "set1", "set2".
std::vector<OptionQuote> strike_set(const std::string& set);

/// Stress quotes: tau in {45, 0.04} x K in {50, 100, 200}.
std::vector<OptionQuote> stress_quotes();
/// Published stress prices in the order of stress_quotes(); long maturity
/// first.
std::vector<double> stress_targets();

/// FNV-1a over the %.17g rendering of every embedded table value.
std::uint64_t checksum();
/// The value checksum() returns for the tables as shipped.
inline constexpr std::uint64_t kExpectedChecksum = 0xb0ee06f05766124cULL;

/// Writes params and quote files (text) for every embedded table into dir.
void write_all(const std::string& dir);

}  // namespace hswift::fixtures
