#pragma once

// Quote and parameter files.
//
// Text quote file:
//   # comment
//   spot = 100
//   rate = 0
//   dividend = 0
//   maturity,strike,kind,price      (optional column header)
//   0.5,100,call,12.3
//   0.5,110,put                     (price optional)
//
// The JSON alternative has the same schema:
//   {"context": {"spot": .., "rate": .., "dividend": ..},
//    "quotes": [{"maturity": .., "strike": .., "kind": "call", "price": ..}]}

#include <iosfwd>
#include <string>
#include <vector>

#include "hswift/heston.hpp"
#include "hswift/option.hpp"

namespace hswift {

struct QuoteFile {
  MarketContext context;
  std::vector<OptionQuote> quotes;

  /// Throws InvalidInput on a bad context, a bad quote or a duplicate
  /// (strike, maturity, kind).
  void validate() const;

  /// Distinct maturities in first-appearance order.
  std::vector<double> maturities() const;
};

enum class FileFormat { text, json };

/// Parses either format (a leading '{' selects JSON). Errors are InvalidInput
/// with a "line N:" prefix where a line is known.
QuoteFile parse_quote_file(const std::string& content);
QuoteFile read_quote_file(const std::string& path);

std::string format_quote_file(const QuoteFile& file, FileFormat format = FileFormat::text);
void write_quote_file(const std::string& path, const QuoteFile& file,
                      FileFormat format = FileFormat::text);

/// Parameter file: "key = value" lines or a JSON object with the keys
/// kappa, v_bar, sigma, rho, v0.
HestonParams parse_params(const std::string& content);
HestonParams read_params_file(const std::string& path);
std::string format_params(const HestonParams& theta);

std::string read_text_file(const std::string& path);

}  // namespace hswift
