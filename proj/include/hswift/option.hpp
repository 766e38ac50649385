#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

#include "hswift/heston.hpp"

namespace hswift {

enum class OptionKind { call, put };

OptionKind parse_option_kind(const std::string& text);
const char* to_string(OptionKind kind);

struct OptionQuote {
  double strike = 0.0;
  double maturity = 0.0;
  std::optional<double> price;  // observed price; empty for pure pricing
  OptionKind kind = OptionKind::call;

  void validate() const;

  friend bool operator==(const OptionQuote&, const OptionQuote&) = default;
};

/// Rows are quotes, columns follow ParamIndex.
using Jacobian = Eigen::Matrix<double, Eigen::Dynamic, kNumParams>;

/// Put price from a call price: P = C - S e^{-q tau} + K e^{-r tau}.
double put_from_call(double call, double strike, double tau, const MarketContext& ctx);
double call_from_put(double put, double strike, double tau, const MarketContext& ctx);

}  // namespace hswift
