#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>

namespace hswift {

using cplx = std::complex<double>;

/// Position of each model parameter inside gradient vectors and Jacobian
/// columns. The order is (v0, v_bar, sigma, kappa, rho); note that this is
/// NOT the field order of HestonParams.
enum ParamIndex : int { kV0 = 0, kVBar = 1, kSigma = 2, kKappa = 3, kRho = 4 };
inline constexpr int kNumParams = 5;

using ParamVector = std::array<double, kNumParams>;
using ParamGradient = std::array<cplx, kNumParams>;

struct HestonParams {
  double kappa = 0.0;  // mean-reversion rate
  double v_bar = 0.0;  // long-run variance
  double sigma = 0.0;  // vol-of-vol
  double rho = 0.0;    // spot/variance correlation
  double v0 = 0.0;     // initial variance

  /// Throws InvalidInput unless kappa, v_bar, sigma, v0 > 0 and |rho| <= 1.
  void validate() const;

  /// Packs the parameters in ParamIndex order.
  ParamVector to_vector() const;
  static HestonParams from_vector(const ParamVector& v);

  std::string to_string() const;

  friend bool operator==(const HestonParams&, const HestonParams&) = default;
};

struct MarketContext {
  double spot = 1.0;
  double rate = 0.0;
  double dividend = 0.0;

  void validate() const;
};

enum class ChfForm { cui, schoutens };

ChfForm parse_chf_form(const std::string& name);
const char* to_string(ChfForm form);

struct ChfEvaluation {
  cplx value;
  // h(u) * f(u), ordered by ParamIndex.
  std::optional<ParamGradient> gradient;
};

// Characteristic function of Y = ln(S_T / S_0) in the e^{-iuY} convention,
// f(u) = E[exp(-i u Y)]. Complex u is allowed (the reference pricer needs
// f(-u + i)). All forms throw OverflowError when the result is not finite.

/// Exponential-form characteristic function; the hyperbolic terms are carried
/// as ratios in e^{-d tau} so that long maturities cannot overflow.
cplx chf_cui(cplx u, double tau, const HestonParams& theta, const MarketContext& ctx);

/// Alternative little-trap form, used as a long-maturity fallback.
cplx chf_schoutens(cplx u, double tau, const HestonParams& theta, const MarketContext& ctx);

cplx chf(ChfForm form, cplx u, double tau, const HestonParams& theta, const MarketContext& ctx);

/// Value and parameter gradient of chf_cui.
ChfEvaluation chf_gradient(cplx u, double tau, const HestonParams& theta,
                           const MarketContext& ctx);

struct Cumulants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c4 = 0.0;
};

/// Cumulants of ln(S_T / S_0). c4 is reported as 0: the truncation rule relies
/// on the density-area check instead of the fourth cumulant.
Cumulants cumulants(const HestonParams& theta, double tau, const MarketContext& ctx);

namespace detail {
// The textbook evaluation with cosh/sinh(d tau / 2). Overflows for long
// maturities; kept to reproduce that failure mode in tests.
cplx chf_cui_unstabilized(cplx u, double tau, const HestonParams& theta,
                          const MarketContext& ctx);
}  // namespace detail

}  // namespace hswift
