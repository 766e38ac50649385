#pragma once

// Fourier-inversion reference pricer: Heston's two-probability formula with
// the integral over (0, u_max] evaluated by a fixed Gauss-Legendre rule.

#include <span>
#include <vector>

#include "hswift/heston.hpp"
#include "hswift/option.hpp"

namespace hswift {

struct QuadratureConfig {
  int nodes = 64;
  double u_max = 200.0;

  void validate() const;
};

struct GaussLegendreRule {
  std::vector<double> nodes;    // on (-1, 1), increasing
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule; computed once per n and cached.
const GaussLegendreRule& gauss_legendre(int n);

/// Price of a European option; calls directly, puts through parity.
/// Throws OverflowError if the characteristic function overflows at a node.
double price_cp(const HestonParams& theta, const MarketContext& ctx, const OptionQuote& quote,
                const QuadratureConfig& qc = {}, ChfForm form = ChfForm::cui);

/// Parameter gradient of price_cp in ParamIndex order. The integrand is
/// differentiated under the integral with the exponential-form gradient; the
/// result does not depend on the form used for pricing.
ParamVector gradient_cp(const HestonParams& theta, const MarketContext& ctx,
                        const OptionQuote& quote, const QuadratureConfig& qc = {},
                        ChfForm form = ChfForm::cui);

/// Price and gradient sharing the same characteristic function samples.
double price_and_gradient_cp(const HestonParams& theta, const MarketContext& ctx,
                             const OptionQuote& quote, const QuadratureConfig& qc,
                             ParamVector& gradient);

}  // namespace hswift
