#include "hswift/reference.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "hswift/errors.hpp"

namespace hswift {

namespace {

constexpr cplx kI{0.0, 1.0};

GaussLegendreRule compute_rule(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  return rule;
}

struct Integrals {
  double value = 0.0;
  ParamVector gradient{};
};

// (e^{-r tau} / pi) int_0^u_max Re((f(-u + i; x) - f(-u; x)) / (iu)) du, where
// f(v; x) = e^{-ivx} f(v). Optionally the same integral of the gradient.
Integrals integrate(const HestonParams& theta, const MarketContext& ctx, double tau, double x,
                    const QuadratureConfig& qc, ChfForm form, bool with_gradient) {
  const GaussLegendreRule& rule = gauss_legendre(qc.nodes);
  const double half = 0.5 * qc.u_max;
  Integrals out;
  for (int i = 0; i < qc.nodes; ++i) {
    const double u = half * (rule.nodes[i] + 1.0);
    const double w = half * rule.weights[i];
    const cplx v1{-u, 1.0};
    const cplx v2{-u, 0.0};
    const cplx shift1 = std::exp(-kI * v1 * x);
    const cplx shift2 = std::exp(-kI * v2 * x);
    const cplx denom = kI * u;
    if (with_gradient) {
      const ChfEvaluation e1 = chf_gradient(v1, tau, theta, ctx);
      const ChfEvaluation e2 = chf_gradient(v2, tau, theta, ctx);
      const cplx f1 = form == ChfForm::cui ? e1.value : chf_schoutens(v1, tau, theta, ctx);
      const cplx f2 = form == ChfForm::cui ? e2.value : chf_schoutens(v2, tau, theta, ctx);
      out.value += w * ((f1 * shift1 - f2 * shift2) / denom).real();
      for (int p = 0; p < kNumParams; ++p) {
        out.gradient[p] +=
            w * (((*e1.gradient)[p] * shift1 - (*e2.gradient)[p] * shift2) / denom).real();
      }
    } else {
      const cplx f1 = chf(form, v1, tau, theta, ctx);
      const cplx f2 = chf(form, v2, tau, theta, ctx);
      out.value += w * ((f1 * shift1 - f2 * shift2) / denom).real();
    }
  }
  const double scale = std::exp(-ctx.rate * tau) / std::numbers::pi;
  out.value *= scale;
  for (double& g : out.gradient) g *= scale;
  return out;
}

double assemble_call(double integral, double strike, double tau, double x,
                     const MarketContext& ctx) {
  return strike * (0.5 * (std::exp(x - ctx.dividend * tau) - std::exp(-ctx.rate * tau)) + integral);
}

}  // namespace

void QuadratureConfig::validate() const {
  if (nodes < 2) throw InvalidInput("QuadratureConfig: need at least 2 nodes");
  if (!(u_max > 0.0)) throw InvalidInput("QuadratureConfig: u_max must be positive");
}

const GaussLegendreRule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendreRule>> rules;
  std::lock_guard lock(mutex);
  auto& slot = rules[n];
  if (!slot) slot = std::make_unique<GaussLegendreRule>(compute_rule(n));
  return *slot;
}

double price_cp(const HestonParams& theta, const MarketContext& ctx, const OptionQuote& quote,
                const QuadratureConfig& qc, ChfForm form) {
  qc.validate();
  quote.validate();
  const double x = std::log(ctx.spot / quote.strike);
  const Integrals integrals = integrate(theta, ctx, quote.maturity, x, qc, form, false);
  const double call = assemble_call(integrals.value, quote.strike, quote.maturity, x, ctx);
  return quote.kind == OptionKind::call ? call
                                        : put_from_call(call, quote.strike, quote.maturity, ctx);
}

ParamVector gradient_cp(const HestonParams& theta, const MarketContext& ctx,
                        const OptionQuote& quote, const QuadratureConfig& qc, ChfForm form) {
  qc.validate();
  quote.validate();
  const double x = std::log(ctx.spot / quote.strike);
  ParamVector grad = integrate(theta, ctx, quote.maturity, x, qc, form, true).gradient;
  for (double& g : grad) g *= quote.strike;
  return grad;
}

double price_and_gradient_cp(const HestonParams& theta, const MarketContext& ctx,
                             const OptionQuote& quote, const QuadratureConfig& qc,
                             ParamVector& gradient) {
  qc.validate();
  quote.validate();
  const double x = std::log(ctx.spot / quote.strike);
  const Integrals integrals = integrate(theta, ctx, quote.maturity, x, qc, ChfForm::cui, true);
  for (int p = 0; p < kNumParams; ++p) gradient[p] = quote.strike * integrals.gradient[p];
  const double call = assemble_call(integrals.value, quote.strike, quote.maturity, x, ctx);
  return quote.kind == OptionKind::call ? call
                                        : put_from_call(call, quote.strike, quote.maturity, ctx);
}

}  // namespace hswift
