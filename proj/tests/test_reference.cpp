#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hswift/backends.hpp"
#include "hswift/errors.hpp"
#include "hswift/fixtures.hpp"
#include "hswift/reference.hpp"

using namespace hswift;
namespace fx = hswift::fixtures;

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double black_scholes_call(double s, double k, double tau, double r, double var) {
  const double sd = std::sqrt(var * tau);
  const double d1 = (std::log(s / k) + r * tau) / sd + 0.5 * sd;
  return s * norm_cdf(d1) - k * std::exp(-r * tau) * norm_cdf(d1 - sd);
}

}  // namespace

TEST_CASE("Gauss-Legendre rule") {
  for (int n : {2, 5, 16, 64}) {
    const GaussLegendreRule& rule = gauss_legendre(n);
    REQUIRE(rule.nodes.size() == static_cast<std::size_t>(n));
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    // exact for degree 2n - 1
    const int deg = 2 * n - 2;
    double integral = 0.0;
    for (int i = 0; i < n; ++i) integral += rule.weights[i] * std::pow(rule.nodes[i], deg);
    CHECK(integral == doctest::Approx(2.0 / (deg + 1)).epsilon(1e-12));
    for (int i = 1; i < n; ++i) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
  }
  CHECK(&gauss_legendre(16) == &gauss_legendre(16));
}

TEST_CASE("quadrature config validation") {
  const OptionQuote q{1.0, 1.0, std::nullopt, OptionKind::call};
  CHECK_THROWS_AS(price_cp(fx::theta_target(), fx::set_market(), q, {1, 200.0}), InvalidInput);
  CHECK_THROWS_AS(price_cp(fx::theta_target(), fx::set_market(), q, {64, 0.0}), InvalidInput);
}

TEST_CASE("Black-Scholes limit") {
  // Almost no vol-of-vol and v0 = v_bar: constant variance.
  const HestonParams theta{2.0, 0.04, 1e-4, 0.0, 0.04};
  const MarketContext ctx{100.0, 0.03, 0.0};
  for (double k : {80.0, 100.0, 125.0}) {
    const OptionQuote q{k, 1.0, std::nullopt, OptionKind::call};
    CHECK(price_cp(theta, ctx, q, {128, 200.0}) ==
          doctest::Approx(black_scholes_call(100.0, k, 1.0, 0.03, 0.04)).epsilon(1e-6));
  }
}

TEST_CASE("published stress values") {
  const HestonParams theta = fx::theta_stress();
  const MarketContext ctx = fx::stress_market();
  const auto quotes = fx::stress_quotes();
  const auto targets = fx::stress_targets();
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(std::abs(price_cp(theta, ctx, quotes[i], {64, 6.0}) - targets[i]) < 1e-3);
  CHECK(std::abs(price_cp(theta, ctx, quotes[3], {64, 200.0}) - 50.0) < 1e-3);
  CHECK(std::abs(price_cp(theta, ctx, quotes[4], {64, 200.0}) - 1.046) < 1e-3);
  // the deep out-of-the-money value, Schoutens form
  CHECK(std::abs(price_cp(theta, ctx, quotes[5], {64, 200.0}, ChfForm::schoutens) - 1.079e-3) < 1e-6);
}

TEST_CASE("put-call parity") {
  const HestonParams theta = fx::theta_eq();
  const MarketContext ctx{1.0, 0.02, 0.01};
  for (double k : {0.7, 1.0, 1.4}) {
    OptionQuote call{k, 0.8, std::nullopt, OptionKind::call}, put = call;
    put.kind = OptionKind::put;
    const double diff = price_cp(theta, ctx, call) - price_cp(theta, ctx, put);
    CHECK(diff == doctest::Approx(std::exp(-0.01 * 0.8) - k * std::exp(-0.02 * 0.8)).epsilon(1e-12));
  }
}

TEST_CASE("agreement with SWIFT on Set 2") {
  const HestonParams theta = fx::theta_target();
  const MarketContext ctx = fx::set_market();
  const auto quotes = fx::strike_set("set2");
  KSwiftBackend kswift;
  QuoteSetPricer pricer(kswift, quotes, ctx, theta);
  Eigen::VectorXd sw;
  pricer.evaluate(theta, sw, nullptr);
  for (std::size_t i = 0; i < quotes.size(); ++i)
    CHECK(std::abs(price_cp(theta, ctx, quotes[i]) - sw[static_cast<Eigen::Index>(i)]) <= 1e-7);
}

TEST_CASE("gradient against finite differences") {
  const MarketContext ctx = fx::set_market();
  for (const HestonParams& theta : {fx::theta_target(), fx::theta_fx()}) {
    for (const auto& q : {OptionQuote{0.95, 0.25, std::nullopt, OptionKind::call},
                          OptionQuote{1.3, 1.4, std::nullopt, OptionKind::put}}) {
      ParamVector grad;
      const double price = price_and_gradient_cp(theta, ctx, q, {}, grad);
      CHECK(price == doctest::Approx(price_cp(theta, ctx, q)).epsilon(1e-14));
      const ParamVector g2 = gradient_cp(theta, ctx, q);
      for (int p = 0; p < kNumParams; ++p) {
        CHECK(grad[p] == doctest::Approx(g2[p]).epsilon(1e-14));
        const ParamVector base = theta.to_vector();
        const double h = 1e-5 * std::abs(base[p]);
        auto at = [&](double d) {
          ParamVector v = base;
          v[p] += d;
          return price_cp(HestonParams::from_vector(v), ctx, q);
        };
        const double fd = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
        CAPTURE(p);
        CHECK(std::abs(grad[p] - fd) <= 1e-5 * std::abs(grad[p]) + 1e-10);
      }
    }
  }
}

TEST_CASE("deep out-of-the-money short maturity is unstable in u_max") {
  const HestonParams theta = fx::theta_stress();
  const MarketContext ctx = fx::stress_market();
  const OptionQuote q{200.0, 0.04, std::nullopt, OptionKind::call};
  double lo = 1e9, hi = -1e9;
  bool negative = false;
  for (double u = 100.0; u <= 400.0; u += 25.0) {
    const double p = price_cp(theta, ctx, q, {64, u});
    lo = std::min(lo, p);
    hi = std::max(hi, p);
    negative = negative || p < 0.0;
  }
  CHECK(negative);
  CHECK(hi - lo > 1e-3);
}
