#pragma once

// Shannon-wavelet (SWIFT) pricing of European options under Heston.
//
// The density of y = ln(S_T / K) given x = ln(S_0 / K) is projected onto
// phi_{m,k}(y) = 2^{m/2} sinc(2^m y - k), k in [1 - eta, eta]. Density and
// payoff coefficients are computed from J-term cosine expansions of sinc, so
// every coefficient vector is one DFT of length 2J.
//
// All pricers value the put, whose payoff is bounded, and return calls by
// put-call parity. The call payoff grows like e^y, so truncating it at a wide
// interval (long maturities) costs several digits.

#include <complex>
#include <span>
#include <vector>

#include "hswift/heston.hpp"
#include "hswift/option.hpp"

namespace hswift {

struct SwiftParams {
  int m = 0;           // wavelet scale
  int eta = 0;         // k ranges over [1 - eta, eta]
  int j_density = 0;   // cosine terms (density); the DFT length is 2 * j_density
  int j_payoff = 0;    // cosine terms (payoff)
  double c = 0.0;      // cumulant half-width of the log-return distribution
  double x_low = 0.0;  // payoff integration interval in y
  double x_high = 0.0;

  int k_min() const { return 1 - eta; }
  int num_coefficients() const { return 2 * eta; }
  double scale() const;  // 2^m

  /// Throws InvalidInput unless 2 eta < J (both), J powers of two,
  /// x_low <= 0 <= x_high and c > 0.
  void validate() const;

  friend bool operator==(const SwiftParams&, const SwiftParams&) = default;
};

/// Smallest power of two J with 2 eta < J and J >= pi/2 (2^m A + eta), where
/// A = max(|x_low|, x_high).
int choose_cosine_terms(int m, int eta, double x_low, double x_high);

struct ScaleOptions {
  int m_min = 0;
  int m_cap = 12;
  int panels = 64;  // trapezoid panels over [2^m pi, 4 2^m pi]
};

/// Estimated two-sided tail mass H(xi) = (1/2pi) int_{|u|>xi} |f(u)| du,
/// integrated over [xi, 4 xi].
double tail_mass(const HestonParams& theta, double tau, const MarketContext& ctx, double xi,
                 int panels = 64);

/// Smallest scale m whose tail mass H(2^m pi) is at most tol.
/// Throws NoConvergence past options.m_cap.
int select_scale(const HestonParams& theta, double tau, const MarketContext& ctx, double tol,
                 const ScaleOptions& options = {});

struct TruncationOptions {
  double area_tol = 1e-6;  // |density_area - 1| accepted
  int max_widenings = 4;   // L growth attempts per scale before raising m
  double widen_factor = 1.5;
  int m_cap = 12;
};

/// Interval, eta and J for a set of strikes sharing one maturity. The
/// half-width is c = |c1| + L sqrt(c2 + sqrt(c4)), the interval is
/// [x_min - c, x_max + c]. If the density area check fails at the extreme
/// strikes, L is widened and then m raised.
SwiftParams select_truncation(const HestonParams& theta, double tau, const MarketContext& ctx,
                              int m, std::span<const double> strikes, double L,
                              const TruncationOptions& options = {});

/// D*_{m,k}(x), k = 1 - eta .. eta.
std::vector<double> density_coefficients(const HestonParams& theta, double tau,
                                         const MarketContext& ctx, double x,
                                         const SwiftParams& sp);

/// U*_{m,k}, k = 1 - eta .. eta, for the strike-free payoff over [x_low, x_high].
std::vector<double> payoff_coefficients(const SwiftParams& sp, OptionKind kind);

/// 2^{-m/2} times the trapezoid sum of the density coefficients.
double density_area(std::span<const double> density, const SwiftParams& sp);

struct CoefficientSet {
  std::vector<double> density;  // D*_{m,k} at the requested x
  std::vector<double> payoff;   // U*_{m,k}
  std::vector<cplx> u_tilde;    // sum_k U*_{m,k} e^{i k u_j}, j = 1 .. J_d
  std::vector<cplx> f_cached;   // f(2^m u_j), j = 1 .. J_d
};

CoefficientSet make_coefficient_set(const HestonParams& theta, double tau,
                                     const MarketContext& ctx, double x, const SwiftParams& sp,
                                     OptionKind kind = OptionKind::call);

/// K e^{-r tau} sum_k D*_{m,k}(x) U*_{m,k} with put coefficients; calls by parity.
double price_single(const HestonParams& theta, const MarketContext& ctx, const OptionQuote& quote,
                    const SwiftParams& sp);

/// Multi-strike pricer for one maturity. The payoff transform and the
/// per-strike phase factors depend only on the strikes and SwiftParams and are
/// built once; each evaluation needs J_d characteristic function samples.
class KSwiftPricer {
 public:
  KSwiftPricer(const MarketContext& ctx, double tau, std::vector<double> strikes,
               const SwiftParams& sp);

  const SwiftParams& params() const { return sp_; }
  const std::vector<double>& strikes() const { return strikes_; }
  const std::vector<cplx>& u_tilde() const { return u_tilde_; }
  double maturity() const { return tau_; }

  /// Call prices in strike order. u_tilde() holds the put payoff transform.
  std::vector<double> prices(const HestonParams& theta) const;

  /// Call prices and their parameter Jacobian (rows in strike order).
  void price_and_gradient(const HestonParams& theta, std::span<double> prices,
                          Jacobian& jacobian) const;

 private:
  MarketContext ctx_;
  double tau_;
  std::vector<double> strikes_;
  SwiftParams sp_;
  std::vector<double> frequencies_;  // 2^m u_j
  std::vector<cplx> u_tilde_;
  std::vector<cplx> phases_;  // strike-major, e^{-i 2^m u_j x_i}
};

std::vector<double> price_multi_strike(const HestonParams& theta, const MarketContext& ctx,
                                       double tau, std::span<const double> strikes,
                                       const SwiftParams& sp);

struct PriceAndGradient {
  std::vector<double> prices;
  Jacobian jacobian;
};

PriceAndGradient price_and_gradient_multi_strike(const HestonParams& theta,
                                                 const MarketContext& ctx, double tau,
                                                 std::span<const double> strikes,
                                                 const SwiftParams& sp);

struct GridPoint {
  double x = 0.0;  // ln(S_0 / K)
  double strike = 0.0;
  double price = 0.0;
};

/// Call prices at x_k = (2k - J_d) / 2^{m+1}, k = 0 .. J_d - 1, by one DFT.
/// Only points whose density support lies inside [x_low, x_high] are accurate.
std::vector<GridPoint> price_strike_grid(const HestonParams& theta, const MarketContext& ctx,
                                         double tau, const SwiftParams& sp);

/// The unaccelerated formulation: each density coefficient (and its five
/// parameter derivatives) is an independent sum whose characteristic function
/// samples are evaluated inside the sum, and the payoff coefficients are
/// rebuilt per call. This is the baseline the accelerated paths are measured
/// against; do not use it for production pricing.
double price_single_unaccelerated(const HestonParams& theta, const MarketContext& ctx,
                                  const OptionQuote& quote, const SwiftParams& sp,
                                  ParamVector* gradient);

/// Natural cubic spline through (x_i, y_i) with strictly increasing x.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::vector<double> x, std::vector<double> y);
  double operator()(double x) const;

 private:
  std::vector<double> x_, y_, m_;  // m_: second derivatives
};

}  // namespace hswift
