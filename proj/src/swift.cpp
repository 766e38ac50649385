#include "hswift/swift.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hswift/errors.hpp"
#include "hswift/fft.hpp"

namespace hswift {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

// u_j = pi (2j - 1) / (2J), j = 1 .. J, stored at index j - 1.
std::vector<double> cosine_nodes(int j_terms) {
  std::vector<double> u(j_terms);
  for (int j = 1; j <= j_terms; ++j) u[j - 1] = kPi * (2.0 * j - 1.0) / (2.0 * j_terms);
  return u;
}

int wrap(int k, int n) { return ((k % n) + n) % n; }

// sum_{j=1}^{J} g_j e^{i k u_j} for k = 1 - eta .. eta, as one DFT of length 2J:
// e^{i k u_j} = e^{-i pi k / 2J} e^{2 pi i j k / 2J}.
std::vector<cplx> sum_over_nodes(std::span<const cplx> g, int eta) {
  const int j_terms = static_cast<int>(g.size());
  const int n = 2 * j_terms;
  std::vector<cplx> in(n, cplx{}), out(n);
  std::copy(g.begin(), g.end(), in.begin() + 1);
  fft::dft(in, out, fft::Sign::positive);
  std::vector<cplx> result(2 * eta);
  for (int k = 1 - eta; k <= eta; ++k) {
    result[k - (1 - eta)] = std::polar(1.0, -kPi * k / n) * out[wrap(k, n)];
  }
  return result;
}

// sum_{k=1-eta}^{eta} a_k e^{i k u_j} for j = 1 .. J, same factorization.
std::vector<cplx> sum_over_wavelets(std::span<const double> a, int eta, int j_terms) {
  const int n = 2 * j_terms;
  std::vector<cplx> in(n, cplx{}), out(n);
  for (int k = 1 - eta; k <= eta; ++k) {
    in[wrap(k, n)] = a[k - (1 - eta)] * std::polar(1.0, -kPi * k / n);
  }
  fft::dft(in, out, fft::Sign::positive);
  return std::vector<cplx>(out.begin() + 1, out.begin() + 1 + j_terms);
}

// int g(y) e^{-i v y} dy over the part of [lo, hi] where the payoff is live.
cplx payoff_transform(OptionKind kind, double v, double lo, double hi) {
  const cplx iv = kI * v;
  const cplx one_minus_iv = 1.0 - iv;
  if (kind == OptionKind::call) {
    if (hi <= 0.0) return {};
    const double b = hi;
    const double a = std::max(lo, 0.0);
    // (e^y - 1) e^{-ivy} from a to b
    return (std::exp(one_minus_iv * b) - std::exp(one_minus_iv * a)) / one_minus_iv +
           (std::exp(-iv * b) - std::exp(-iv * a)) / iv;
  }
  if (lo >= 0.0) return {};
  const double a = lo;
  const double b = std::min(hi, 0.0);
  // (1 - e^y) e^{-ivy} from a to b
  return -(std::exp(-iv * b) - std::exp(-iv * a)) / iv -
         (std::exp(one_minus_iv * b) - std::exp(one_minus_iv * a)) / one_minus_iv;
}

bool is_power_of_two(int n) { return n > 0 && std::has_single_bit(static_cast<unsigned>(n)); }

}  // namespace

double SwiftParams::scale() const { return std::ldexp(1.0, m); }

void SwiftParams::validate() const {
  if (eta <= 0) throw InvalidInput("SwiftParams: eta must be positive");
  if (!is_power_of_two(j_density) || !is_power_of_two(j_payoff)) {
    throw InvalidInput("SwiftParams: J_d and J_p must be powers of two");
  }
  if (!(2 * eta < j_density) || !(2 * eta < j_payoff)) {
    throw InvalidInput("SwiftParams: require 2 eta < J (eta=" + std::to_string(eta) +
                       ", J_d=" + std::to_string(j_density) +
                       ", J_p=" + std::to_string(j_payoff) + ")");
  }
  if (!(x_low <= 0.0 && 0.0 <= x_high)) {
    throw InvalidInput("SwiftParams: interval must contain 0");
  }
  if (!(c > 0.0)) throw InvalidInput("SwiftParams: c must be positive");
}

int choose_cosine_terms(int m, int eta, double x_low, double x_high) {
  const double reach = std::max(std::abs(x_low), std::abs(x_high));
  const double needed = 0.5 * kPi * (std::ldexp(reach, m) + eta);
  int j_terms = 2;
  while (!(2 * eta < j_terms) || j_terms < needed) j_terms *= 2;
  return j_terms;
}

double tail_mass(const HestonParams& theta, double tau, const MarketContext& ctx, double xi,
                 int panels) {
  const double lo = xi, hi = 4.0 * xi;
  const double h = (hi - lo) / panels;
  double sum = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double weight = (i == 0 || i == panels) ? 0.5 : 1.0;
    sum += weight * std::abs(chf_cui(lo + i * h, tau, theta, ctx));
  }
  // |f(-u)| = |f(u)|, so both tails together are (1/pi) int_xi^inf.
  return sum * h / kPi;
}

int select_scale(const HestonParams& theta, double tau, const MarketContext& ctx, double tol,
                 const ScaleOptions& options) {
  if (!(tol > 0.0 && tol < 1.0)) throw InvalidInput("select_scale: tol must lie in (0, 1)");
  theta.validate();
  for (int m = options.m_min; m <= options.m_cap; ++m) {
    if (tail_mass(theta, tau, ctx, std::ldexp(kPi, m), options.panels) <= tol) return m;
  }
  throw NoConvergence("select_scale: tail mass above " + std::to_string(tol) +
                      " at the scale cap m=" + std::to_string(options.m_cap));
}

SwiftParams select_truncation(const HestonParams& theta, double tau, const MarketContext& ctx,
                              int m, std::span<const double> strikes, double L,
                              const TruncationOptions& options) {
  if (strikes.empty()) throw InvalidInput("select_truncation: no strikes");
  if (!(L > 0.0)) throw InvalidInput("select_truncation: L must be positive");
  const Cumulants cum = cumulants(theta, tau, ctx);
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  for (double k : strikes) {
    if (!(k > 0.0)) throw InvalidInput("select_truncation: strikes must be positive");
    const double x = std::log(ctx.spot / k);
    x_min = std::min(x_min, x);
    x_max = std::max(x_max, x);
  }

  for (int scale = m; scale <= options.m_cap; ++scale) {
    double width = L;
    for (int attempt = 0; attempt <= options.max_widenings; ++attempt, width *= options.widen_factor) {
      SwiftParams sp;
      sp.m = scale;
      sp.c = std::abs(cum.c1) + width * std::sqrt(cum.c2 + std::sqrt(cum.c4));
      sp.c = std::max(sp.c, std::ldexp(1.0, -scale));  // at least one wavelet width
      sp.x_low = std::min(x_min - sp.c, 0.0);
      sp.x_high = std::max(x_max + sp.c, 0.0);
      sp.eta = static_cast<int>(
          std::ceil(std::ldexp(std::max(std::abs(sp.x_low), sp.x_high), scale)));
      sp.eta = std::max(sp.eta, 1);
      sp.j_density = sp.j_payoff = choose_cosine_terms(scale, sp.eta, sp.x_low, sp.x_high);

      bool covered = true;
      for (double x : {x_min, x_max}) {
        const double area = density_area(density_coefficients(theta, tau, ctx, x, sp), sp);
        if (!(std::abs(area - 1.0) <= options.area_tol)) {
          covered = false;
          break;
        }
      }
      if (covered) return sp;
    }
  }
  throw NoConvergence("select_truncation: density area check failed up to m=" +
                      std::to_string(options.m_cap));
}

std::vector<double> density_coefficients(const HestonParams& theta, double tau,
                                         const MarketContext& ctx, double x,
                                         const SwiftParams& sp) {
  sp.validate();
  const std::vector<double> u = cosine_nodes(sp.j_density);
  const double scale = sp.scale();
  std::vector<cplx> g(sp.j_density);
  for (int j = 0; j < sp.j_density; ++j) {
    const double freq = scale * u[j];
    g[j] = chf_cui(freq, tau, theta, ctx) * std::polar(1.0, -freq * x);
  }
  const std::vector<cplx> sums = sum_over_nodes(g, sp.eta);
  const double factor = std::sqrt(scale) / sp.j_density;
  std::vector<double> density(sums.size());
  for (std::size_t i = 0; i < sums.size(); ++i) density[i] = factor * sums[i].real();
  return density;
}

std::vector<double> payoff_coefficients(const SwiftParams& sp, OptionKind kind) {
  sp.validate();
  const std::vector<double> u = cosine_nodes(sp.j_payoff);
  const double scale = sp.scale();
  std::vector<cplx> transform(sp.j_payoff);
  for (int j = 0; j < sp.j_payoff; ++j) {
    transform[j] = payoff_transform(kind, scale * u[j], sp.x_low, sp.x_high);
  }
  const std::vector<cplx> sums = sum_over_nodes(transform, sp.eta);
  const double factor = std::sqrt(scale) / sp.j_payoff;
  std::vector<double> payoff(sums.size());
  for (std::size_t i = 0; i < sums.size(); ++i) payoff[i] = factor * sums[i].real();
  return payoff;
}

double density_area(std::span<const double> density, const SwiftParams& sp) {
  if (density.empty()) return 0.0;
  double sum = 0.0;
  for (double d : density) sum += d;
  sum -= 0.5 * (density.front() + density.back());
  return sum / std::sqrt(sp.scale());
}

CoefficientSet make_coefficient_set(const HestonParams& theta, double tau,
                                     const MarketContext& ctx, double x, const SwiftParams& sp,
                                     OptionKind kind) {
  CoefficientSet set;
  set.density = density_coefficients(theta, tau, ctx, x, sp);
  set.payoff = payoff_coefficients(sp, kind);
  set.u_tilde = sum_over_wavelets(set.payoff, sp.eta, sp.j_density);
  const std::vector<double> u = cosine_nodes(sp.j_density);
  set.f_cached.resize(sp.j_density);
  for (int j = 0; j < sp.j_density; ++j) set.f_cached[j] = chf_cui(sp.scale() * u[j], tau, theta, ctx);
  return set;
}

double price_single(const HestonParams& theta, const MarketContext& ctx, const OptionQuote& quote,
                    const SwiftParams& sp) {
  quote.validate();
  const double tau = quote.maturity;
  const double x = std::log(ctx.spot / quote.strike);
  const std::vector<double> density = density_coefficients(theta, tau, ctx, x, sp);
  const std::vector<double> payoff = payoff_coefficients(sp, OptionKind::put);
  double sum = 0.0;
  for (std::size_t k = 0; k < density.size(); ++k) sum += density[k] * payoff[k];
  const double put = quote.strike * std::exp(-ctx.rate * tau) * sum;
  return quote.kind == OptionKind::put ? put : call_from_put(put, quote.strike, tau, ctx);
}

KSwiftPricer::KSwiftPricer(const MarketContext& ctx, double tau, std::vector<double> strikes,
                           const SwiftParams& sp)
    : ctx_(ctx), tau_(tau), strikes_(std::move(strikes)), sp_(sp) {
  sp_.validate();
  ctx_.validate();
  if (!(tau_ > 0.0)) throw InvalidInput("KSwiftPricer: maturity must be positive");
  const int j_terms = sp_.j_density;
  const std::vector<double> u = cosine_nodes(j_terms);
  frequencies_.resize(j_terms);
  for (int j = 0; j < j_terms; ++j) frequencies_[j] = sp_.scale() * u[j];

  u_tilde_ = sum_over_wavelets(payoff_coefficients(sp_, OptionKind::put), sp_.eta, j_terms);

  phases_.resize(strikes_.size() * j_terms);
  for (std::size_t i = 0; i < strikes_.size(); ++i) {
    if (!(strikes_[i] > 0.0)) throw InvalidInput("KSwiftPricer: strikes must be positive");
    const double x = std::log(ctx_.spot / strikes_[i]);
    for (int j = 0; j < j_terms; ++j) phases_[i * j_terms + j] = std::polar(1.0, -frequencies_[j] * x);
  }
}

std::vector<double> KSwiftPricer::prices(const HestonParams& theta) const {
  const int j_terms = sp_.j_density;
  std::vector<cplx> weighted(j_terms);
  for (int j = 0; j < j_terms; ++j) {
    weighted[j] = chf_cui(frequencies_[j], tau_, theta, ctx_) * u_tilde_[j];
  }
  const double factor = std::exp(-ctx_.rate * tau_) * std::sqrt(sp_.scale()) / j_terms;
  std::vector<double> out(strikes_.size());
  for (std::size_t i = 0; i < strikes_.size(); ++i) {
    const cplx* phase = phases_.data() + i * j_terms;
    double sum = 0.0;
    for (int j = 0; j < j_terms; ++j) {
      sum += weighted[j].real() * phase[j].real() - weighted[j].imag() * phase[j].imag();
    }
    out[i] = call_from_put(strikes_[i] * factor * sum, strikes_[i], tau_, ctx_);
  }
  return out;
}

void KSwiftPricer::price_and_gradient(const HestonParams& theta, std::span<double> prices,
                                      Jacobian& jacobian) const {
  const int j_terms = sp_.j_density;
  const std::size_t n = strikes_.size();
  // Column 0 holds F_j U~_j, columns 1..5 hold (h F)_j U~_j.
  std::vector<cplx> weighted(static_cast<std::size_t>(j_terms) * (kNumParams + 1));
  for (int j = 0; j < j_terms; ++j) {
    const ChfEvaluation ev = chf_gradient(frequencies_[j], tau_, theta, ctx_);
    cplx* row = weighted.data() + static_cast<std::size_t>(j) * (kNumParams + 1);
    row[0] = ev.value * u_tilde_[j];
    for (int p = 0; p < kNumParams; ++p) row[p + 1] = (*ev.gradient)[p] * u_tilde_[j];
  }
  const double factor = std::exp(-ctx_.rate * tau_) * std::sqrt(sp_.scale()) / j_terms;
  jacobian.resize(static_cast<Eigen::Index>(n), kNumParams);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx* phase = phases_.data() + i * j_terms;
    std::array<double, kNumParams + 1> sums{};
    for (int j = 0; j < j_terms; ++j) {
      const cplx* row = weighted.data() + static_cast<std::size_t>(j) * (kNumParams + 1);
      const double pr = phase[j].real(), pi = phase[j].imag();
      for (int p = 0; p <= kNumParams; ++p) sums[p] += row[p].real() * pr - row[p].imag() * pi;
    }
    const double scaled = strikes_[i] * factor;
    prices[i] = call_from_put(scaled * sums[0], strikes_[i], tau_, ctx_);
    for (int p = 0; p < kNumParams; ++p) jacobian(static_cast<Eigen::Index>(i), p) = scaled * sums[p + 1];
  }
}

std::vector<double> price_multi_strike(const HestonParams& theta, const MarketContext& ctx,
                                       double tau, std::span<const double> strikes,
                                       const SwiftParams& sp) {
  return KSwiftPricer(ctx, tau, {strikes.begin(), strikes.end()}, sp).prices(theta);
}

PriceAndGradient price_and_gradient_multi_strike(const HestonParams& theta,
                                                 const MarketContext& ctx, double tau,
                                                 std::span<const double> strikes,
                                                 const SwiftParams& sp) {
  const KSwiftPricer pricer(ctx, tau, {strikes.begin(), strikes.end()}, sp);
  PriceAndGradient out;
  out.prices.resize(strikes.size());
  pricer.price_and_gradient(theta, out.prices, out.jacobian);
  return out;
}

std::vector<GridPoint> price_strike_grid(const HestonParams& theta, const MarketContext& ctx,
                                         double tau, const SwiftParams& sp) {
  sp.validate();
  const int j_terms = sp.j_density;
  const int n = 2 * j_terms;
  const std::vector<double> u = cosine_nodes(j_terms);
  const std::vector<cplx> u_tilde =
      sum_over_wavelets(payoff_coefficients(sp, OptionKind::put), sp.eta, j_terms);

  // With 2^m x_k = k - J/2 the phase e^{-i 2^m u_j x_k} splits into
  // e^{i pi k / 2J} e^{-2 pi i j k / 2J} e^{i pi (2j - 1) / 4}.
  std::vector<cplx> in(n, cplx{}), out(n);
  for (int j = 1; j <= j_terms; ++j) {
    in[j] = chf_cui(sp.scale() * u[j - 1], tau, theta, ctx) * u_tilde[j - 1] *
            std::polar(1.0, kPi * (2.0 * j - 1.0) / 4.0);
  }
  fft::dft(in, out, fft::Sign::negative);

  const double factor = std::exp(-ctx.rate * tau) * std::sqrt(sp.scale()) / j_terms;
  std::vector<GridPoint> grid(j_terms);
  for (int k = 0; k < j_terms; ++k) {
    GridPoint& point = grid[k];
    point.x = (2.0 * k - j_terms) / std::ldexp(1.0, sp.m + 1);
    point.strike = ctx.spot * std::exp(-point.x);
    const double put = point.strike * factor * (std::polar(1.0, kPi * k / n) * out[k]).real();
    point.price = call_from_put(put, point.strike, tau, ctx);
  }
  return grid;
}

double price_single_unaccelerated(const HestonParams& theta, const MarketContext& ctx,
                                  const OptionQuote& quote, const SwiftParams& sp,
                                  ParamVector* gradient) {
  quote.validate();
  sp.validate();
  const double tau = quote.maturity;
  const double x = std::log(ctx.spot / quote.strike);
  const std::vector<double> payoff = payoff_coefficients(sp, OptionKind::put);
  const std::vector<double> u = cosine_nodes(sp.j_density);
  const double scale = sp.scale();

  double price_sum = 0.0;
  std::array<double, kNumParams> grad_sum{};
  for (int k = sp.k_min(); k <= sp.eta; ++k) {
    double coefficient = 0.0;
    std::array<double, kNumParams> coefficient_grad{};
    for (int j = 0; j < sp.j_density; ++j) {
      const double freq = scale * u[j];
      const cplx phase = std::polar(1.0, k * u[j] - freq * x);
      if (gradient != nullptr) {
        const ChfEvaluation ev = chf_gradient(freq, tau, theta, ctx);
        coefficient += (ev.value * phase).real();
        for (int p = 0; p < kNumParams; ++p) coefficient_grad[p] += ((*ev.gradient)[p] * phase).real();
      } else {
        coefficient += (chf_cui(freq, tau, theta, ctx) * phase).real();
      }
    }
    const double weight = payoff[k - sp.k_min()];
    price_sum += coefficient * weight;
    for (int p = 0; p < kNumParams; ++p) grad_sum[p] += coefficient_grad[p] * weight;
  }
  const double factor = quote.strike * std::exp(-ctx.rate * tau) * std::sqrt(scale) / sp.j_density;
  if (gradient != nullptr) {
    for (int p = 0; p < kNumParams; ++p) (*gradient)[p] = factor * grad_sum[p];
  }
  const double put = factor * price_sum;
  return quote.kind == OptionKind::put ? put : call_from_put(put, quote.strike, tau, ctx);
}

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)), m_(x_.size(), 0.0) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw InvalidInput("spline: need at least two matching points");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) throw InvalidInput("spline: abscissae must increase strictly");
  }
  if (n == 2) return;
  // Tridiagonal system for interior second derivatives (Thomas algorithm).
  std::vector<double> diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
    const double lower = h0 / 6.0;
    diag[i] = (h0 + h1) / 3.0;
    upper[i] = h1 / 6.0;
    rhs[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
    if (i > 1) {
      const double w = lower / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
    if (i == 1) break;
  }
}

double NaturalCubicSpline::operator()(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  i = std::min(i, x_.size() - 2);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h;
  const double b = (x - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

}  // namespace hswift
