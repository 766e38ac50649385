#include "hswift/heston.hpp"

#include <cmath>
#include <sstream>

#include "hswift/errors.hpp"

namespace hswift {

namespace {

constexpr cplx kI{0.0, 1.0};

cplx checked_exp(cplx exponent, const char* what) {
  const cplx value = std::exp(exponent);
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
    throw OverflowError(std::string(what) + ": characteristic function is not finite");
  }
  return value;
}

// e^z - 1 without cancellation for small |z|.
cplx expm1(cplx z) {
  const double x = z.real(), y = z.imag();
  const double half = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * half * half, std::exp(x) * std::sin(y)};
}

// log(1 + z), principal branch, accurate for small |z|.
cplx log1p(cplx z) {
  const cplx w = 1.0 + z;
  const cplx dw = w - 1.0;
  if (dw == cplx{}) return z;
  return std::log(w) * (z / dw);
}

// Quantities shared by the value and the gradient of the exponential form.
// With s = d + xi and d - xi = sigma^2 w / s computed as a quotient, the
// exponent is kappa v_bar G / sigma^2 - A where G = rho tau iu sigma + 2 D is
// O(sigma^2) and is formed without cancellation. The direct form subtracts
// terms of size 1/sigma^2 and loses most digits of the sigma and rho
// derivatives once sigma is small.
struct CuiTerms {
  cplx iu, w, xi, d, s, dmx, e, one_minus_e, m, q, a, g;
};

CuiTerms cui_terms(cplx u, double tau, const HestonParams& p) {
  CuiTerms t;
  t.iu = kI * u;
  t.w = u * u - t.iu;
  t.xi = p.kappa + p.sigma * p.rho * t.iu;
  t.d = std::sqrt(t.xi * t.xi + p.sigma * p.sigma * t.w);
  t.s = t.d + t.xi;
  t.dmx = p.sigma * p.sigma * t.w / t.s;
  t.e = std::exp(-t.d * tau);
  t.one_minus_e = -expm1(-t.d * tau);
  // m = 2 v0 A2 e^{-d tau / 2}
  t.m = t.s + t.dmx * t.e;
  t.q = t.dmx * t.one_minus_e / t.m;  // 2 d / m - 1
  t.a = p.v0 * t.w * t.one_minus_e / t.m;
  t.g = -t.dmx * tau + 2.0 * log1p(t.q);
  return t;
}

cplx cui_exponent(const CuiTerms& t, double tau, const HestonParams& p,
                  const MarketContext& ctx) {
  const double drift = (ctx.rate - ctx.dividend) * tau;
  return -t.iu * drift + p.kappa * p.v_bar / (p.sigma * p.sigma) * t.g - t.a;
}

// Derivatives of A and G along one of kappa, rho, sigma, given d xi and
// d sigma for that direction.
struct Partials {
  cplx a, g;
};

Partials partials(const CuiTerms& t, double tau, const HestonParams& p, cplx dxi, double dsigma) {
  const cplx dd = (t.xi * dxi + p.sigma * dsigma * t.w) / t.d;
  const cplx ds = dd + dxi;
  const cplx ddmx = (2.0 * p.sigma * dsigma * t.w - t.dmx * ds) / t.s;
  const cplx de = -tau * t.e * dd;
  const cplx dm = ds + ddmx * t.e + t.dmx * de;
  const cplx dq = (ddmx * t.one_minus_e - t.dmx * de - t.q * dm) / t.m;
  Partials out;
  out.a = p.v0 * t.w * (-de * t.m - t.one_minus_e * dm) / (t.m * t.m);
  out.g = -ddmx * tau + 2.0 * dq / (1.0 + t.q);
  return out;
}

}  // namespace

void HestonParams::validate() const {
  if (!(kappa > 0.0) || !(v_bar > 0.0) || !(sigma > 0.0) || !(v0 > 0.0)) {
    throw InvalidInput("Heston parameters kappa, v_bar, sigma, v0 must be positive: " +
                       to_string());
  }
  if (!(rho >= -1.0 && rho <= 1.0)) {
    throw InvalidInput("Heston correlation must lie in [-1, 1]: " + to_string());
  }
}

ParamVector HestonParams::to_vector() const {
  ParamVector v{};
  v[kV0] = v0;
  v[kVBar] = v_bar;
  v[kSigma] = sigma;
  v[kKappa] = kappa;
  v[kRho] = rho;
  return v;
}

HestonParams HestonParams::from_vector(const ParamVector& v) {
  HestonParams p;
  p.v0 = v[kV0];
  p.v_bar = v[kVBar];
  p.sigma = v[kSigma];
  p.kappa = v[kKappa];
  p.rho = v[kRho];
  return p;
}

std::string HestonParams::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << "(kappa=" << kappa << ", v_bar=" << v_bar << ", sigma=" << sigma << ", rho=" << rho
     << ", v0=" << v0 << ")";
  return os.str();
}

void MarketContext::validate() const {
  if (!(spot > 0.0)) throw InvalidInput("spot must be positive");
  if (!std::isfinite(rate) || !std::isfinite(dividend)) {
    throw InvalidInput("rate and dividend must be finite");
  }
}

ChfForm parse_chf_form(const std::string& name) {
  if (name == "cui") return ChfForm::cui;
  if (name == "schoutens") return ChfForm::schoutens;
  throw InvalidInput("unknown characteristic function form '" + name + "'");
}

const char* to_string(ChfForm form) {
  return form == ChfForm::cui ? "cui" : "schoutens";
}

cplx chf_cui(cplx u, double tau, const HestonParams& theta, const MarketContext& ctx) {
  const CuiTerms t = cui_terms(u, tau, theta);
  return checked_exp(cui_exponent(t, tau, theta, ctx), "chf_cui");
}

cplx chf_schoutens(cplx u, double tau, const HestonParams& theta, const MarketContext& ctx) {
  const double s2 = theta.sigma * theta.sigma;
  const cplx iu = kI * u;
  const cplx xi = theta.kappa + theta.sigma * theta.rho * iu;
  const cplx d = std::sqrt(xi * xi + s2 * (u * u - iu));
  const cplx g = (xi - d) / (xi + d);
  const cplx e = std::exp(-d * tau);
  const cplx exponent = -iu * (ctx.rate - ctx.dividend) * tau +
                        theta.kappa * theta.v_bar / s2 *
                            ((xi - d) * tau - 2.0 * std::log((1.0 - g * e) / (1.0 - g))) +
                        theta.v0 / s2 * (xi - d) * (1.0 - e) / (1.0 - g * e);
  return checked_exp(exponent, "chf_schoutens");
}

cplx chf(ChfForm form, cplx u, double tau, const HestonParams& theta, const MarketContext& ctx) {
  return form == ChfForm::cui ? chf_cui(u, tau, theta, ctx) : chf_schoutens(u, tau, theta, ctx);
}

ChfEvaluation chf_gradient(cplx u, double tau, const HestonParams& theta,
                           const MarketContext& ctx) {
  const CuiTerms t = cui_terms(u, tau, theta);
  const cplx value = checked_exp(cui_exponent(t, tau, theta, ctx), "chf_gradient");

  const double kappa = theta.kappa, v_bar = theta.v_bar, sigma = theta.sigma;
  const double s2 = sigma * sigma;
  const double kv = kappa * v_bar / s2;

  const Partials by_kappa = partials(t, tau, theta, 1.0, 0.0);
  const Partials by_rho = partials(t, tau, theta, sigma * t.iu, 0.0);
  const Partials by_sigma = partials(t, tau, theta, theta.rho * t.iu, 1.0);

  ParamGradient h;
  h[kV0] = -t.a / theta.v0;
  h[kVBar] = kappa / s2 * t.g;
  h[kSigma] = kv * (by_sigma.g - 2.0 * t.g / sigma) - by_sigma.a;
  h[kKappa] = v_bar / s2 * t.g + kv * by_kappa.g - by_kappa.a;
  h[kRho] = kv * by_rho.g - by_rho.a;

  ChfEvaluation out{value, ParamGradient{}};
  for (int i = 0; i < kNumParams; ++i) {
    (*out.gradient)[i] = h[i] * value;
    if (!std::isfinite((*out.gradient)[i].real()) || !std::isfinite((*out.gradient)[i].imag())) {
      throw OverflowError("chf_gradient: gradient is not finite");
    }
  }
  return out;
}

Cumulants cumulants(const HestonParams& theta, double tau, const MarketContext& ctx) {
  const double k = theta.kappa, vb = theta.v_bar, s = theta.sigma, rho = theta.rho, v0 = theta.v0;
  const double ekt = std::exp(-k * tau);
  const double e2kt = ekt * ekt;

  Cumulants c;
  c.c1 = (ctx.rate - ctx.dividend) * tau + (1.0 - ekt) * (vb - v0) / (2.0 * k) - 0.5 * vb * tau;
  c.c2 = (s * tau * k * ekt * (v0 - vb) * (8.0 * k * rho - 4.0 * s) +
          k * rho * s * (1.0 - ekt) * (16.0 * vb - 8.0 * v0) +
          2.0 * vb * k * tau * (-4.0 * k * rho * s + s * s + 4.0 * k * k) +
          s * s * ((vb - 2.0 * v0) * e2kt + vb * (4.0 * ekt - 5.0) + 2.0 * v0) +
          8.0 * k * k * (v0 - vb) * (1.0 - ekt)) /
         (8.0 * k * k * k);
  if (c.c2 < 0.0) c.c2 = 0.0;
  c.c4 = 0.0;
  return c;
}

namespace detail {

cplx chf_cui_unstabilized(cplx u, double tau, const HestonParams& p, const MarketContext& ctx) {
  const cplx iu = kI * u;
  const cplx w = u * u - iu;
  const cplx xi = p.kappa + p.sigma * p.rho * iu;
  const cplx d = std::sqrt(xi * xi + p.sigma * p.sigma * w);
  const cplx ch = std::cosh(0.5 * d * tau);
  const cplx sh = std::sinh(0.5 * d * tau);
  const cplx a1 = w * sh;
  const cplx a2 = d / p.v0 * ch + xi / p.v0 * sh;
  const cplx a = a1 / a2;
  const cplx big_d = std::log(d / p.v0) + 0.5 * (p.kappa - d) * tau -
                     std::log((d + xi) / (2.0 * p.v0) + (d - xi) / (2.0 * p.v0) * std::exp(-d * tau));
  const cplx exponent = -iu * (ctx.rate - ctx.dividend) * tau +
                        p.kappa * p.v_bar * p.rho * tau * iu / p.sigma - a +
                        2.0 * p.kappa * p.v_bar / (p.sigma * p.sigma) * big_d;
  return checked_exp(exponent, "chf_cui_unstabilized");
}

}  // namespace detail

}  // namespace hswift
