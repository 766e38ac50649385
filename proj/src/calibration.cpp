#include "hswift/calibration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <Eigen/Cholesky>

#include "hswift/errors.hpp"

namespace hswift {

namespace {

constexpr double kMuMin = 1e-12;
constexpr double kMuMax = 1e12;

Eigen::VectorXd observed_prices(const std::vector<OptionQuote>& quotes) {
  Eigen::VectorXd obs(static_cast<Eigen::Index>(quotes.size()));
  for (std::size_t i = 0; i < quotes.size(); ++i) {
    if (!quotes[i].price) throw InvalidInput("quote " + std::to_string(i) + " has no observed price");
    obs[static_cast<Eigen::Index>(i)] = *quotes[i].price;
  }
  return obs;
}

double norm2(const ParamVector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

ParamBounds ParamBounds::defaults() {
  ParamBounds b;
  b.lower[kV0] = 1e-6;
  b.upper[kV0] = 4.0;
  b.lower[kVBar] = 1e-6;
  b.upper[kVBar] = 4.0;
  b.lower[kSigma] = 1e-4;
  b.upper[kSigma] = 5.0;
  b.lower[kKappa] = 1e-4;
  b.upper[kKappa] = 50.0;
  b.lower[kRho] = -0.999;
  b.upper[kRho] = 0.999;
  return b;
}

bool ParamBounds::contains(const HestonParams& theta) const {
  const ParamVector v = theta.to_vector();
  for (int p = 0; p < kNumParams; ++p)
    if (!(v[p] >= lower[p] && v[p] <= upper[p])) return false;
  return true;
}

HestonParams ParamBounds::project(const HestonParams& theta) const {
  ParamVector v = theta.to_vector();
  for (int p = 0; p < kNumParams; ++p) v[p] = std::clamp(v[p], lower[p], upper[p]);
  return HestonParams::from_vector(v);
}

void CalibrationConfig::validate() const {
  if (!(eps1 > 0.0 && eps2 > 0.0 && eps3 > 0.0))
    throw InvalidInput("calibration tolerances must be positive");
  if (max_iterations <= 0) throw InvalidInput("max_iterations must be positive");
  for (int p = 0; p < kNumParams; ++p)
    if (!(bounds.lower[p] <= bounds.upper[p])) throw InvalidInput("empty parameter bound");
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::ResidualTol: return "ResidualTol";
    case StopReason::FlatGradient: return "FlatGradient";
    case StopReason::StagnantStep: return "StagnantStep";
    case StopReason::MaxIterations: return "MaxIterations";
  }
  return "?";
}

Eigen::VectorXd residuals(const HestonParams& theta, QuoteSetPricer& pricer, Jacobian* jacobian) {
  const Eigen::VectorXd obs = observed_prices(pricer.quotes());
  Eigen::VectorXd prices;
  pricer.evaluate(theta, prices, jacobian);
  return prices - obs;
}

Eigen::VectorXd residuals(const HestonParams& theta, const std::vector<OptionQuote>& quotes,
                          const MarketContext& ctx, const PricingBackend& backend) {
  observed_prices(quotes);
  QuoteSetPricer pricer(backend, quotes, ctx, theta);
  return residuals(theta, pricer);
}

ParamVector lm_step(const Jacobian& jacobian, const Eigen::VectorXd& residual, double mu) {
  if (!(mu > 0.0)) throw InvalidInput("lm_step: mu must be positive");
  if (jacobian.rows() != residual.size()) throw InvalidInput("lm_step: size mismatch");
  using Mat5 = Eigen::Matrix<double, kNumParams, kNumParams>;
  using Vec5 = Eigen::Matrix<double, kNumParams, 1>;
  const Mat5 a = jacobian.transpose() * jacobian + mu * Mat5::Identity();
  const Vec5 g = jacobian.transpose() * residual;
  const Eigen::LLT<Mat5> llt(a);
  if (llt.info() != Eigen::Success) throw SingularSystem("damped normal matrix is not positive definite");
  const Vec5 step = llt.solve(g);
  if (!step.allFinite()) throw SingularSystem("damped normal equations gave a non-finite step");
  ParamVector out;
  for (int p = 0; p < kNumParams; ++p) out[p] = step[p];
  return out;
}

CalibrationResult calibrate(const std::vector<OptionQuote>& quotes, const HestonParams& theta0,
                            const MarketContext& ctx, const CalibrationConfig& config,
                            const PricingBackend& backend) {
  config.validate();
  theta0.validate();
  if (!config.bounds.contains(theta0)) throw InvalidInput("initial guess outside bounds");
  const auto start = std::chrono::steady_clock::now();

  CalibrationResult result;
  QuoteSetPricer pricer(backend, quotes, ctx, theta0);
  HestonParams theta = theta0;
  Jacobian jac;
  Eigen::VectorXd r = residuals(theta, pricer, &jac);
  ++result.evaluations;
  double f = 0.5 * r.squaredNorm();

  auto finish = [&](StopReason reason) {
    result.theta_hat = theta;
    result.stop_reason = reason;
    result.final_objective = f;
    result.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
  };

  if (f <= config.eps1) return finish(StopReason::ResidualTol);
  double mu = config.mu0 > 0.0 ? config.mu0
                               : 1e-3 * (jac.transpose() * jac).diagonal().maxCoeff();
  mu = std::clamp(mu, kMuMin, kMuMax);

  // Rejected trials do not count as iterations; cap them so a hopeless
  // problem still terminates.
  const int max_trials = 10 * config.max_iterations;
  int trials = 0;
  while (result.iterations < config.max_iterations && trials < max_trials) {
    const Eigen::Matrix<double, kNumParams, 1> grad = jac.transpose() * r;
    if (grad.cwiseAbs().maxCoeff() <= config.eps2) return finish(StopReason::FlatGradient);

    ++trials;
    ParamVector step;
    try {
      step = lm_step(jac, r, mu);
      // Parameters pinned on a bound that the step pushes further out are
      // frozen (column zeroed) and the step is re-solved for the rest.
      const ParamVector now = theta.to_vector();
      Jacobian reduced = jac;
      bool frozen = false;
      for (int p = 0; p < kNumParams; ++p) {
        const double target = now[p] - step[p];
        if ((now[p] <= config.bounds.lower[p] && target < now[p]) ||
            (now[p] >= config.bounds.upper[p] && target > now[p])) {
          reduced.col(p).setZero();
          frozen = true;
        }
      }
      if (frozen) step = lm_step(reduced, r, mu);
    } catch (const SingularSystem&) {
      if (mu >= kMuMax) return finish(StopReason::StagnantStep);
      mu = std::min(mu * 10.0, kMuMax);
      continue;
    }
    ParamVector v = theta.to_vector();
    for (int p = 0; p < kNumParams; ++p) v[p] -= step[p];
    const HestonParams candidate = config.bounds.project(HestonParams::from_vector(v));

    const ParamVector now = theta.to_vector(), next = candidate.to_vector();
    ParamVector taken;
    for (int p = 0; p < kNumParams; ++p) taken[p] = next[p] - now[p];
    const double step_norm = norm2(taken);
    if (step_norm <= config.eps3 * norm2(now)) return finish(StopReason::StagnantStep);

    Jacobian jac_new;
    const Eigen::VectorXd r_new = residuals(candidate, pricer, &jac_new);
    ++result.evaluations;
    const double f_new = 0.5 * r_new.squaredNorm();
    if (std::isfinite(f_new) && f_new < f) {
      result.trace.push_back({f_new, mu, step_norm});
      ++result.iterations;
      theta = candidate;
      r = r_new;
      jac = std::move(jac_new);
      f = f_new;
      mu = std::max(mu / 10.0, kMuMin);
      if (f <= config.eps1) return finish(StopReason::ResidualTol);
    } else {
      if (mu >= kMuMax) return finish(StopReason::StagnantStep);
      mu = std::min(mu * 10.0, kMuMax);
    }
  }
  return finish(StopReason::MaxIterations);
}

}  // namespace hswift
