#pragma once

// Levenberg-Marquardt calibration of the five Heston parameters to prices.

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hswift/backends.hpp"
#include "hswift/heston.hpp"
#include "hswift/option.hpp"

namespace hswift {

struct ParamBounds {
  ParamVector lower;  // ParamIndex order
  ParamVector upper;

  static ParamBounds defaults();
  bool contains(const HestonParams& theta) const;
  HestonParams project(const HestonParams& theta) const;
};

struct CalibrationConfig {
  double eps1 = 1e-10;  // objective 0.5 |r|^2
  double eps2 = 1e-12;  // |J^T r|_inf
  double eps3 = 1e-12;  // |step| <= eps3 |theta|
  int max_iterations = 100;
  double mu0 = 0.0;     // <= 0: 1e-3 max diag(J^T J) at the start
  ParamBounds bounds = ParamBounds::defaults();

  void validate() const;
};

enum class StopReason { ResidualTol, FlatGradient, StagnantStep, MaxIterations };
const char* to_string(StopReason reason);

struct IterationRecord {
  double objective = 0.0;  // after the accepted step
  double mu = 0.0;         // damping used for the accepted step
  double step_norm = 0.0;
};

struct CalibrationResult {
  HestonParams theta_hat;
  int iterations = 0;  // accepted steps
  StopReason stop_reason = StopReason::MaxIterations;
  double final_objective = 0.0;
  double wall_time = 0.0;  // seconds, monotonic clock
  std::vector<IterationRecord> trace;
  std::size_t evaluations = 0;  // residual/Jacobian evaluations
};

/// r_i = V(theta; quote_i) - observed_i, in quote order. Every quote must
/// carry a price.
Eigen::VectorXd residuals(const HestonParams& theta, const std::vector<OptionQuote>& quotes,
                          const MarketContext& ctx, const PricingBackend& backend);

Eigen::VectorXd residuals(const HestonParams& theta, QuoteSetPricer& pricer,
                          Jacobian* jacobian = nullptr);

/// Solves (J^T J + mu I) dtheta = J^T r. jacobian rows are quotes. Throws
/// SingularSystem if the damped matrix is not positive definite.
ParamVector lm_step(const Jacobian& jacobian, const Eigen::VectorXd& residual, double mu);

/// theta_{n+1} = project(theta_n - dtheta). Pricing overflow propagates as
/// OverflowError naming the quote; everything else ends in a StopReason.
CalibrationResult calibrate(const std::vector<OptionQuote>& quotes, const HestonParams& theta0,
                            const MarketContext& ctx, const CalibrationConfig& config,
                            const PricingBackend& backend);

}  // namespace hswift
