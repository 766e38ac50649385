#pragma once

// Pricing backends used by the calibrator and the CLI. A backend splits a
// quote set into groups, and for each group builds a GroupPricer at the
// initial parameters (discretization choices are frozen there so that the
// objective is a smooth function of theta during calibration).

#include <atomic>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "hswift/heston.hpp"
#include "hswift/option.hpp"
#include "hswift/reference.hpp"
#include "hswift/swift.hpp"

namespace hswift {

struct SwiftSettings {
  std::optional<int> m;       // fixed scale; otherwise select_scale(scale_tol)
  double scale_tol = 1e-8;
  double L = 10.0;
  std::optional<int> eta;     // overrides the truncation rule
  std::optional<int> j;       // overrides both J_d and J_p
  TruncationOptions truncation;
};

/// Discretization for one maturity and a set of strikes, honoring overrides.
SwiftParams choose_swift_params(const HestonParams& theta, double tau, const MarketContext& ctx,
                                std::span<const double> strikes, const SwiftSettings& settings);

class GroupPricer {
 public:
  virtual ~GroupPricer() = default;
  /// Prices (and optionally Jacobian rows) for the group's quotes in group
  /// order. jacobian, if given, has one row per group quote.
  virtual void evaluate(const HestonParams& theta, std::span<double> prices,
                        Jacobian* jacobian) = 0;
  /// Per-group configuration for reports.
  virtual nlohmann::json describe() const = 0;
};

class PricingBackend {
 public:
  virtual ~PricingBackend() = default;
  virtual std::string name() const = 0;
  /// Index sets into quotes; every quote appears in exactly one group.
  virtual std::vector<std::vector<std::size_t>> group(
      const std::vector<OptionQuote>& quotes) const = 0;
  virtual std::unique_ptr<GroupPricer> prepare(const HestonParams& theta0,
                                               const MarketContext& ctx,
                                               const std::vector<OptionQuote>& quotes) const = 0;
};

enum class Grouping { by_maturity, per_quote };

/// Multi-strike SWIFT. by_maturity shares one characteristic-function sweep
/// per maturity; per_quote rebuilds all coefficients for every strike on
/// every evaluation (the worst case for the multi-strike reuse).
class KSwiftBackend : public PricingBackend {
 public:
  explicit KSwiftBackend(SwiftSettings settings = {}, Grouping grouping = Grouping::by_maturity);
  std::string name() const override;
  std::vector<std::vector<std::size_t>> group(const std::vector<OptionQuote>& quotes) const override;
  std::unique_ptr<GroupPricer> prepare(const HestonParams& theta0, const MarketContext& ctx,
                                       const std::vector<OptionQuote>& quotes) const override;

 private:
  SwiftSettings settings_;
  Grouping grouping_;
};

/// Unaccelerated SWIFT: same discretization as KSwiftBackend (by maturity)
/// but every quote is priced independently by direct summation.
class NaiveSwiftBackend : public PricingBackend {
 public:
  explicit NaiveSwiftBackend(SwiftSettings settings = {});
  std::string name() const override { return "swift"; }
  std::vector<std::vector<std::size_t>> group(const std::vector<OptionQuote>& quotes) const override;
  std::unique_ptr<GroupPricer> prepare(const HestonParams& theta0, const MarketContext& ctx,
                                       const std::vector<OptionQuote>& quotes) const override;

 private:
  SwiftSettings settings_;
};

/// Gauss-Legendre reference pricer, one quote at a time.
class CpBackend : public PricingBackend {
 public:
  explicit CpBackend(QuadratureConfig qc = {}, ChfForm form = ChfForm::cui);
  std::string name() const override { return "cp"; }
  std::vector<std::vector<std::size_t>> group(const std::vector<OptionQuote>& quotes) const override;
  std::unique_ptr<GroupPricer> prepare(const HestonParams& theta0, const MarketContext& ctx,
                                       const std::vector<OptionQuote>& quotes) const override;

 private:
  QuadratureConfig qc_;
  ChfForm form_;
};

/// Groups quotes by maturity in first-appearance order.
std::vector<std::vector<std::size_t>> group_by_maturity(const std::vector<OptionQuote>& quotes);

/// A quote set bound to a backend: groups prepared at theta0, results
/// scattered back into quote order.
class QuoteSetPricer {
 public:
  QuoteSetPricer(const PricingBackend& backend, std::vector<OptionQuote> quotes,
                 const MarketContext& ctx, const HestonParams& theta0);

  /// prices has size quotes().size(); jacobian (optional) is resized.
  /// OverflowError from a group is rethrown naming the first quote of it.
  void evaluate(const HestonParams& theta, Eigen::VectorXd& prices, Jacobian* jacobian);

  const std::vector<OptionQuote>& quotes() const { return quotes_; }
  std::size_t num_groups() const { return groups_.size(); }
  /// Number of GroupPricer::evaluate calls so far.
  std::size_t group_calls() const { return group_calls_; }
  nlohmann::json describe() const;

 private:
  std::vector<OptionQuote> quotes_;
  MarketContext ctx_;
  std::vector<std::vector<std::size_t>> groups_;
  std::vector<std::unique_ptr<GroupPricer>> pricers_;
  std::size_t group_calls_ = 0;
};

/// Backend by CLI name: swift, kswift, kswift-per-quote, cp.
std::unique_ptr<PricingBackend> make_backend(const std::string& name,
                                             const SwiftSettings& swift = {},
                                             const QuadratureConfig& qc = {},
                                             ChfForm form = ChfForm::cui);

nlohmann::json to_json(const SwiftParams& sp);

}  // namespace hswift
