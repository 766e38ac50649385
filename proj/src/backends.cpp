#include "hswift/backends.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hswift/errors.hpp"

namespace hswift {

using nlohmann::json;

namespace {

std::vector<double> strikes_of(const std::vector<OptionQuote>& quotes) {
  std::vector<double> strikes;
  strikes.reserve(quotes.size());
  for (const auto& q : quotes) strikes.push_back(q.strike);
  return strikes;
}

double common_maturity(const std::vector<OptionQuote>& quotes) {
  if (quotes.empty()) throw InvalidInput("empty quote group");
  const double tau = quotes.front().maturity;
  for (const auto& q : quotes)
    if (q.maturity != tau) throw InvalidInput("quote group mixes maturities");
  return tau;
}

// Calls from the multi-strike pricer; puts by parity (same Jacobian row).
class KSwiftGroup : public GroupPricer {
 public:
  KSwiftGroup(const MarketContext& ctx, std::vector<OptionQuote> quotes, const SwiftParams& sp,
              bool rebuild)
      : ctx_(ctx), quotes_(std::move(quotes)), tau_(common_maturity(quotes_)), sp_(sp),
        rebuild_(rebuild) {
    if (!rebuild_) pricer_.emplace(ctx_, tau_, strikes_of(quotes_), sp_);
  }

  void evaluate(const HestonParams& theta, std::span<double> prices, Jacobian* jacobian) override {
    std::optional<KSwiftPricer> fresh;
    if (rebuild_) fresh.emplace(ctx_, tau_, strikes_of(quotes_), sp_);
    const KSwiftPricer& pricer = rebuild_ ? *fresh : *pricer_;
    if (jacobian != nullptr) {
      pricer.price_and_gradient(theta, prices, *jacobian);
    } else {
      const std::vector<double> calls = pricer.prices(theta);
      std::copy(calls.begin(), calls.end(), prices.begin());
    }
    for (std::size_t i = 0; i < quotes_.size(); ++i) {
      if (quotes_[i].kind == OptionKind::put)
        prices[i] = put_from_call(prices[i], quotes_[i].strike, tau_, ctx_);
    }
  }

  json describe() const override {
    return {{"maturity", tau_}, {"quotes", quotes_.size()}, {"swift", to_json(sp_)},
            {"recompute_each_call", rebuild_}};
  }

 private:
  MarketContext ctx_;
  std::vector<OptionQuote> quotes_;
  double tau_;
  SwiftParams sp_;
  bool rebuild_;
  std::optional<KSwiftPricer> pricer_;
};

class NaiveSwiftGroup : public GroupPricer {
 public:
  NaiveSwiftGroup(const MarketContext& ctx, std::vector<OptionQuote> quotes, const SwiftParams& sp)
      : ctx_(ctx), quotes_(std::move(quotes)), sp_(sp) {}

  void evaluate(const HestonParams& theta, std::span<double> prices, Jacobian* jacobian) override {
    if (jacobian != nullptr) jacobian->resize(static_cast<Eigen::Index>(quotes_.size()), kNumParams);
    for (std::size_t i = 0; i < quotes_.size(); ++i) {
      ParamVector grad{};
      prices[i] = price_single_unaccelerated(theta, ctx_, quotes_[i], sp_,
                                             jacobian != nullptr ? &grad : nullptr);
      if (jacobian != nullptr)
        for (int p = 0; p < kNumParams; ++p) (*jacobian)(static_cast<Eigen::Index>(i), p) = grad[p];
    }
  }

  json describe() const override {
    return {{"maturity", quotes_.front().maturity}, {"quotes", quotes_.size()},
            {"swift", to_json(sp_)}};
  }

 private:
  MarketContext ctx_;
  std::vector<OptionQuote> quotes_;
  SwiftParams sp_;
};

class CpGroup : public GroupPricer {
 public:
  CpGroup(const MarketContext& ctx, std::vector<OptionQuote> quotes, const QuadratureConfig& qc,
          ChfForm form)
      : ctx_(ctx), quotes_(std::move(quotes)), qc_(qc), form_(form) {}

  void evaluate(const HestonParams& theta, std::span<double> prices, Jacobian* jacobian) override {
    if (jacobian != nullptr) jacobian->resize(static_cast<Eigen::Index>(quotes_.size()), kNumParams);
    for (std::size_t i = 0; i < quotes_.size(); ++i) {
      if (jacobian == nullptr) {
        prices[i] = price_cp(theta, ctx_, quotes_[i], qc_, form_);
        continue;
      }
      ParamVector grad{};
      if (form_ == ChfForm::cui) {
        prices[i] = price_and_gradient_cp(theta, ctx_, quotes_[i], qc_, grad);
      } else {
        prices[i] = price_cp(theta, ctx_, quotes_[i], qc_, form_);
        grad = gradient_cp(theta, ctx_, quotes_[i], qc_, form_);
      }
      for (int p = 0; p < kNumParams; ++p) (*jacobian)(static_cast<Eigen::Index>(i), p) = grad[p];
    }
  }

  json describe() const override {
    return {{"quotes", quotes_.size()}, {"nodes", qc_.nodes}, {"u_max", qc_.u_max},
            {"chf_form", to_string(form_)}};
  }

 private:
  MarketContext ctx_;
  std::vector<OptionQuote> quotes_;
  QuadratureConfig qc_;
  ChfForm form_;
};

std::vector<std::vector<std::size_t>> one_per_quote(const std::vector<OptionQuote>& quotes) {
  std::vector<std::vector<std::size_t>> groups(quotes.size());
  for (std::size_t i = 0; i < quotes.size(); ++i) groups[i] = {i};
  return groups;
}

std::string describe_quote(const OptionQuote& q) {
  std::ostringstream out;
  out << to_string(q.kind) << " K=" << q.strike << " tau=" << q.maturity;
  return out.str();
}

}  // namespace

json to_json(const SwiftParams& sp) {
  return {{"m", sp.m},         {"eta", sp.eta},       {"j_density", sp.j_density},
          {"j_payoff", sp.j_payoff}, {"c", sp.c}, {"x_low", sp.x_low},
          {"x_high", sp.x_high}};
}

SwiftParams choose_swift_params(const HestonParams& theta, double tau, const MarketContext& ctx,
                                std::span<const double> strikes, const SwiftSettings& settings) {
  const int m = settings.m ? *settings.m : select_scale(theta, tau, ctx, settings.scale_tol);
  TruncationOptions options = settings.truncation;
  if (settings.m) options.m_cap = std::max(options.m_cap, *settings.m);
  SwiftParams sp;
  if (settings.eta || settings.j) {
    // Overrides bypass the adaptive search: honor exactly what was asked.
    options.max_widenings = 0;
    options.area_tol = std::numeric_limits<double>::infinity();
    options.m_cap = m;
  }
  sp = select_truncation(theta, tau, ctx, m, strikes, settings.L, options);
  if (settings.eta) sp.eta = *settings.eta;
  if (settings.j) sp.j_density = sp.j_payoff = *settings.j;
  else if (settings.eta) sp.j_density = sp.j_payoff = choose_cosine_terms(sp.m, sp.eta, sp.x_low, sp.x_high);
  sp.validate();
  return sp;
}

std::vector<std::vector<std::size_t>> group_by_maturity(const std::vector<OptionQuote>& quotes) {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<double> keys;
  for (std::size_t i = 0; i < quotes.size(); ++i) {
    std::size_t g = 0;
    while (g < keys.size() && keys[g] != quotes[i].maturity) ++g;
    if (g == keys.size()) {
      keys.push_back(quotes[i].maturity);
      groups.emplace_back();
    }
    groups[g].push_back(i);
  }
  return groups;
}

KSwiftBackend::KSwiftBackend(SwiftSettings settings, Grouping grouping)
    : settings_(std::move(settings)), grouping_(grouping) {}

std::string KSwiftBackend::name() const {
  return grouping_ == Grouping::by_maturity ? "kswift" : "kswift-per-quote";
}

std::vector<std::vector<std::size_t>> KSwiftBackend::group(
    const std::vector<OptionQuote>& quotes) const {
  return grouping_ == Grouping::by_maturity ? group_by_maturity(quotes) : one_per_quote(quotes);
}

std::unique_ptr<GroupPricer> KSwiftBackend::prepare(const HestonParams& theta0,
                                                    const MarketContext& ctx,
                                                    const std::vector<OptionQuote>& quotes) const {
  const double tau = common_maturity(quotes);
  const SwiftParams sp = choose_swift_params(theta0, tau, ctx, strikes_of(quotes), settings_);
  return std::make_unique<KSwiftGroup>(ctx, quotes, sp, grouping_ == Grouping::per_quote);
}

NaiveSwiftBackend::NaiveSwiftBackend(SwiftSettings settings) : settings_(std::move(settings)) {}

std::vector<std::vector<std::size_t>> NaiveSwiftBackend::group(
    const std::vector<OptionQuote>& quotes) const {
  return group_by_maturity(quotes);
}

std::unique_ptr<GroupPricer> NaiveSwiftBackend::prepare(
    const HestonParams& theta0, const MarketContext& ctx,
    const std::vector<OptionQuote>& quotes) const {
  const double tau = common_maturity(quotes);
  const SwiftParams sp = choose_swift_params(theta0, tau, ctx, strikes_of(quotes), settings_);
  return std::make_unique<NaiveSwiftGroup>(ctx, quotes, sp);
}

CpBackend::CpBackend(QuadratureConfig qc, ChfForm form) : qc_(qc), form_(form) {
  qc_.validate();
}

std::vector<std::vector<std::size_t>> CpBackend::group(
    const std::vector<OptionQuote>& quotes) const {
  return one_per_quote(quotes);
}

std::unique_ptr<GroupPricer> CpBackend::prepare(const HestonParams&, const MarketContext& ctx,
                                                const std::vector<OptionQuote>& quotes) const {
  return std::make_unique<CpGroup>(ctx, quotes, qc_, form_);
}

QuoteSetPricer::QuoteSetPricer(const PricingBackend& backend, std::vector<OptionQuote> quotes,
                               const MarketContext& ctx, const HestonParams& theta0)
    : quotes_(std::move(quotes)), ctx_(ctx), groups_(backend.group(quotes_)) {
  ctx_.validate();
  theta0.validate();
  for (const auto& q : quotes_) q.validate();
  pricers_.reserve(groups_.size());
  for (const auto& indices : groups_) {
    std::vector<OptionQuote> members;
    for (std::size_t i : indices) members.push_back(quotes_[i]);
    try {
      pricers_.push_back(backend.prepare(theta0, ctx_, members));
    } catch (const OverflowError& e) {
      throw OverflowError("pricing " + describe_quote(members.front()) + ": " + e.what());
    }
  }
}

void QuoteSetPricer::evaluate(const HestonParams& theta, Eigen::VectorXd& prices,
                              Jacobian* jacobian) {
  const auto n = static_cast<Eigen::Index>(quotes_.size());
  prices.resize(n);
  if (jacobian != nullptr) jacobian->resize(n, kNumParams);
  std::vector<double> buffer;
  Jacobian block;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const auto& indices = groups_[g];
    buffer.assign(indices.size(), 0.0);
    ++group_calls_;
    try {
      pricers_[g]->evaluate(theta, buffer, jacobian != nullptr ? &block : nullptr);
    } catch (const OverflowError& e) {
      throw OverflowError("pricing " + describe_quote(quotes_[indices.front()]) + ": " + e.what());
    }
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(indices[i]);
      prices[row] = buffer[i];
      if (jacobian != nullptr) jacobian->row(row) = block.row(static_cast<Eigen::Index>(i));
    }
  }
}

json QuoteSetPricer::describe() const {
  json groups = json::array();
  for (const auto& p : pricers_) groups.push_back(p->describe());
  return groups;
}

std::unique_ptr<PricingBackend> make_backend(const std::string& name, const SwiftSettings& swift,
                                             const QuadratureConfig& qc, ChfForm form) {
  if (name == "kswift") return std::make_unique<KSwiftBackend>(swift, Grouping::by_maturity);
  if (name == "kswift-per-quote") return std::make_unique<KSwiftBackend>(swift, Grouping::per_quote);
  if (name == "swift") return std::make_unique<NaiveSwiftBackend>(swift);
  if (name == "cp") return std::make_unique<CpBackend>(qc, form);
  throw InvalidInput("unknown backend '" + name + "' (expected swift, kswift, kswift-per-quote, cp)");
}

}  // namespace hswift
