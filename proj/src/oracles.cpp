#include "xva/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace xva {

namespace {

void check_funding_assumptions(const LimitCaseSpec& spec, const std::vector<ScheduledFlow>& flows) {
    if (spec.lambda_investor != 0.0)
        throw std::domain_error("funding oracle: investor default intensity must be zero");
    if (spec.recovery_investor != 0.0 || spec.recovery_counterparty != 0.0)
        throw std::domain_error("funding oracle: recoveries must be zero");
    for (const auto& f : flows)
        if (f.amount < 0.0)
            throw std::domain_error("funding oracle: payoff must be non-negative");
}

}  // namespace

double collateral_discount_price(const LimitCaseSpec& spec, const std::vector<ScheduledFlow>& flows) {
    double v = 0.0;
    for (const auto& f : flows)
        v += f.amount * std::exp(-spec.collateral_rate * f.time);
    return v;
}

double funding_discount_price(const LimitCaseSpec& spec, const std::vector<ScheduledFlow>& flows) {
    check_funding_assumptions(spec, flows);
    double v = 0.0;
    for (const auto& f : flows)
        v += f.amount * std::exp(-(spec.funding_rate_plus + spec.lambda_counterparty) * f.time);
    return v;
}

double risk_free_price(const LimitCaseSpec& spec, const std::vector<ScheduledFlow>& flows) {
    double v = 0.0;
    for (const auto& f : flows)
        v += f.amount * spec.risk_free.discount(f.time);
    return v;
}

double discrete_recursion_oracle(const LimitCaseSpec& spec, const std::vector<double>& dates,
                                 const std::vector<ScheduledFlow>& flows) {
    using Kind = LimitCaseSpec::Kind;
    if (spec.kind == Kind::RiskFree)
        return risk_free_price(spec, flows);
    if (spec.kind == Kind::FundingWithoutCollateral)
        check_funding_assumptions(spec, flows);
    if (dates.empty() || dates.front() != 0.0)
        throw std::invalid_argument("discrete oracle: dates must start at 0");
    double v = 0.0;
    for (const auto& f : flows) {
        double factor = 1.0;
        bool reached = f.time == 0.0;
        for (std::size_t i = 0; i + 1 < dates.size() && !reached; ++i) {
            double dt = dates[i + 1] - dates[i];
            if (spec.kind == Kind::FundingWithoutCollateral)
                factor *= std::exp(-spec.lambda_counterparty * dt) / (1.0 + dt * spec.funding_rate_plus);
            else
                factor *= 1.0 / (1.0 + dt * spec.collateral_rate);
            reached = std::abs(dates[i + 1] - f.time) <= 1e-12;
        }
        if (!reached)
            throw std::invalid_argument("discrete oracle: flow time not on the date grid");
        v += f.amount * factor;
    }
    return v;
}

double limit_price(const LimitCaseSpec& spec, const std::vector<ScheduledFlow>& flows) {
    switch (spec.kind) {
    case LimitCaseSpec::Kind::CollateralDiscounting:
    case LimitCaseSpec::Kind::FundingWithCollateral:
        return collateral_discount_price(spec, flows);
    case LimitCaseSpec::Kind::FundingWithoutCollateral:
        return funding_discount_price(spec, flows);
    case LimitCaseSpec::Kind::RiskFree:
        return risk_free_price(spec, flows);
    }
    return 0.0;
}

}  // namespace xva
