#pragma once

#include <vector>

#include "xva/curve.hpp"

namespace xva {

/// Closed-form limiting cases with deterministic inputs. Rates are
/// annualized; c and f+ are absolute simple rates per accrual period and
/// continuously compounded in the continuous limit.
struct LimitCaseSpec {
    enum class Kind { CollateralDiscounting, FundingWithCollateral, FundingWithoutCollateral, RiskFree };
    Kind kind = Kind::RiskFree;
    Curve risk_free = Curve::flat(0.0);
    double collateral_rate = 0.0;
    double funding_rate_plus = 0.0;
    double lambda_counterparty = 0.0;
    // Assumptions the funding closed form needs; checked, not used.
    double lambda_investor = 0.0;
    double recovery_investor = 0.0;
    double recovery_counterparty = 0.0;
    double horizon = 1.0;
};

struct ScheduledFlow {
    double time;
    double amount;
};

/// Sum of flows times exp(-c u).
double collateral_discount_price(const LimitCaseSpec& spec, const std::vector<ScheduledFlow>& flows);

/// Sum of flows times exp(-(f+ + lambda_C) u). Throws std::domain_error
/// unless lambda_I = 0, both recoveries are zero and every flow is
/// non-negative.
double funding_discount_price(const LimitCaseSpec& spec, const std::vector<ScheduledFlow>& flows);

/// Sum of flows times P(0,u).
double risk_free_price(const LimitCaseSpec& spec, const std::vector<ScheduledFlow>& flows);

/// The same limits evaluated on a discrete grid of accrual dates (which
/// must contain every flow time): products of one-period collateral bonds
/// 1/(1+c dt), or of funding bonds 1/(1+f+ dt) times exp(-lambda_C dt).
double discrete_recursion_oracle(const LimitCaseSpec& spec, const std::vector<double>& dates,
                                 const std::vector<ScheduledFlow>& flows);

/// Continuous-limit value for the requested case.
double limit_price(const LimitCaseSpec& spec, const std::vector<ScheduledFlow>& flows);

}  // namespace xva
