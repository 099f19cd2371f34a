#pragma once

#include <vector>

namespace xva {

/// Simple (money-market) rate applied over one accrual period. Either an
/// absolute level or a spread over the risk-free simple forward of the
/// period; levels are piecewise constant in the period start.
struct AccrualRate {
    std::vector<double> ends;     // breakpoints of the level schedule
    std::vector<double> levels{0.0};
    bool spread_over_risk_free = false;

    static AccrualRate absolute(double level) { return {{}, {level}, false}; }
    static AccrualRate spread(double spread) { return {{}, {spread}, true}; }

    double level_at(double t) const;
    /// Rate for the period [t,T] given the risk-free bond P_t(T) on the path.
    double rate(double t, double T, double risk_free_bond) const;
    /// 1/(1+(T-t)*rate) for the period.
    double bond(double t, double T, double risk_free_bond) const;
};

/// Maps a reference price to the posted collateral amount:
/// sign(v) * max(alpha*|v| - threshold, 0), truncated toward zero to a
/// multiple of the minimum transfer amount.
struct CollateralRule {
    double alpha = 0.0;
    double threshold = 0.0;
    double mta = 0.0;

    double operator()(double reference) const;
    bool none() const noexcept { return alpha == 0.0; }
    bool perfect() const noexcept { return alpha == 1.0 && threshold == 0.0 && mta == 0.0; }
};

enum class CloseOutConvention { RiskFree, CollateralPrice, FundingInclusive };

/// What the collateral rule is applied to.
enum class CollateralReference {
    Price,        // the deal's own adjusted price (self-consistent)
    MarkToMarket  // risk-free value of the remaining flows
};

struct CsaSpec {
    std::vector<double> margin_dates;
    AccrualRate c_plus;   // collateral held by the investor (C > 0)
    AccrualRate c_minus;  // collateral held by the counterparty (C < 0)
    CollateralRule rule;
    bool rehypothecation = false;
    CloseOutConvention close_out = CloseOutConvention::RiskFree;
    CollateralReference reference = CollateralReference::Price;

    /// Throws std::invalid_argument on an inconsistent agreement.
    void validate() const;
    bool collateralized() const noexcept { return !rule.none() && margin_dates.size() >= 2; }
};

}  // namespace xva
