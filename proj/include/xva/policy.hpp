#pragma once

#include <optional>
#include <vector>

#include "xva/csa.hpp"
#include "xva/default_model.hpp"

namespace xva {

enum class PolicyKind { Treasury, DirectMarket };

/// Labels splitting a funding spread into credit and liquidity parts.
/// Informational only.
struct SpreadDecomposition {
    double credit = 0.0;
    double liquidity_plus = 0.0;
    double liquidity_minus = 0.0;
};

/// How the trader borrows (f+) and lends (f-) cash between funding dates.
struct LiquidityPolicy {
    PolicyKind kind = PolicyKind::Treasury;
    std::vector<double> funding_dates;
    AccrualRate f_plus;
    AccrualRate f_minus;
    /// Investor recovery seen by the funder; only the direct-market policy uses it.
    double funder_recovery = 1.0;
    std::optional<SpreadDecomposition> spreads;

    void validate() const;
};

/// Cash to fund (> 0) or invest (< 0): V - H, or V - C - H when collateral
/// can be re-hypothecated.
double funding_amount(double continuation_value, double collateral, double hedge, bool rehypothecation);

struct FundingBonds {
    double p_minus;
    double p_plus_effective;
};

/// (P^{f-}, P^{f+}) for the period [t,T]; the direct-market policy replaces
/// P^{f+} by its default-risk adjusted version using the investor survival.
FundingBonds effective_funding_bonds(const LiquidityPolicy& policy, const DefaultModel& defaults, double t,
                                     double T, double risk_free_bond);

}  // namespace xva
