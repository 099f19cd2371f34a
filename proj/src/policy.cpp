#include "xva/policy.hpp"

#include <algorithm>
#include <stdexcept>

#include "xva/bonds.hpp"

namespace xva {

void LiquidityPolicy::validate() const {
    if (!(funder_recovery >= 0.0 && funder_recovery <= 1.0))
        throw std::invalid_argument("policy: funder recovery must lie in [0,1]");
    if (!std::is_sorted(funding_dates.begin(), funding_dates.end()))
        throw std::invalid_argument("policy: funding dates must be sorted");
    for (const AccrualRate* r : {&f_plus, &f_minus})
        if (r->levels.size() != r->ends.size() + 1)
            throw std::invalid_argument("policy: rate schedule needs one more level than breakpoints");
}

double funding_amount(double continuation_value, double collateral, double hedge, bool rehypothecation) {
    return rehypothecation ? continuation_value - collateral - hedge : continuation_value - hedge;
}

FundingBonds effective_funding_bonds(const LiquidityPolicy& policy, const DefaultModel& defaults, double t,
                                     double T, double risk_free_bond) {
    FundingBonds b{policy.f_minus.bond(t, T, risk_free_bond), policy.f_plus.bond(t, T, risk_free_bond)};
    if (policy.kind == PolicyKind::DirectMarket && policy.funder_recovery < 1.0) {
        double lgd = 1.0 - policy.funder_recovery;
        b.p_plus_effective = risky_adjusted_funding_bond(b.p_plus_effective, lgd,
                                                         defaults.lambda_investor.survival(t, T));
    }
    return b;
}

}  // namespace xva
