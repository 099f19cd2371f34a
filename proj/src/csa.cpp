#include "xva/csa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xva/bonds.hpp"

namespace xva {

double AccrualRate::level_at(double t) const {
    std::size_t i = 0;
    while (i < ends.size() && t >= ends[i])
        ++i;
    return levels.at(i);
}

double AccrualRate::rate(double t, double T, double risk_free_bond) const {
    double level = level_at(t);
    if (!spread_over_risk_free)
        return level;
    return forward_funding_rate(risk_free_bond, t, T) + level;
}

double AccrualRate::bond(double t, double T, double risk_free_bond) const {
    if (spread_over_risk_free && level_at(t) == 0.0)
        return risk_free_bond;  // accrual at exactly the risk-free rate
    return collateral_bond(rate(t, T, risk_free_bond), t, T);
}

double CollateralRule::operator()(double reference) const {
    double amount = std::max(alpha * std::abs(reference) - threshold, 0.0);
    if (mta > 0.0)
        amount = std::floor(amount / mta) * mta;
    return std::copysign(amount, reference) + 0.0;
}

void CsaSpec::validate() const {
    if (!(rule.alpha >= 0.0 && rule.alpha <= 1.0))
        throw std::invalid_argument("csa: alpha must lie in [0,1]");
    if (rule.threshold < 0.0 || rule.mta < 0.0)
        throw std::invalid_argument("csa: threshold and minimum transfer amount must be non-negative");
    if (close_out == CloseOutConvention::CollateralPrice && rule.alpha != 1.0)
        throw std::invalid_argument("csa: collateral-price close-out requires alpha = 1");
    if (!std::is_sorted(margin_dates.begin(), margin_dates.end()))
        throw std::invalid_argument("csa: margin dates must be sorted");
    for (const AccrualRate* r : {&c_plus, &c_minus})
        if (r->levels.size() != r->ends.size() + 1)
            throw std::invalid_argument("csa: accrual schedule needs one more level than breakpoints");
}

}  // namespace xva
