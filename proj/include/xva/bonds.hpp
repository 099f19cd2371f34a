#pragma once

namespace xva {

enum class Side { Plus, Minus };

/// Collateral accrual zero-coupon bond 1/(1+(T-t)c).
double collateral_bond(double rate, double t, double T);

/// Funding (Side::Plus) or investing (Side::Minus) bond 1/(1+(T-t)f).
double funding_bond(double rate, double t, double T);

/// Simple forward rate implied by a one-period bond price: (1/P - 1)/(T-t).
double forward_funding_rate(double bond, double t, double T);

/// Funding bond corrected for the borrower's own default risk,
/// pF / (lgd * survival + (1 - lgd)). Never below pF.
double risky_adjusted_funding_bond(double pF, double lgd, double survival_to_T);

}  // namespace xva
