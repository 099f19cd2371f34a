#pragma once

#include <optional>
#include <span>
#include <vector>

#include "xva/csa.hpp"
#include "xva/deal.hpp"
#include "xva/default_model.hpp"
#include "xva/policy.hpp"
#include "xva/regression.hpp"
#include "xva/scenario.hpp"

namespace xva {

enum class Party { Investor, Counterparty };

// ---- single-period building blocks ---------------------------------------

/// One margining-period summand C - C-*P/P^{c-} - C+*P/P^{c+}.
double margin_cost_summand(double collateral, double risk_free_bond, double pc_plus, double pc_minus);

/// Collateral account accrued to the default time:
/// C-*P_tau(t_{k+1})/P^{c-} + C+*P_tau(t_{k+1})/P^{c+}.
double accrued_collateral(double collateral, double bond_tau_to_next, double pc_plus, double pc_minus);

/// One funding-period summand F - F-*P/P^{f-} - F+*P/P^{f+}.
double funding_summand(double amount, double risk_free_bond, double pf_plus, double pf_minus);

/// Amount to reimburse at the end of the funding period, F-/P^{f-} + F+/P^{f+}.
double funding_notional(double amount, double pf_plus, double pf_minus);

/// Cash flow at the first default given the close-out amount, the
/// pre-default collateral and who defaulted.
double on_default_flow(double epsilon, double collateral_pre_default, Party defaulted,
                       const DefaultModel& recoveries);

/// Loss parts of the on-default flow: the counterparty-default loss
/// (non-negative) and the investor-default gain (non-negative).
struct DefaultAdjustment {
    double cva = 0.0;
    double dva = 0.0;
};
DefaultAdjustment default_adjustment(double epsilon, double collateral_pre_default, Party defaulted,
                                     const DefaultModel& recoveries);

// ---- pathwise operators --------------------------------------------------

/// Margining dates resolved against a scenario grid.
struct MarginSchedule {
    std::vector<std::size_t> index;  // grid indices, ascending
    std::vector<double> time;

    MarginSchedule(const CsaSpec& csa, const TimeGrid& grid);
    std::size_t size() const noexcept { return index.size(); }
    /// Last margining period [t_k, t_{k+1}) containing t, if any.
    std::optional<std::size_t> period_containing(double t) const;
};

/// Discounted deal flows paid in (t, T] on path p; t and T on the grid.
double payout(const Deal& deal, const ScenarioSet& s, std::size_t p, double t, double T);

/// gamma(t, T^tau): margining costs discounted to t. `collateral` holds the
/// account value at each margining date.
double margining_cost(const ScenarioSet& s, std::size_t p, const CsaSpec& csa, const MarginSchedule& ms,
                      std::span<const double> collateral, double t = 0.0);

struct PreDefaultCollateral {
    double value = 0.0;
    /// False when the default falls outside every margining period.
    bool in_period = false;
};
PreDefaultCollateral pre_default_collateral(const ScenarioSet& s, std::size_t p, const CsaSpec& csa,
                                            const MarginSchedule& ms, std::span<const double> collateral);

/// Gross margining flows stopped at the first default, discounted to 0.
double margin_flows_gross(const ScenarioSet& s, std::size_t p, const CsaSpec& csa, const MarginSchedule& ms,
                          std::span<const double> collateral);

/// phi(0, T^tau): funding flows discounted to 0. `amounts` holds F at each
/// funding date (policy.funding_dates order).
double funding_flows(const ScenarioSet& s, std::size_t p, const LiquidityPolicy& policy,
                     const DefaultModel& defaults, std::span<const double> amounts);

// ---- close-out -----------------------------------------------------------

/// Values the remaining deal at the first default. Each flow depends on the
/// state at its own payment date only, so its value at tau is the bond price
/// times the forward-measure expectation of the payoff.
class CloseOutValuer {
public:
    CloseOutValuer(const ScenarioSet& s, const Deal& deal);

    /// E_tau[Pi(tau,T)] on path p (flows paid at tau included).
    double risk_free(std::size_t p) const;
    /// Nested Monte Carlo estimate of the same quantity.
    Estimate nested(std::size_t p, std::size_t inner_paths, std::uint64_t seed) const;
    /// Value at tau of the deal flows strictly before grid index g plus the
    /// forward-measure expectation of `continuation` at g.
    double rolled(std::size_t p, std::size_t g, const RegressionFit& continuation) const;
    /// Risk-free value of the flows paid strictly after grid date i on path p.
    double mark_to_market(std::size_t p, std::size_t i) const;
    /// Funding-adjusted value at tau: deal flows up to the next grid date
    /// holding a fit, then that fit rolled back to tau. Falls back to the
    /// risk-free value when no later fit exists.
    double funding_inclusive(std::size_t p, const std::vector<std::optional<RegressionFit>>& fits) const;

private:
    double value_from(double t, double x, double after, bool inclusive) const;

    const ScenarioSet& s_;
    const Deal& deal_;
    std::vector<std::vector<const Flow*>> flows_at_;
};

/// Close-out amount under the CSA convention. `funding_continuation` is
/// consulted only by the funding-inclusive convention and holds, per grid
/// index, an optional fit of the funding-adjusted default-free value
/// (flows at that date included).
double close_out_amount(CloseOutConvention convention, Party surviving, std::size_t p,
                        const CloseOutValuer& valuer, double collateral_pre_default,
                        const std::vector<std::optional<RegressionFit>>* funding_continuation = nullptr);

}  // namespace xva
