#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "xva/cashflows.hpp"
#include "xva/csa.hpp"
#include "xva/deal.hpp"
#include "xva/default_model.hpp"
#include "xva/policy.hpp"
#include "xva/scenario.hpp"

namespace xva {

struct McSettings {
    int degree = 2;
    unsigned workers = 1;
    /// Collateral fixed point: stop when no path moves by more than
    /// tolerance * max(1, |notional|).
    double tolerance = 1e-12;
    int max_iterations = 10;
};

struct Components {
    double payout = 0.0;
    double margining = 0.0;
    double funding = 0.0;
    double on_default = 0.0;
    double sum() const { return payout + margining + funding + on_default; }
};

struct StandardErrors {
    double value = 0.0;
    Components components;
    double cva = 0.0;
    double dva = 0.0;
    double fva = 0.0;
};

struct Diagnostics {
    std::size_t regressions = 0;
    std::size_t fallbacks = 0;
    double max_condition = 1.0;
};

struct PricingResult {
    double value = 0.0;
    Components components;
    double cva = 0.0;
    double dva = 0.0;
    double fva = 0.0;
    StandardErrors std_errors;
    /// Largest number of collateral fixed-point passes over any margining period.
    int iterations = 0;
    Diagnostics diagnostics;
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;
    /// Discounted total on each path; the value is their weighted mean.
    std::vector<double> pathwise;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double previous, double last)
        : std::runtime_error(what), previous(previous), last(last) {}
    double previous;
    double last;
};

/// Collateral account per path and margining date, row-major.
struct CollateralPaths {
    std::size_t n_dates = 0;
    std::vector<double> values;
    double at(std::size_t p, std::size_t k) const { return values[p * n_dates + k]; }
};

/// V(C;0) = E[Pi + gamma + 1{tau<T} D theta]. Collateral follows the CSA
/// rule unless `collateral` supplies the account on every path.
PricingResult price_bccva(const ScenarioSet& s, const Deal& deal, const CsaSpec& csa,
                          const DefaultModel& defaults, const McSettings& settings = {},
                          const CollateralPaths* collateral = nullptr);

/// V(C;F), with the funding recursion applied at every funding date. The
/// result also carries FVA against the BCCVA price on the same scenarios.
PricingResult price_bccfva(const ScenarioSet& s, const Deal& deal, const CsaSpec& csa,
                           const LiquidityPolicy& policy, const DefaultModel& defaults,
                           const McSettings& settings = {});

struct FvaEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// FVA = V(C;0) - V(C;F); both results must come from the same scenarios.
FvaEstimate fva(const PricingResult& no_funding, const PricingResult& funding);

}  // namespace xva
