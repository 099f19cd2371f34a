#pragma once

#include <vector>

#include "xva/time_grid.hpp"

namespace xva {

/// Amount paid at a flow date as a function of the market state x there:
/// scale * (level + slope*x) for Linear, scale * max(+/-(level + slope*x - strike), 0)
/// for Call/Put.
struct Payoff {
    enum class Kind { Linear, Call, Put };
    Kind kind = Kind::Linear;
    double level = 0.0;
    double slope = 0.0;
    double strike = 0.0;
    double scale = 1.0;

    double operator()(double x) const noexcept;
    bool deterministic() const noexcept { return slope == 0.0; }

    static Payoff fixed(double amount) { return {Kind::Linear, amount, 0.0, 0.0, 1.0}; }
    static Payoff linear(double level, double slope) { return {Kind::Linear, level, slope, 0.0, 1.0}; }
};

/// Positive amounts are received by the investor.
struct Flow {
    double time;
    Payoff payoff;
};

class Deal {
public:
    Deal() = default;
    explicit Deal(std::vector<Flow> flows, double notional = 1.0);

    const std::vector<Flow>& flows() const noexcept { return flows_; }
    double maturity() const noexcept { return flows_.empty() ? 0.0 : flows_.back().time; }
    double notional() const noexcept { return notional_; }
    bool deterministic() const noexcept;
    std::vector<double> payment_times() const;

    /// a*this, pathwise.
    Deal scaled(double a) const;
    /// Portfolio of both deals' flows.
    Deal combined(const Deal& other) const;

    /// Throws unless every payment time lies in (0, grid maturity] and on the grid.
    void validate(const TimeGrid& grid) const;

    /// Flows paid at grid index i (possibly several).
    std::vector<std::vector<const Flow*>> by_grid_index(const TimeGrid& grid) const;

private:
    std::vector<Flow> flows_;
    double notional_ = 1.0;
};

}  // namespace xva
