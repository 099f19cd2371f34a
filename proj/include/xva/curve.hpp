#pragma once

#include <vector>

namespace xva {

/// Zero curve with continuously compounded pillar rates and log-linear
/// interpolation of discount factors (piecewise-flat forwards).
class Curve {
public:
    struct Pillar {
        double time;
        double zero_rate;
    };

    Curve() = default;
    explicit Curve(std::vector<Pillar> pillars);

    static Curve flat(double rate, double horizon = 100.0);

    /// P(0,t); throws std::domain_error outside [0, horizon].
    double discount(double t) const;
    double horizon() const noexcept { return times_.back(); }
    const std::vector<Pillar>& pillars() const noexcept { return pillars_; }

private:
    std::vector<Pillar> pillars_;
    std::vector<double> times_;
    std::vector<double> log_dfs_;
};

/// P(t,T) = P(0,T)/P(0,t) under the curve; 1 when t == T.
double discount_factor(const Curve& curve, double t, double T);

}  // namespace xva
