#pragma once

#include <limits>
#include <vector>

namespace xva {

/// Piecewise-constant hazard rate. rates[i] applies on [ends[i-1], ends[i]),
/// the last rate extends to infinity.
class HazardCurve {
public:
    HazardCurve() : HazardCurve(0.0) {}
    explicit HazardCurve(double flat_rate);
    HazardCurve(std::vector<double> ends, std::vector<double> rates);

    double cumulative(double t) const;
    /// Smallest t with cumulative(t) == target; +inf when never reached.
    double inverse_cumulative(double target) const;
    double survival(double t) const;
    double survival(double t, double T) const;
    bool is_zero() const noexcept;

    const std::vector<double>& ends() const noexcept { return ends_; }
    const std::vector<double>& rates() const noexcept { return rates_; }

private:
    std::vector<double> ends_;
    std::vector<double> rates_;
};

/// Default specification for investor (name 0) and counterparty (name 2).
struct DefaultModel {
    HazardCurve lambda_investor;
    HazardCurve lambda_counterparty;
    double rec_investor = 0.4;
    double rec_counterparty = 0.4;
    /// Recovery on re-hypothecated collateral.
    double rec_prime_investor = 1.0;
    double rec_prime_counterparty = 1.0;
    /// Gaussian copula correlation between the two exponential triggers.
    double correlation = 0.0;

    double lgd_investor() const { return 1.0 - rec_investor; }
    double lgd_counterparty() const { return 1.0 - rec_counterparty; }
    double lgd_prime_investor() const { return 1.0 - rec_prime_investor; }
    double lgd_prime_counterparty() const { return 1.0 - rec_prime_counterparty; }

    /// Throws std::invalid_argument unless 0 <= rec <= rec' <= 1, |rho| <= 1.
    void validate() const;
    /// Collateral kept in a segregated account: rec' = 1 on both sides.
    DefaultModel segregated() const;
};

inline constexpr double kNoDefault = std::numeric_limits<double>::infinity();

}  // namespace xva
