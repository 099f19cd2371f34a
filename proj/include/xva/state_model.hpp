#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "xva/curve.hpp"
#include "xva/rng.hpp"

namespace xva {

/// Driver of the one-dimensional market state x and of risk-free
/// discounting along a path. Implementations are immutable and may be
/// shared across threads.
class StateModel {
public:
    virtual ~StateModel() = default;

    virtual double initial_state() const = 0;
    /// Zero-coupon bond P_t(T) seen from state x at time t.
    virtual double bond(double t, double T, double x) const = 0;
    /// Realized D(0,t) given the accumulated integral of the state on [0,t].
    virtual double discount_from_integral(double t, double integral) const = 0;

    struct Step {
        double state;
        double integral;  // integral of x over the step
    };
    /// Exact transition from (t0, x0) to t1.
    virtual Step step(double t0, double t1, double x0, PhiloxStream& rng) const = 0;
    /// Sample (x_s, integral on [t0,s]) conditional on both step endpoints.
    virtual Step bridge(double t0, double x0, double t1, const Step& end, double s,
                        PhiloxStream& rng) const = 0;
    /// E^T_t[f(x_T) | x_t = x] under the T-forward measure.
    virtual double forward_expectation(double t, double x, double T,
                                       const std::function<double(double)>& f) const = 0;

    virtual bool deterministic_rates() const = 0;
    const Curve& curve() const noexcept { return curve_; }

protected:
    explicit StateModel(Curve curve) : curve_(std::move(curve)) {}
    Curve curve_;
};

/// One-factor Gaussian short rate r_t = x_t + phi(t) fitted to the initial
/// curve, with dx = -a x dt + sigma dW, x_0 = 0. sigma = 0 gives purely
/// deterministic curve discounting.
class GaussianShortRate final : public StateModel {
public:
    GaussianShortRate(Curve curve, double mean_reversion, double volatility);

    double initial_state() const override { return 0.0; }
    double bond(double t, double T, double x) const override;
    double discount_from_integral(double t, double integral) const override;
    Step step(double t0, double t1, double x0, PhiloxStream& rng) const override;
    Step bridge(double t0, double x0, double t1, const Step& end, double s,
                PhiloxStream& rng) const override;
    double forward_expectation(double t, double x, double T,
                               const std::function<double(double)>& f) const override;
    bool deterministic_rates() const override { return sigma_ == 0.0; }

    double mean_reversion() const noexcept { return a_; }
    double volatility() const noexcept { return sigma_; }
    /// Variance of the integral of x over [t,T] seen from t.
    double integrated_variance(double t, double T) const;

private:
    double B(double h) const;
    double var_x(double h) const;
    double cov_x_int(double h) const;
    double var_int(double h) const;

    double a_;
    double sigma_;
};

/// Two-state recombining lattice under deterministic discounting. At each
/// lattice date the state jumps to hi[i] or lo[i]; the up probability depends
/// on whether the current state is the upper one. Between dates the state is
/// held.
class BinaryLattice final : public StateModel {
public:
    struct Level {
        double time;
        double lo;
        double hi;
    };
    BinaryLattice(Curve curve, double x0, std::vector<Level> levels, double p_up_from_lo,
                  double p_up_from_hi);

    double initial_state() const override { return x0_; }
    double bond(double t, double T, double x) const override;
    double discount_from_integral(double t, double integral) const override;
    Step step(double t0, double t1, double x0, PhiloxStream& rng) const override;
    Step bridge(double t0, double x0, double t1, const Step& end, double s,
                PhiloxStream& rng) const override;
    double forward_expectation(double t, double x, double T,
                               const std::function<double(double)>& f) const override;
    bool deterministic_rates() const override { return true; }

    const std::vector<Level>& levels() const noexcept { return levels_; }
    double p_up(bool from_hi) const noexcept { return from_hi ? p_up_hi_ : p_up_lo_; }
    /// Whether x is the upper state of the level in force at time t.
    bool is_hi(double t, double x) const;

private:
    double x0_;
    std::vector<Level> levels_;
    double p_up_lo_;
    double p_up_hi_;
};

/// Probabilists' Gauss-Hermite rule, E[f(Z)] ~ sum w_i f(z_i) for Z ~ N(0,1).
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
    static GaussHermite make(int n);
    /// Cached 48-point rule.
    static const GaussHermite& standard();
};

}  // namespace xva
