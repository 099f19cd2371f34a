#include "xva/state_model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xva {

GaussHermite GaussHermite::make(int n) {
    // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i)
        J(i, i - 1) = J(i - 1, i) = std::sqrt(static_cast<double>(i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussHermite gh;
    for (int i = 0; i < n; ++i) {
        gh.nodes.push_back(es.eigenvalues()(i));
        double v = es.eigenvectors()(0, i);
        gh.weights.push_back(v * v);
    }
    return gh;
}

const GaussHermite& GaussHermite::standard() {
    static const GaussHermite rule = make(48);
    return rule;
}

// ---------------------------------------------------------------------------

GaussianShortRate::GaussianShortRate(Curve curve, double mean_reversion, double volatility)
    : StateModel(std::move(curve)), a_(mean_reversion), sigma_(volatility) {
    if (sigma_ < 0.0)
        throw std::invalid_argument("GaussianShortRate: volatility must be non-negative");
    if (sigma_ > 0.0 && !(a_ > 0.0))
        throw std::invalid_argument("GaussianShortRate: mean reversion must be positive");
}

double GaussianShortRate::B(double h) const {
    if (a_ < 1e-12)
        return h;
    return -std::expm1(-a_ * h) / a_;
}

double GaussianShortRate::var_x(double h) const {
    if (sigma_ == 0.0)
        return 0.0;
    return sigma_ * sigma_ * (-std::expm1(-2.0 * a_ * h)) / (2.0 * a_);
}

double GaussianShortRate::cov_x_int(double h) const {
    if (sigma_ == 0.0)
        return 0.0;
    double b = B(h);
    return 0.5 * sigma_ * sigma_ * b * b;
}

double GaussianShortRate::var_int(double h) const {
    if (sigma_ == 0.0)
        return 0.0;
    double s2 = sigma_ * sigma_ / (a_ * a_);
    return s2 * (h - 2.0 * B(h) + (-std::expm1(-2.0 * a_ * h)) / (2.0 * a_));
}

double GaussianShortRate::integrated_variance(double t, double T) const { return var_int(T - t); }

double GaussianShortRate::bond(double t, double T, double x) const {
    if (t > T)
        throw std::domain_error("bond: t > T");
    if (t == T)
        return 1.0;
    double ratio = curve_.discount(T) / curve_.discount(t);
    if (sigma_ == 0.0)
        return ratio;
    // Variance of the integral of x on [t,T] from time 0 differs from the
    // one seen at t; the conditional bond uses the t-conditional variance.
    double vtT = var_int(T - t);
    double v0T = var_int(T);
    double v0t = var_int(t);
    double A = 0.5 * (vtT - v0T + v0t);
    return ratio * std::exp(A - B(T - t) * x);
}

double GaussianShortRate::discount_from_integral(double t, double integral) const {
    if (sigma_ == 0.0)
        return curve_.discount(t);
    return curve_.discount(t) * std::exp(-0.5 * var_int(t) - integral);
}

StateModel::Step GaussianShortRate::step(double t0, double t1, double x0, PhiloxStream& rng) const {
    double h = t1 - t0;
    if (sigma_ == 0.0)
        return {x0 * std::exp(-a_ * h), x0 * B(h)};
    double z1 = rng.normal(), z2 = rng.normal();
    double vx = var_x(h), vi = var_int(h), c = cov_x_int(h);
    double l11 = std::sqrt(vx);
    double l21 = l11 > 0.0 ? c / l11 : 0.0;
    double l22 = std::sqrt(std::max(vi - l21 * l21, 0.0));
    return {x0 * std::exp(-a_ * h) + l11 * z1, x0 * B(h) + l21 * z1 + l22 * z2};
}

StateModel::Step GaussianShortRate::bridge(double t0, double x0, double t1, const Step& end, double s,
                                           PhiloxStream& rng) const {
    double h = t1 - t0, u = s - t0;
    double ea = std::exp(-a_ * u);
    double mxs = x0 * ea, mis = x0 * B(u);
    if (sigma_ == 0.0 || u <= 0.0)
        return {mxs, mis};
    double mxh = x0 * std::exp(-a_ * h), mih = x0 * B(h);

    double vxs = var_x(u), vis = var_int(u), cs = cov_x_int(u);
    double vxh = var_x(h), vih = var_int(h), ch = cov_x_int(h);
    double decay = std::exp(-a_ * (h - u));
    double bt = B(h - u);
    // Cross covariances between (x_s, I_s) and (x_h, I_h).
    Eigen::Matrix2d Sab;
    Sab << decay * vxs, cs + vxs * bt, decay * cs, vis + cs * bt;
    Eigen::Matrix2d Saa;
    Saa << vxs, cs, cs, vis;
    Eigen::Matrix2d Sbb;
    Sbb << vxh, ch, ch, vih;
    Eigen::Matrix2d K = Sab * Sbb.inverse();
    Eigen::Vector2d dev(end.state - mxh, end.integral - mih);
    Eigen::Vector2d mean = Eigen::Vector2d(mxs, mis) + K * dev;
    Eigen::Matrix2d cov = Saa - K * Sab.transpose();
    double l11 = std::sqrt(std::max(cov(0, 0), 0.0));
    double l21 = l11 > 0.0 ? cov(1, 0) / l11 : 0.0;
    double l22 = std::sqrt(std::max(cov(1, 1) - l21 * l21, 0.0));
    double z1 = rng.normal(), z2 = rng.normal();
    return {mean(0) + l11 * z1, mean(1) + l21 * z1 + l22 * z2};
}

double GaussianShortRate::forward_expectation(double t, double x, double T,
                                              const std::function<double(double)>& f) const {
    double h = T - t;
    double mean = x * std::exp(-a_ * h);
    if (sigma_ == 0.0 || h <= 0.0)
        return f(mean);
    double s2a = sigma_ * sigma_ / (a_ * a_);
    mean -= s2a * (-std::expm1(-a_ * h)) - 0.5 * s2a * (-std::expm1(-2.0 * a_ * h));
    double sd = std::sqrt(var_x(h));
    const auto& gh = GaussHermite::standard();
    double acc = 0.0;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i)
        acc += gh.weights[i] * f(mean + sd * gh.nodes[i]);
    return acc;
}

// ---------------------------------------------------------------------------

BinaryLattice::BinaryLattice(Curve curve, double x0, std::vector<Level> levels, double p_up_from_lo,
                             double p_up_from_hi)
    : StateModel(std::move(curve)), x0_(x0), levels_(std::move(levels)), p_up_lo_(p_up_from_lo),
      p_up_hi_(p_up_from_hi) {
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (!(levels_[i].time > (i ? levels_[i - 1].time : 0.0)))
            throw std::invalid_argument("BinaryLattice: level times must increase from above 0");
        if (!(levels_[i].hi > levels_[i].lo))
            throw std::invalid_argument("BinaryLattice: hi must exceed lo");
    }
    for (double p : {p_up_lo_, p_up_hi_})
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("BinaryLattice: probabilities must lie in [0,1]");
}

namespace {

// Index of the last level at or before t, or -1 when none.
long level_index(const std::vector<BinaryLattice::Level>& levels, double t) {
    long k = -1;
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (levels[i].time <= t * (1.0 + 1e-12) + 1e-14)
            k = static_cast<long>(i);
    return k;
}

}  // namespace

bool BinaryLattice::is_hi(double t, double x) const {
    long k = level_index(levels_, t);
    if (k < 0)
        return false;
    const auto& l = levels_[static_cast<std::size_t>(k)];
    return std::abs(x - l.hi) < std::abs(x - l.lo);
}

double BinaryLattice::bond(double t, double T, double) const { return discount_factor(curve_, t, T); }

double BinaryLattice::discount_from_integral(double t, double) const { return curve_.discount(t); }

StateModel::Step BinaryLattice::step(double t0, double t1, double x0, PhiloxStream& rng) const {
    double x = x0;
    bool hi = is_hi(t0, x0);
    long k0 = level_index(levels_, t0), k1 = level_index(levels_, t1);
    for (long k = k0 + 1; k <= k1; ++k) {
        hi = rng.uniform() < p_up(hi);
        const auto& l = levels_[static_cast<std::size_t>(k)];
        x = hi ? l.hi : l.lo;
    }
    return {x, 0.0};
}

StateModel::Step BinaryLattice::bridge(double, double x0, double, const Step&, double, PhiloxStream&) const {
    // Levels sit on grid dates, so the state is constant strictly inside a step.
    return {x0, 0.0};
}

double BinaryLattice::forward_expectation(double t, double x, double T,
                                          const std::function<double(double)>& f) const {
    long k0 = level_index(levels_, t), k1 = level_index(levels_, T);
    if (k1 <= k0)
        return f(x);
    double p_hi = is_hi(t, x) ? 1.0 : 0.0;
    for (long k = k0 + 1; k <= k1; ++k)
        p_hi = p_hi * p_up_hi_ + (1.0 - p_hi) * p_up_lo_;
    const auto& l = levels_[static_cast<std::size_t>(k1)];
    return p_hi * f(l.hi) + (1.0 - p_hi) * f(l.lo);
}

}  // namespace xva
