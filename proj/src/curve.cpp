#include "xva/curve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xva {

Curve::Curve(std::vector<Pillar> pillars) : pillars_(std::move(pillars)) {
    if (pillars_.empty())
        throw std::invalid_argument("Curve needs at least one pillar");
    std::sort(pillars_.begin(), pillars_.end(),
              [](const Pillar& a, const Pillar& b) { return a.time < b.time; });
    times_.push_back(0.0);
    log_dfs_.push_back(0.0);
    for (const auto& p : pillars_) {
        if (!(p.time > 0.0))
            continue;  // the t=0 anchor is implicit
        if (p.time <= times_.back())
            throw std::invalid_argument("Curve pillar times must be distinct");
        times_.push_back(p.time);
        log_dfs_.push_back(-p.zero_rate * p.time);
    }
    if (times_.size() < 2)
        throw std::invalid_argument("Curve needs a pillar beyond t=0");
}

Curve Curve::flat(double rate, double horizon) {
    return Curve({{horizon, rate}});
}

double Curve::discount(double t) const {
    if (t < 0.0 || t > times_.back() * (1.0 + 1e-12))
        throw std::domain_error("discount: time outside curve horizon");
    if (t == 0.0)
        return 1.0;
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.end())
        return std::exp(log_dfs_.back());
    std::size_t i = static_cast<std::size_t>(it - times_.begin());
    double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
    return std::exp(log_dfs_[i - 1] + w * (log_dfs_[i] - log_dfs_[i - 1]));
}

double discount_factor(const Curve& curve, double t, double T) {
    if (t > T)
        throw std::domain_error("discount_factor: t > T");
    if (t == T)
        return 1.0;
    return curve.discount(T) / curve.discount(t);
}

}  // namespace xva
