#include "xva/deal.hpp"

#include <algorithm>
#include <stdexcept>

namespace xva {

double Payoff::operator()(double x) const noexcept {
    double u = level + slope * x;
    switch (kind) {
    case Kind::Linear:
        return scale * u;
    case Kind::Call:
        return scale * std::max(u - strike, 0.0);
    case Kind::Put:
        return scale * std::max(strike - u, 0.0);
    }
    return 0.0;
}

Deal::Deal(std::vector<Flow> flows, double notional) : flows_(std::move(flows)), notional_(notional) {
    std::stable_sort(flows_.begin(), flows_.end(),
                     [](const Flow& a, const Flow& b) { return a.time < b.time; });
    if (!(notional_ > 0.0))
        throw std::invalid_argument("Deal: notional must be positive");
}

bool Deal::deterministic() const noexcept {
    return std::all_of(flows_.begin(), flows_.end(), [](const Flow& f) { return f.payoff.deterministic(); });
}

std::vector<double> Deal::payment_times() const {
    std::vector<double> t;
    for (const auto& f : flows_)
        t.push_back(f.time);
    return t;
}

Deal Deal::scaled(double a) const {
    Deal d = *this;
    for (auto& f : d.flows_)
        f.payoff.scale *= a;
    return d;
}

Deal Deal::combined(const Deal& other) const {
    std::vector<Flow> all = flows_;
    all.insert(all.end(), other.flows_.begin(), other.flows_.end());
    return Deal(std::move(all), std::max(notional_, other.notional_));
}

void Deal::validate(const TimeGrid& grid) const {
    for (const auto& f : flows_) {
        if (!(f.time > 0.0) || f.time > grid.maturity() * (1.0 + 1e-12))
            throw std::invalid_argument("Deal: payment times must lie in (0, T]");
        if (!grid.contains(f.time))
            throw std::invalid_argument("Deal: payment time not on the time grid");
    }
}

std::vector<std::vector<const Flow*>> Deal::by_grid_index(const TimeGrid& grid) const {
    std::vector<std::vector<const Flow*>> out(grid.size());
    for (const auto& f : flows_)
        out[grid.index_of(f.time)].push_back(&f);
    return out;
}

}  // namespace xva
