#include "xva/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace xva {

namespace {

bool same_date(double a, double b) {
    return std::abs(a - b) <= kDateTolerance * std::max(1.0, std::abs(b));
}

}  // namespace

TimeGrid::TimeGrid(std::vector<double> dates) : dates_(std::move(dates)) {
    if (dates_.size() < 2)
        throw std::invalid_argument("TimeGrid needs at least two dates");
    if (dates_.front() != 0.0)
        throw std::invalid_argument("TimeGrid must start at 0");
    for (std::size_t i = 1; i < dates_.size(); ++i)
        if (!(dates_[i] > dates_[i - 1]))
            throw std::invalid_argument("TimeGrid dates must be strictly increasing");
    roles_.assign(dates_.size(), kNone);
}

TimeGrid TimeGrid::uniform(double maturity, std::size_t steps) {
    if (steps == 0 || !(maturity > 0.0))
        throw std::invalid_argument("uniform grid needs steps > 0 and maturity > 0");
    std::vector<double> d(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i)
        d[i] = maturity * static_cast<double>(i) / static_cast<double>(steps);
    d.back() = maturity;
    return TimeGrid(std::move(d));
}

TimeGrid TimeGrid::merged(std::initializer_list<std::span<const double>> sets) {
    std::vector<double> all{0.0};
    for (auto s : sets)
        all.insert(all.end(), s.begin(), s.end());
    std::sort(all.begin(), all.end());
    std::vector<double> out;
    for (double t : all) {
        if (t < 0.0)
            throw std::invalid_argument("negative date");
        if (out.empty() || !same_date(t, out.back()))
            out.push_back(t);
    }
    return TimeGrid(std::move(out));
}

std::size_t TimeGrid::first_at_or_after(double t) const noexcept {
    auto it = std::lower_bound(dates_.begin(), dates_.end(), t);
    if (it != dates_.begin() && same_date(*std::prev(it), t))
        --it;
    return static_cast<std::size_t>(it - dates_.begin());
}

std::size_t TimeGrid::last_at_or_before(double t) const noexcept {
    auto it = std::upper_bound(dates_.begin(), dates_.end(), t);
    if (it != dates_.end() && same_date(*it, t))
        ++it;
    return it == dates_.begin() ? 0 : static_cast<std::size_t>(it - dates_.begin()) - 1;
}

bool TimeGrid::contains(double t) const noexcept {
    std::size_t i = first_at_or_after(t);
    return i < dates_.size() && same_date(dates_[i], t);
}

std::size_t TimeGrid::index_of(double t) const {
    std::size_t i = first_at_or_after(t);
    if (i >= dates_.size() || !same_date(dates_[i], t))
        throw std::invalid_argument("date " + std::to_string(t) + " is not on the time grid");
    return i;
}

void TimeGrid::mark(std::span<const double> times, DateRole role) {
    for (double t : times)
        roles_[index_of(t)] |= role;
}

std::vector<std::size_t> TimeGrid::indices_with(DateRole role) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < roles_.size(); ++i)
        if (roles_[i] & role)
            out.push_back(i);
    return out;
}

}  // namespace xva
