#include "xva/default_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace xva {

HazardCurve::HazardCurve(double flat_rate) : HazardCurve({}, {flat_rate}) {}

HazardCurve::HazardCurve(std::vector<double> ends, std::vector<double> rates)
    : ends_(std::move(ends)), rates_(std::move(rates)) {
    if (rates_.size() != ends_.size() + 1)
        throw std::invalid_argument("HazardCurve: need one more rate than breakpoints");
    for (double r : rates_)
        if (!(r >= 0.0))
            throw std::invalid_argument("HazardCurve: hazard rates must be non-negative");
    double prev = 0.0;
    for (double e : ends_) {
        if (!(e > prev))
            throw std::invalid_argument("HazardCurve: breakpoints must be increasing and positive");
        prev = e;
    }
}

double HazardCurve::cumulative(double t) const {
    double acc = 0.0, start = 0.0;
    for (std::size_t i = 0; i < ends_.size(); ++i) {
        if (t <= ends_[i])
            return acc + rates_[i] * (t - start);
        acc += rates_[i] * (ends_[i] - start);
        start = ends_[i];
    }
    return acc + rates_.back() * (t - start);
}

double HazardCurve::inverse_cumulative(double target) const {
    double acc = 0.0, start = 0.0;
    for (std::size_t i = 0; i < ends_.size(); ++i) {
        double seg = rates_[i] * (ends_[i] - start);
        if (rates_[i] > 0.0 && acc + seg >= target)
            return start + (target - acc) / rates_[i];
        acc += seg;
        start = ends_[i];
    }
    if (rates_.back() <= 0.0)
        return kNoDefault;
    return start + (target - acc) / rates_.back();
}

double HazardCurve::survival(double t) const { return std::exp(-cumulative(t)); }

double HazardCurve::survival(double t, double T) const {
    return std::exp(-(cumulative(T) - cumulative(t)));
}

bool HazardCurve::is_zero() const noexcept {
    for (double r : rates_)
        if (r > 0.0)
            return false;
    return true;
}

void DefaultModel::validate() const {
    auto check = [](double rec, double rec_prime, const char* who) {
        if (!(rec >= 0.0 && rec <= rec_prime && rec_prime <= 1.0))
            throw std::invalid_argument(std::string("recoveries for ") + who +
                                        " must satisfy 0 <= rec <= rec' <= 1");
    };
    check(rec_investor, rec_prime_investor, "investor");
    check(rec_counterparty, rec_prime_counterparty, "counterparty");
    if (!(correlation >= -1.0 && correlation <= 1.0))
        throw std::invalid_argument("default correlation must lie in [-1,1]");
}

DefaultModel DefaultModel::segregated() const {
    DefaultModel m = *this;
    m.rec_prime_investor = 1.0;
    m.rec_prime_counterparty = 1.0;
    return m;
}

}  // namespace xva
