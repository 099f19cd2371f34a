#include "xva/bonds.hpp"

#include <stdexcept>
#include <string>

namespace xva {

namespace {

double simple_bond(double rate, double t, double T, const char* what) {
    if (!(T > t))
        throw std::domain_error(std::string(what) + ": requires T > t");
    double denom = 1.0 + (T - t) * rate;
    if (!(denom > 0.0))
        throw std::domain_error(std::string(what) + ": rate too negative for tenor");
    return 1.0 / denom;
}

}  // namespace

double collateral_bond(double rate, double t, double T) {
    return simple_bond(rate, t, T, "collateral_bond");
}

double funding_bond(double rate, double t, double T) {
    return simple_bond(rate, t, T, "funding_bond");
}

double forward_funding_rate(double bond, double t, double T) {
    if (!(T > t) || !(bond > 0.0))
        throw std::domain_error("forward_funding_rate: invalid inputs");
    return (1.0 / bond - 1.0) / (T - t);
}

double risky_adjusted_funding_bond(double pF, double lgd, double survival_to_T) {
    if (!(pF > 0.0) || lgd < 0.0 || lgd > 1.0 || survival_to_T < 0.0 || survival_to_T > 1.0)
        throw std::domain_error("risky_adjusted_funding_bond: inputs out of range");
    double denom = lgd * survival_to_T + (1.0 - lgd);
    if (!(denom > 0.0))
        throw std::domain_error("risky_adjusted_funding_bond: zero expected recovery");
    return pF / denom;
}

}  // namespace xva
