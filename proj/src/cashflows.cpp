#include "xva/cashflows.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xva/signs.hpp"

namespace xva {

double margin_cost_summand(double collateral, double risk_free_bond, double pc_plus, double pc_minus) {
    return collateral - neg(collateral) * risk_free_bond / pc_minus - pos(collateral) * risk_free_bond / pc_plus;
}

double accrued_collateral(double collateral, double bond_tau_to_next, double pc_plus, double pc_minus) {
    return neg(collateral) * bond_tau_to_next / pc_minus + pos(collateral) * bond_tau_to_next / pc_plus;
}

double funding_summand(double amount, double risk_free_bond, double pf_plus, double pf_minus) {
    return amount - neg(amount) * risk_free_bond / pf_minus - pos(amount) * risk_free_bond / pf_plus;
}

double funding_notional(double amount, double pf_plus, double pf_minus) {
    return neg(amount) / pf_minus + pos(amount) / pf_plus;
}

double on_default_flow(double eps, double c, Party defaulted, const DefaultModel& r) {
    if (defaulted == Party::Counterparty)
        return eps - r.lgd_counterparty() * pos(pos(eps) - pos(c)) -
               r.lgd_prime_counterparty() * pos(neg(eps) - neg(c));
    return eps - r.lgd_investor() * neg(neg(eps) - neg(c)) - r.lgd_prime_investor() * neg(pos(eps) - pos(c));
}

DefaultAdjustment default_adjustment(double eps, double c, Party defaulted, const DefaultModel& r) {
    if (defaulted == Party::Counterparty)
        return {r.lgd_counterparty() * pos(pos(eps) - pos(c)) + r.lgd_prime_counterparty() * pos(neg(eps) - neg(c)),
                0.0};
    return {0.0, -(r.lgd_investor() * neg(neg(eps) - neg(c)) + r.lgd_prime_investor() * neg(pos(eps) - pos(c)))};
}

// ---------------------------------------------------------------------------

MarginSchedule::MarginSchedule(const CsaSpec& csa, const TimeGrid& grid) {
    for (double t : csa.margin_dates) {
        index.push_back(grid.index_of(t));
        time.push_back(grid[index.back()]);
    }
}

std::optional<std::size_t> MarginSchedule::period_containing(double t) const {
    for (std::size_t k = 0; k + 1 < time.size(); ++k)
        if (time[k] <= t && t < time[k + 1])
            return k;
    return std::nullopt;
}

double payout(const Deal& deal, const ScenarioSet& s, std::size_t p, double t, double T) {
    if (t > T)
        throw std::domain_error("payout: t > T");
    std::size_t it = s.grid.index_of(t);
    double sum = 0.0;
    for (const auto& f : deal.flows()) {
        if (f.time <= s.grid[it] || f.time > T * (1.0 + 1e-14))
            continue;
        std::size_t iu = s.grid.index_of(f.time);
        sum += f.payoff(s.x(p, iu)) * s.discount(p, iu) / s.discount(p, it);
    }
    return sum;
}

double margining_cost(const ScenarioSet& s, std::size_t p, const CsaSpec& csa, const MarginSchedule& ms,
                      std::span<const double> collateral, double t) {
    const double stop = std::min(s.grid.maturity(), s.tau(p));
    const double df_t = s.discount(p, s.grid.index_of(t));
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < ms.size(); ++k) {
        double tk = ms.time[k];
        if (tk < t)
            continue;
        if (!(tk < stop))
            break;
        std::size_t ik = ms.index[k];
        double P = s.model->bond(tk, ms.time[k + 1], s.x(p, ik));
        double pcp = csa.c_plus.bond(tk, ms.time[k + 1], P);
        double pcm = csa.c_minus.bond(tk, ms.time[k + 1], P);
        sum += s.discount(p, ik) / df_t * margin_cost_summand(collateral[k], P, pcp, pcm);
    }
    return sum;
}

PreDefaultCollateral pre_default_collateral(const ScenarioSet& s, std::size_t p, const CsaSpec& csa,
                                            const MarginSchedule& ms, std::span<const double> collateral) {
    double tau = s.tau(p);
    if (tau > s.grid.maturity())
        return {};
    auto k = ms.period_containing(tau);
    if (!k)
        return {};
    double tk = ms.time[*k], tn = ms.time[*k + 1];
    double c = collateral[*k];
    if (tau == tk)
        return {c, true};
    double P = s.model->bond(tk, tn, s.x(p, ms.index[*k]));
    double pcp = csa.c_plus.bond(tk, tn, P);
    double pcm = csa.c_minus.bond(tk, tn, P);
    double bond_tau = s.model->bond(tau, tn, s.state_at_tau[p]);
    return {accrued_collateral(c, bond_tau, pcp, pcm), true};
}

double margin_flows_gross(const ScenarioSet& s, std::size_t p, const CsaSpec& csa, const MarginSchedule& ms,
                          std::span<const double> collateral) {
    const std::size_t n = ms.size();
    if (n == 0)
        return 0.0;
    const double stop = std::min(s.grid.maturity(), s.tau(p));
    double sum = 0.0;
    if (ms.time[0] < stop)
        sum += collateral[0] * s.discount(p, ms.index[0]);
    if (ms.time[n - 1] <= stop)
        sum -= collateral[n - 1] * s.discount(p, ms.index[n - 1]);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (!(ms.time[k + 1] <= stop))
            break;
        double tk = ms.time[k], tn = ms.time[k + 1];
        double P = s.model->bond(tk, tn, s.x(p, ms.index[k]));
        double pcp = csa.c_plus.bond(tk, tn, P);
        double pcm = csa.c_minus.bond(tk, tn, P);
        double grown = neg(collateral[k]) / pcm + pos(collateral[k]) / pcp;
        sum -= (grown - collateral[k + 1]) * s.discount(p, ms.index[k + 1]);
    }
    return sum;
}

double funding_flows(const ScenarioSet& s, std::size_t p, const LiquidityPolicy& policy,
                     const DefaultModel& defaults, std::span<const double> amounts) {
    const auto& fd = policy.funding_dates;
    const double tau = s.tau(p), T = s.grid.maturity();
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < fd.size(); ++j) {
        if (!(tau > fd[j]) || !(fd[j] < T))
            break;
        std::size_t ij = s.grid.index_of(fd[j]);
        double P = s.model->bond(fd[j], fd[j + 1], s.x(p, ij));
        auto fb = effective_funding_bonds(policy, defaults, fd[j], fd[j + 1], P);
        sum += s.discount(p, ij) * funding_summand(amounts[j], P, fb.p_plus_effective, fb.p_minus);
    }
    return sum;
}

// ---------------------------------------------------------------------------

CloseOutValuer::CloseOutValuer(const ScenarioSet& s, const Deal& deal)
    : s_(s), deal_(deal), flows_at_(deal.by_grid_index(s.grid)) {}

double CloseOutValuer::value_from(double t, double x, double after, bool inclusive) const {
    const StateModel& sm = *s_.model;
    double sum = 0.0;
    for (const auto& f : deal_.flows()) {
        if (inclusive ? f.time < after : f.time <= after)
            continue;
        double expected = f.payoff.deterministic() ? f.payoff(0.0) : sm.forward_expectation(t, x, f.time, f.payoff);
        sum += sm.bond(t, f.time, x) * expected;
    }
    return sum;
}

double CloseOutValuer::mark_to_market(std::size_t p, std::size_t i) const {
    return value_from(s_.grid[i], s_.x(p, i), s_.grid[i], false);
}

double CloseOutValuer::rolled(std::size_t p, std::size_t g, const RegressionFit& continuation) const {
    const double tau = s_.tau(p), x = s_.state_at_tau[p];
    const StateModel& sm = *s_.model;
    double sum = 0.0;
    std::size_t first = s_.grid.first_at_or_after(tau);
    for (std::size_t j = first; j < g && j < s_.grid.size(); ++j)
        for (const Flow* f : flows_at_[j])
            sum += sm.bond(tau, s_.grid[j], x) * sm.forward_expectation(tau, x, s_.grid[j], f->payoff);
    if (g < s_.grid.size()) {
        double tg = std::max(s_.grid[g], tau);
        sum += sm.bond(tau, tg, x) *
               sm.forward_expectation(tau, x, tg, [&](double y) { return continuation(y); });
    }
    return sum;
}

double CloseOutValuer::risk_free(std::size_t p) const {
    const double tau = s_.tau(p);
    return value_from(tau, s_.state_at_tau[p], tau, true);
}

double CloseOutValuer::funding_inclusive(std::size_t p,
                                         const std::vector<std::optional<RegressionFit>>& fits) const {
    for (std::size_t g = s_.grid.first_at_or_after(s_.tau(p)); g < fits.size(); ++g)
        if (fits[g])
            return rolled(p, g, *fits[g]);
    return risk_free(p);
}

Estimate CloseOutValuer::nested(std::size_t p, std::size_t inner_paths, std::uint64_t seed) const {
    const double tau = s_.tau(p), x_tau = s_.state_at_tau[p];
    const StateModel& sm = *s_.model;
    const double base = sm.discount_from_integral(tau, 0.0);
    std::size_t g = s_.grid.first_at_or_after(tau);
    std::vector<double> samples(inner_paths);
    for (std::size_t m = 0; m < inner_paths; ++m) {
        PhiloxStream rng(seed, p, static_cast<std::uint32_t>(3 + m));
        double t = tau, x = x_tau, integral = 0.0, value = 0.0;
        for (std::size_t j = g; j < s_.grid.size(); ++j) {
            if (s_.grid[j] > t) {
                auto st = sm.step(t, s_.grid[j], x, rng);
                x = st.state;
                integral += st.integral;
                t = s_.grid[j];
            }
            double d = sm.discount_from_integral(t, integral) / base;
            for (const Flow* f : flows_at_[j])
                value += f->payoff(x) * d;
        }
        samples[m] = value;
    }
    double mean = 0.0;
    for (double v : samples)
        mean += v;
    mean /= static_cast<double>(inner_paths);
    double var = 0.0;
    for (double v : samples)
        var += (v - mean) * (v - mean);
    var /= static_cast<double>(std::max<std::size_t>(inner_paths, 2) - 1);
    return {mean, std::sqrt(var / static_cast<double>(inner_paths))};
}

double close_out_amount(CloseOutConvention convention, Party, std::size_t p, const CloseOutValuer& valuer,
                        double collateral_pre_default,
                        const std::vector<std::optional<RegressionFit>>* funding_continuation) {
    switch (convention) {
    case CloseOutConvention::RiskFree:
        return valuer.risk_free(p);
    case CloseOutConvention::CollateralPrice:
        return collateral_pre_default;
    case CloseOutConvention::FundingInclusive: {
        if (!funding_continuation)
            return valuer.risk_free(p);
        return valuer.funding_inclusive(p, *funding_continuation);
    }
    }
    return 0.0;
}

}  // namespace xva
