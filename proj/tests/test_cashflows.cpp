#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "theta_cases.hpp"
#include "xva/cashflows.hpp"
#include "xva/scenario.hpp"
#include "xva/state_model.hpp"

using namespace xva;

namespace {

DefaultModel recoveries(double ri, double rc, double rpi = 1.0, double rpc = 1.0) {
    DefaultModel d;
    d.rec_investor = ri;
    d.rec_counterparty = rc;
    d.rec_prime_investor = rpi;
    d.rec_prime_counterparty = rpc;
    return d;
}

MarketModel market(double r, double sigma, double lambda_i, double lambda_c) {
    MarketModel m;
    m.state = std::make_shared<GaussianShortRate>(Curve::flat(r), 0.1, sigma);
    m.defaults.lambda_investor = HazardCurve(lambda_i);
    m.defaults.lambda_counterparty = HazardCurve(lambda_c);
    return m;
}

}  // namespace

TEST_CASE("on-default flow examples") {
    auto r = recoveries(0.4, 0.4, 0.4, 0.4);
    CHECK(on_default_flow(100, 60, Party::Counterparty, r) == doctest::Approx(76.0).epsilon(1e-15));
    CHECK(on_default_flow(-50, 30, Party::Counterparty, r) == doctest::Approx(-50.0).epsilon(1e-15));
    CHECK(on_default_flow(-100, -80, Party::Investor, r) == doctest::Approx(-88.0).epsilon(1e-15));
    for (double e : {-70.0, -1.0, 0.0, 2.5, 130.0}) {
        CHECK(on_default_flow(e, e, Party::Counterparty, r) == e);
        CHECK(on_default_flow(e, e, Party::Investor, r) == e);
    }
    auto adj = default_adjustment(100, 60, Party::Counterparty, r);
    CHECK(adj.cva == doctest::Approx(24.0).epsilon(1e-15));
    CHECK(adj.dva == 0.0);
    adj = default_adjustment(-100, -80, Party::Investor, r);
    CHECK(adj.dva == doctest::Approx(12.0).epsilon(1e-15));
}

TEST_CASE("on-default flow properties") {
    PhiloxStream rng(31, 0);
    for (int trial = 0; trial < 10000; ++trial) {
        double eps = 200 * rng.uniform() - 100, c = 200 * rng.uniform() - 100;
        double ri = rng.uniform(), rc = rng.uniform();
        auto r = recoveries(ri, rc, ri + (1 - ri) * rng.uniform(), rc + (1 - rc) * rng.uniform());
        for (Party who : {Party::Counterparty, Party::Investor}) {
            double theta = on_default_flow(eps, c, who, r);
            CHECK(theta == doctest::Approx(theta_by_cases(eps, c, who, r)).epsilon(1e-13));
            auto adj = default_adjustment(eps, c, who, r);
            CHECK(adj.cva >= 0.0);
            CHECK(adj.dva >= 0.0);
            CHECK(theta == doctest::Approx(eps - adj.cva + adj.dva).epsilon(1e-13));
            CHECK(on_default_flow(eps, c, who, recoveries(1, 1, 1, 1)) == eps);
        }

        // non-decreasing in the collateral held, up to full cover
        double e = 1 + 99 * rng.uniform();
        double c1 = e * rng.uniform(), c2 = e * rng.uniform();
        if (c1 > c2)
            std::swap(c1, c2);
        CHECK(on_default_flow(e, c1, Party::Counterparty, r) <= on_default_flow(e, c2, Party::Counterparty, r));
    }
}

TEST_CASE("single-period summands") {
    CHECK(margin_cost_summand(100, 0.99, 0.995, 0.995) == doctest::Approx(100 * (1 - 0.99 / 0.995)).epsilon(1e-14));
    CHECK(margin_cost_summand(100, 0.99, 0.995, 0.5) == doctest::Approx(0.502513).epsilon(1e-6));
    CHECK(margin_cost_summand(0, 0.99, 0.9, 0.8) == 0.0);
    CHECK(margin_cost_summand(-40, 0.97, 0.97, 0.97) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(accrued_collateral(100, 0.995, 0.990, 0.5) == doctest::Approx(100.505).epsilon(1e-5));
    CHECK(accrued_collateral(0, 0.995, 0.990, 0.9) == 0.0);
    CHECK(funding_summand(100, 0.99, 0.98, 0.5) == doctest::Approx(-1.0204).epsilon(1e-4));
    CHECK(funding_notional(0, 0.98, 0.99) == 0.0);
    CHECK(funding_notional(100, 0.98, 0.99) == doctest::Approx(102.0408).epsilon(1e-6));
    CHECK(funding_notional(-50, 0.98, 0.99) == doctest::Approx(-50.5051).epsilon(1e-6));
}

TEST_CASE("payout along a path") {
    TimeGrid grid({0.0, 0.5, 1.0});
    auto s = simulate(market(0.01, 0.0, 0.0, 0.0), grid, 4, 1);
    Deal one({{1.0, Payoff::fixed(1.0)}});
    CHECK(payout(one, s, 0, 1.0, 1.0) == 0.0);
    CHECK(payout(one, s, 2, 0.0, 1.0) == doctest::Approx(std::exp(-0.01)).epsilon(1e-14));
    auto z = simulate(market(0.0, 0.0, 0.0, 0.0), grid, 4, 1);
    Deal two({{0.5, Payoff::fixed(1.0)}, {1.0, Payoff::fixed(1.0)}});
    CHECK(payout(two, z, 1, 0.0, 1.0) == 2.0);

    // linear in the deal on stochastic paths
    TimeGrid g = TimeGrid::uniform(2.0, 8);
    auto st = simulate(market(0.02, 0.01, 0.0, 0.0), g, 200, 5);
    PhiloxStream rng(8, 0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Flow> f1, f2;
        for (std::size_t i = 1; i < g.size(); ++i) {
            if (rng.uniform() < 0.5)
                f1.push_back({g[i], Payoff::linear(rng.normal(), 50 * rng.normal())});
            if (rng.uniform() < 0.5)
                f2.push_back({g[i], Payoff::linear(rng.normal(), 50 * rng.normal())});
        }
        Deal d1(f1), d2(f2);
        double a = 3 * rng.normal();
        Deal mix = d1.scaled(a).combined(d2);
        for (std::size_t p = 0; p < st.n_paths; p += 13) {
            double lhs = payout(mix, st, p, 0.5, 2.0);
            double rhs = a * payout(d1, st, p, 0.5, 2.0) + payout(d2, st, p, 0.5, 2.0);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("margining and funding at risk-free rates cost nothing") {
    TimeGrid g = TimeGrid::uniform(1.0, 12);
    auto s = simulate(market(0.03, 0.015, 0.1, 0.2), g, 500, 9);
    CsaSpec csa;
    csa.margin_dates.assign(g.dates().begin(), g.dates().end());
    csa.c_plus = AccrualRate::spread(0.0);
    csa.c_minus = AccrualRate::spread(0.0);
    csa.rule.alpha = 1.0;
    MarginSchedule ms(csa, g);
    LiquidityPolicy policy;
    policy.funding_dates = csa.margin_dates;
    policy.f_plus = AccrualRate::spread(0.0);
    policy.f_minus = AccrualRate::spread(0.0);
    DefaultModel d = recoveries(0.4, 0.4);
    PhiloxStream rng(10, 0);
    std::vector<double> amounts(ms.size());
    for (std::size_t p = 0; p < s.n_paths; ++p) {
        for (auto& a : amounts)
            a = 100 * rng.normal();
        CHECK(std::abs(margining_cost(s, p, csa, ms, amounts)) < 1e-11);
        CHECK(std::abs(funding_flows(s, p, policy, d, amounts)) < 1e-11);
        std::vector<double> zero(ms.size(), 0.0);
        CHECK(margining_cost(s, p, csa, ms, zero) == 0.0);
        CHECK(funding_flows(s, p, policy, d, zero) == 0.0);
    }
}

TEST_CASE("gross margining flows rearrange into costs plus accrued collateral") {
    // Deterministic rates make the rearrangement hold path by path.
    TimeGrid g = TimeGrid::uniform(1.0, 10);
    auto s = simulate(market(0.02, 0.0, 0.3, 0.5), g, 2000, 12);
    CsaSpec csa;
    csa.margin_dates.assign(g.dates().begin(), g.dates().end());
    csa.c_plus = AccrualRate::absolute(0.035);
    csa.c_minus = AccrualRate::absolute(0.01);
    csa.rule.alpha = 1.0;
    MarginSchedule ms(csa, g);
    PhiloxStream rng(14, 0);
    std::vector<double> c(ms.size());
    int defaults = 0;
    for (std::size_t p = 0; p < s.n_paths; ++p) {
        for (auto& v : c)
            v = 10 * rng.normal();
        double gross = margin_flows_gross(s, p, csa, ms, c);
        double cost = margining_cost(s, p, csa, ms, c);
        double accrued = 0.0;
        if (s.tau(p) < 1.0) {
            ++defaults;
            auto pre = pre_default_collateral(s, p, csa, ms, c);
            CHECK(pre.in_period);
            accrued = s.df_at_tau[p] * pre.value;
        }
        CHECK(gross == doctest::Approx(cost + accrued).epsilon(1e-12).scale(10.0));
    }
    CHECK(defaults > 100);

    // one period by hand, no default
    auto nd = simulate(market(0.02, 0.0, 0.0, 0.0), TimeGrid({0.0, 1.0}), 1, 1);
    CsaSpec one = csa;
    one.margin_dates = {0.0, 1.0};
    MarginSchedule m1(one, nd.grid);
    std::vector<double> c1{100.0, 0.0};
    double P = std::exp(-0.02);
    double expected = 100.0 - 100.0 * P * 1.035;
    CHECK(margin_flows_gross(nd, 0, one, m1, c1) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(margining_cost(nd, 0, one, m1, c1) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("pre-default collateral outside every period") {
    TimeGrid g({0.0, 0.25, 0.5, 0.75, 1.0});
    auto s = simulate(market(0.0, 0.0, 0.0, 3.0), g, 400, 2);
    CsaSpec csa;
    csa.margin_dates = {0.25, 0.75};
    csa.rule.alpha = 1.0;
    MarginSchedule ms(csa, g);
    std::vector<double> c{5.0, 7.0};
    for (std::size_t p = 0; p < s.n_paths; ++p) {
        auto pre = pre_default_collateral(s, p, csa, ms, c);
        double tau = s.tau(p);
        if (tau >= 0.25 && tau < 0.75) {
            CHECK(pre.in_period);
            CHECK(pre.value == 5.0);
        } else {
            CHECK_FALSE(pre.in_period);
            CHECK(pre.value == 0.0);
        }
    }
}

TEST_CASE("close-out amounts") {
    TimeGrid g = TimeGrid::uniform(2.0, 8);
    CsaSpec csa;

    SUBCASE("deterministic deal under the risk-free convention") {
        auto s = simulate(market(0.03, 0.0, 0.0, 0.8), g, 300, 4);
        Deal deal({{0.5, Payoff::fixed(2.0)}, {1.25, Payoff::fixed(-1.0)}, {2.0, Payoff::fixed(3.0)}});
        CloseOutValuer v(s, deal);
        for (std::size_t p = 0; p < s.n_paths; ++p) {
            double tau = s.tau(p);
            if (tau > 2.0)
                continue;
            double expected = 0.0;
            for (const auto& f : deal.flows())
                if (f.time >= tau)
                    expected += f.payoff(0.0) * std::exp(-0.03 * (f.time - tau));
            CHECK(close_out_amount(CloseOutConvention::RiskFree, Party::Investor, p, v, 0.0) ==
                  doctest::Approx(expected).epsilon(1e-13));
            CHECK(close_out_amount(CloseOutConvention::CollateralPrice, Party::Investor, p, v, 4.5) == 4.5);
        }
    }

    SUBCASE("stochastic deal against nested simulation") {
        auto s = simulate(market(0.02, 0.012, 0.0, 0.6), g, 200, 6);
        Deal deal({{1.0, {Payoff::Kind::Call, 0.0, 100.0, -0.1, 1.0}}, {2.0, Payoff::linear(1.0, 80.0)}});
        CloseOutValuer v(s, deal);
        int checked = 0;
        for (std::size_t p = 0; p < s.n_paths && checked < 25; ++p) {
            if (s.tau(p) > 2.0)
                continue;
            ++checked;
            auto nested = v.nested(p, 1000, 77);
            CHECK(std::abs(v.risk_free(p) - nested.mean) <= 3 * nested.std_error + 1e-12);
        }
        CHECK(checked == 25);
    }
}
