// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "theta_cases.hpp"
#include "xva/cashflows.hpp"
#include "xva/oracles.hpp"
#include "xva/pricer.hpp"
#include "xva/run.hpp"
#include "xva/scenario.hpp"
#include "xva/state_model.hpp"

using namespace xva;

namespace {

constexpr std::size_t kPaths = 1 << 16;
constexpr std::uint64_t kSeed = 42;

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

MarketModel deterministic(double r, double lambda_i, double lambda_c) {
    MarketModel m;
    m.state = std::make_shared<GaussianShortRate>(Curve::flat(r), 0.1, 0.0);
    m.defaults.lambda_investor = HazardCurve(lambda_i);
    m.defaults.lambda_counterparty = HazardCurve(lambda_c);
    m.defaults.rec_investor = 0.0;
    m.defaults.rec_counterparty = 0.0;
    return m;
}

CsaSpec perfect_csa(const TimeGrid& grid, double c) {
    CsaSpec csa;
    csa.margin_dates.assign(grid.dates().begin(), grid.dates().end());
    csa.c_plus = AccrualRate::absolute(c);
    csa.c_minus = AccrualRate::absolute(c);
    csa.rule.alpha = 1.0;
    csa.close_out = CloseOutConvention::CollateralPrice;
    return csa;
}

McSettings settings() {
    McSettings s;
    s.workers = workers();
    return s;
}

// 1. Perfect collateral reduces to discounting at the collateral rate.
Outcome collateral_discounting() {
    auto t0 = std::chrono::steady_clock::now();
    MarketModel m = deterministic(0.01, 0.0, 0.0);
    TimeGrid grid = TimeGrid::uniform(1.0, 250);
    CsaSpec csa = perfect_csa(grid, 0.03);
    Deal deal({{1.0, Payoff::fixed(1.0)}});
    auto s = simulate(m, grid, kPaths, kSeed, workers());
    auto r = price_bccva(s, deal, csa, m.defaults, settings());
    double elapsed = seconds_since(t0);

    LimitCaseSpec spec;
    spec.kind = LimitCaseSpec::Kind::CollateralDiscounting;
    spec.risk_free = Curve::flat(0.01);
    spec.collateral_rate = 0.03;
    double discrete = discrete_recursion_oracle(spec, csa.margin_dates, {{1.0, 1.0}});
    double d_limit = std::abs(r.value - std::exp(-0.03));
    double d_discrete = std::abs(r.value - discrete);
    return {d_limit < 5e-4 && d_discrete < 1e-12 && elapsed < 10.0,
            fmt("V=%.12f |V-exp(-0.03)|=%.3e (<5e-4) |V-discrete|=%.3e (<1e-12) %.2fs (<10s)", r.value, d_limit,
                d_discrete, elapsed)};
}

// 2. Re-hypothecated perfect collateral leaves nothing to fund.
Outcome funding_with_collateral() {
    auto t0 = std::chrono::steady_clock::now();
    MarketModel m = deterministic(0.01, 0.0, 0.0);
    TimeGrid grid = TimeGrid::uniform(1.0, 250);
    CsaSpec csa = perfect_csa(grid, 0.03);
    csa.rehypothecation = true;
    LiquidityPolicy policy;
    policy.funding_dates = csa.margin_dates;
    policy.f_plus = AccrualRate::absolute(0.05);
    policy.f_minus = AccrualRate::absolute(0.02);
    Deal deal({{1.0, Payoff::fixed(1.0)}});
    auto s = simulate(m, grid, kPaths, kSeed, workers());
    auto r = price_bccfva(s, deal, csa, policy, m.defaults, settings());
    double elapsed = seconds_since(t0);
    return {std::abs(r.fva) < 1e-10 && elapsed < 10.0,
            fmt("FVA=%.3e (|FVA|<1e-10) funding component=%.3e %.2fs (<10s)", r.fva, r.components.funding, elapsed)};
}

// 3. Uncollateralized funding: discounting at f+ plus the counterparty intensity.
Outcome funding_without_collateral() {
    auto t0 = std::chrono::steady_clock::now();
    MarketModel m = deterministic(0.0, 0.0, 0.02);
    const int counts[] = {25, 50, 100, 250};
    std::vector<std::vector<double>> funding(4);
    for (int k = 0; k < 4; ++k)
        for (int j = 0; j <= counts[k]; ++j)
            funding[k].push_back(static_cast<double>(j) / counts[k]);
    TimeGrid grid = TimeGrid::merged({funding[0], funding[1], funding[2], funding[3]});
    Deal deal({{1.0, Payoff::fixed(1.0)}});
    auto s = simulate(m, grid, kPaths, kSeed, workers());
    const double target = std::exp(-0.07);
    std::vector<double> errors;
    PricingResult finest;
    for (int k = 0; k < 4; ++k) {
        LiquidityPolicy policy;
        policy.funding_dates = funding[k];
        policy.f_plus = AccrualRate::absolute(0.05);
        policy.f_minus = AccrualRate::absolute(0.0);
        finest = price_bccfva(s, deal, CsaSpec{}, policy, m.defaults, settings());
        errors.push_back(std::abs(finest.value - target));
    }
    double elapsed = seconds_since(t0);
    bool monotone = std::is_sorted(errors.rbegin(), errors.rend()) &&
                    std::adjacent_find(errors.begin(), errors.end()) == errors.end();
    double z = std::abs(finest.value - target) / finest.std_errors.value;
    Outcome o{z < 3.0 && monotone && elapsed < 30.0,
              fmt("V=%.6f se=%.2e |V-exp(-0.07)|/se=%.2f (<3) %.2fs (<30s)", finest.value, finest.std_errors.value,
                  z, elapsed)};
    o.detail += fmt(" errors m=25,50,100,250: %.3e %.3e %.3e %.3e", errors[0], errors[1], errors[2], errors[3]);
    o.detail += monotone ? " (decreasing)" : " (NOT decreasing)";
    return o;
}

// 4. Funding at the risk-free rate with full funder recovery adds nothing, path by path.
Outcome costless_funding() {
    MarketModel m;
    m.state = std::make_shared<GaussianShortRate>(Curve::flat(0.02), 0.08, 0.012);
    m.defaults.lambda_investor = HazardCurve(0.04);
    m.defaults.lambda_counterparty = HazardCurve({0.5}, {0.03, 0.07});
    m.defaults.rec_investor = 0.35;
    m.defaults.rec_counterparty = 0.4;
    m.defaults.rec_prime_investor = 0.7;
    m.defaults.rec_prime_counterparty = 0.9;
    m.defaults.correlation = 0.4;
    TimeGrid grid = TimeGrid::uniform(2.0, 48);
    Deal deal({{0.5, Payoff::linear(0.05, 30.0)}, {1.0, {Payoff::Kind::Call, 0.0, 40.0, -0.2, 1.0}},
               {2.0, Payoff::linear(-0.3, -60.0)}});
    LiquidityPolicy policy;
    policy.kind = PolicyKind::DirectMarket;
    policy.funder_recovery = 1.0;
    policy.f_plus = AccrualRate::spread(0.0);
    policy.f_minus = AccrualRate::spread(0.0);
    for (int j = 0; j <= 16; ++j)
        policy.funding_dates.push_back(j / 8.0);
    auto s = simulate(m, grid, 1 << 14, kSeed, workers());

    double worst = 0.0;
    for (int variant = 0; variant < 2; ++variant) {
        CsaSpec csa;
        for (int k = 0; k <= 8; ++k)
            csa.margin_dates.push_back(k / 4.0);
        csa.c_plus = AccrualRate::spread(0.01);
        csa.c_minus = AccrualRate::spread(0.003);
        if (variant == 0) {
            csa.rule = {0.6, 0.02, 0.01};
        } else {
            csa.rule.alpha = 1.0;
            csa.close_out = CloseOutConvention::CollateralPrice;
        }
        auto a = price_bccva(s, deal, csa, m.defaults, settings());
        auto b = price_bccfva(s, deal, csa, policy, m.defaults, settings());
        for (std::size_t p = 0; p < s.n_paths; ++p)
            worst = std::max(worst, std::abs(a.pathwise[p] - b.pathwise[p]));
    }
    return {worst <= 1e-10, fmt("max pathwise |BCCFVA-BCCVA|=%.3e (<=1e-10) over 2 CSAs", worst)};
}

// 5. Closed-form on-default flow against the case-by-case enumeration.
Outcome theta_enumeration() {
    auto t0 = std::chrono::steady_clock::now();
    PhiloxStream rng(kSeed, 0, 5);
    auto dyadic = [&](int range, int denom) {
        int k = static_cast<int>(rng.next_u32() % (2 * range + 1)) - range;
        return static_cast<double>(k) / denom;
    };
    auto recovery_pair = [&](double& rec, double& rec_prime) {
        int a = static_cast<int>(rng.next_u32() % 17), b = static_cast<int>(rng.next_u32() % 17);
        rec = std::min(a, b) / 16.0;
        rec_prime = std::max(a, b) / 16.0;
    };
    int mismatches = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        DefaultModel r;
        recovery_pair(r.rec_investor, r.rec_prime_investor);
        recovery_pair(r.rec_counterparty, r.rec_prime_counterparty);
        double eps = dyadic(6400, 64), c = dyadic(6400, 64);
        if (rng.next_u32() % 8 == 0)
            c = eps;
        Party who = rng.next_u32() % 2 ? Party::Counterparty : Party::Investor;
        if (on_default_flow(eps, c, who, r) != theta_by_cases(eps, c, who, r))
            ++mismatches;
    }
    double elapsed = seconds_since(t0);
    return {mismatches == 0 && elapsed < 1.0,
            fmt("%.0f mismatches in %.0f tuples (exact) %.3fs (<1s)", mismatches, n, elapsed)};
}

// 6. Gross margining flows equal costs plus accrued collateral at default, in expectation.
Outcome margin_rearrangement() {
    PhiloxStream rng(kSeed, 0, 6);
    MarketModel m;
    m.state = std::make_shared<GaussianShortRate>(Curve({{1.0, 0.015}, {3.0, 0.025}}), 0.1, 0.015);
    m.defaults.lambda_investor = HazardCurve({1.0, 2.0}, {0.1 * rng.uniform(), 0.2 * rng.uniform(), 0.1});
    m.defaults.lambda_counterparty = HazardCurve({1.5}, {0.3 * rng.uniform(), 0.2 * rng.uniform()});
    m.defaults.correlation = 0.2;
    TimeGrid grid = TimeGrid::uniform(3.0, 36);
    CsaSpec csa;
    for (int k = 0; k <= 12; ++k)
        csa.margin_dates.push_back(k / 4.0);
    csa.c_plus = AccrualRate::spread(0.02 * rng.uniform());
    csa.c_minus = AccrualRate::absolute(0.01 * rng.uniform());
    csa.rule.alpha = 1.0;
    MarginSchedule ms(csa, grid);
    const std::size_t n = 10000;
    auto s = simulate(m, grid, n, kSeed, workers());
    std::vector<double> diff(n), c(ms.size());
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t k = 0; k < ms.size(); ++k)
            c[k] = 100.0 * s.x(p, ms.index[k]) + 0.5 * std::sin(3.0 * k + p);
        double gross = margin_flows_gross(s, p, csa, ms, c);
        double rhs = margining_cost(s, p, csa, ms, c);
        if (s.tau(p) < grid.maturity())
            rhs += s.df_at_tau[p] * pre_default_collateral(s, p, csa, ms, c).value;
        diff[p] = gross - rhs;
    }
    auto e = estimate(s, diff);
    return {std::abs(e.mean) < 3 * e.std_error,
            fmt("mean difference=%.3e se=%.3e |mean|/se=%.2f (<3)", e.mean, e.std_error,
                std::abs(e.mean) / e.std_error)};
}

// 7. Engine against exhaustive enumeration on a two-state lattice.
struct LatticeCase {
    std::shared_ptr<BinaryLattice> model;
    TimeGrid grid{{0.0, 0.5, 1.0}};
    Deal deal;
    CsaSpec csa;
    DefaultModel defaults;
    double r = 0.02;
    double x0 = 0.0;
    double lo[2] = {-1.0, -0.5};
    double hi[2] = {1.0, 1.5};
    double p_lo = 0.4, p_hi = 0.7;
    std::vector<std::pair<double, double>> tau_c{{0.25, 0.1}, {0.75, 0.15}, {kNoDefault, 0.75}};
    std::vector<std::pair<double, double>> tau_i{{0.3, 0.05}, {0.6, 0.1}, {kNoDefault, 0.85}};
};

double lattice_rule(const CollateralRule& rule, double v) {
    double a = std::max(rule.alpha * std::abs(v) - rule.threshold, 0.0);
    if (rule.mta > 0.0)
        a = std::floor(a / rule.mta) * rule.mta;
    return v < 0 ? -a : a;
}

Outcome lattice_brute_force() {
    LatticeCase L;
    L.model = std::make_shared<BinaryLattice>(Curve::flat(L.r), L.x0,
                                              std::vector<BinaryLattice::Level>{{0.5, L.lo[0], L.hi[0]},
                                                                                {1.0, L.lo[1], L.hi[1]}},
                                              L.p_lo, L.p_hi);
    L.deal = Deal({{0.5, Payoff::linear(0.2, 1.0)}, {1.0, Payoff::linear(-0.1, 2.0)}});
    L.csa.margin_dates = {0.0, 0.5, 1.0};
    L.csa.c_plus = AccrualRate::absolute(0.04);
    L.csa.c_minus = AccrualRate::absolute(0.01);
    L.csa.rule = {0.8, 0.1, 0.05};
    L.csa.reference = CollateralReference::MarkToMarket;
    L.defaults.rec_investor = 0.3;
    L.defaults.rec_counterparty = 0.4;
    L.defaults.rec_prime_investor = 0.6;
    L.defaults.rec_prime_counterparty = 0.8;

    auto P = [&](double t, double u) { return std::exp(-L.r * (u - t)); };
    // Payoff of the flow at grid level j (0 -> t=0.5, 1 -> t=1.0).
    auto pay = [&](int j, double x) { return j == 0 ? 0.2 + x : -0.1 + 2.0 * x; };
    auto level = [&](int j, bool up) { return up ? L.hi[j] : L.lo[j]; };
    // E[payoff at level j | state known through level `known`, upper flag `up`].
    auto expect = [&](int j, int known, bool up) {
        if (j <= known)
            return pay(j, level(j, up));
        double ph = up ? 1.0 : 0.0;
        for (int k = known + 1; k <= j; ++k)
            ph = ph * L.p_hi + (1 - ph) * L.p_lo;
        return ph * pay(j, level(j, true)) + (1 - ph) * pay(j, level(j, false));
    };
    const double flow_time[2] = {0.5, 1.0};
    // Risk-free value at time t of flows paid strictly after t, state known through level `known`.
    auto mtm = [&](double t, int known, bool up) {
        double v = 0.0;
        for (int j = 0; j < 2; ++j)
            if (flow_time[j] > t)
                v += P(t, flow_time[j]) * expect(j, known, up);
        return v;
    };

    std::vector<double> state, df, ti, tc, xt, dft, w;
    double brute = 0.0;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            bool up0 = a == 1, up1 = b == 1;
            double pa = up0 ? L.p_lo : 1 - L.p_lo;
            double pb = up1 ? (up0 ? L.p_hi : L.p_lo) : (up0 ? 1 - L.p_hi : 1 - L.p_lo);
            double xs[3] = {L.x0, level(0, up0), level(1, up1)};
            bool ups[3] = {false, up0, up1};
            for (auto [tau_c, qc] : L.tau_c) {
                for (auto [tau_i, qi] : L.tau_i) {
                    double weight = pa * pb * qc * qi;
                    double tau = std::min(tau_c, tau_i);
                    Party who = tau_c < tau_i ? Party::Counterparty : Party::Investor;

                    double total = 0.0;
                    for (int j = 0; j < 2; ++j)
                        if (flow_time[j] < tau)
                            total += pay(j, xs[j + 1]) * P(0, flow_time[j]);

                    double coll[2] = {0.0, 0.0};
                    for (int k = 0; k < 2; ++k) {
                        double tk = 0.5 * k;
                        if (!(tk < tau))
                            break;
                        coll[k] = lattice_rule(L.csa.rule, mtm(tk, k - 1, ups[k]));
                        double grow = coll[k] > 0 ? 1 + 0.5 * 0.04 : 1 + 0.5 * 0.01;
                        total += P(0, tk) * (coll[k] - coll[k] * P(tk, tk + 0.5) * grow);
                    }

                    state.insert(state.end(), xs, xs + 3);
                    for (double t : {0.0, 0.5, 1.0})
                        df.push_back(P(0, t));
                    ti.push_back(tau_i);
                    tc.push_back(tau_c);
                    w.push_back(weight);
                    if (tau <= 1.0) {
                        int k = tau < 0.5 ? 0 : 1;
                        double x_tau = xs[k];
                        double eps = mtm(tau, k - 1, ups[k]);
                        double grow = coll[k] > 0 ? 1 + 0.5 * 0.04 : 1 + 0.5 * 0.01;
                        double c_pre = coll[k] * P(tau, 0.5 * (k + 1)) * grow;
                        total += P(0, tau) * theta_by_cases(eps, c_pre, who, L.defaults);
                        xt.push_back(x_tau);
                        dft.push_back(P(0, tau));
                    } else {
                        xt.push_back(std::nan(""));
                        dft.push_back(std::nan(""));
                    }
                    brute += weight * total;
                }
            }
        }
    }

    ScenarioSet s = ScenarioSet::empty(L.grid, w.size(), L.model);
    const std::size_t n = w.size();
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t i = 0; i < 3; ++i) {
            s.state[i * n + p] = state[p * 3 + i];
            s.df[i * n + p] = df[p * 3 + i];
        }
    }
    s.tau_investor = ti;
    s.tau_counterparty = tc;
    s.state_at_tau = xt;
    s.df_at_tau = dft;
    s.weights = w;
    s.validate();
    auto r = price_bccva(s, L.deal, L.csa, L.defaults);
    double d = std::abs(r.value - brute);
    return {d < 1e-12,
            fmt("engine=%.15f enumeration=%.15f |diff|=%.3e (<1e-12) over %.0f weighted scenarios", r.value, brute, d,
                static_cast<double>(w.size()))};
}

// 8. Report bodies do not depend on the worker count.
Outcome determinism() {
    const char* doc = R"({
      "model": {"curve": [[1.0, 0.015], [2.0, 0.02]], "volatility": 0.01,
                "hazard": {"investor": 0.03, "counterparty": {"ends": [1.0], "rates": [0.02, 0.05]}},
                "recovery": {"investor": 0.4, "counterparty": 0.35}, "correlation": 0.2},
      "deal": {"flows": [{"time": 0.5, "kind": "linear", "level": 0.1, "slope": 40.0},
                         {"time": 1.0, "kind": "put", "level": 0.0, "slope": 50.0, "strike": 0.2},
                         {"time": 2.0, "amount": 1.0}]},
      "csa": {"marginDates": {"count": 8}, "collateralRate": {"plus": {"spread": 0.01}, "minus": 0.0},
              "alpha": 0.9, "threshold": 0.02},
      "policy": {"kind": "directMarket", "fundingDates": {"count": 16},
                 "fundingRate": {"plus": {"spread": 0.015}, "minus": {"spread": 0.002}}, "funderRecovery": 0.4},
      "mc": {"paths": 16384, "seed": 42, "steps": 48},
      "mode": "bccfva"
    })";
    auto a = run_document(doc, {}, {1, false});
    auto b = run_document(doc, {}, {8, false});
    bool same = a.exit_code == kExitOk && b.exit_code == kExitOk && a.body == b.body;
    return {same, fmt("exit codes %.0f/%.0f, bodies %.0f bytes, identical=%.0f", a.exit_code, b.exit_code,
                      static_cast<double>(a.body.size()), same ? 1.0 : 0.0)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> check;
    };
    const Criterion criteria[] = {
        {"C1 collateral discounting", collateral_discounting},
        {"C2 funding with collateral", funding_with_collateral},
        {"C3 funding without collateral", funding_without_collateral},
        {"C4 costless funding collapse", costless_funding},
        {"C5 on-default flow enumeration", theta_enumeration},
        {"C6 margining rearrangement", margin_rearrangement},
        {"C7 lattice brute force", lattice_brute_force},
        {"C8 determinism across workers", determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
