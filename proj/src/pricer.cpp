#include "xva/pricer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "xva/bonds.hpp"
#include "xva/log.hpp"
#include "xva/parallel.hpp"
#include "xva/regression.hpp"
#include "xva/signs.hpp"

namespace xva {

namespace {

// kReplacement accumulates, on every path and ignoring defaults, the deal
// flows and the funding flows of the adjusted price: the quantity whose
// conditional expectation is the funding-inclusive close-out amount.
enum Slot { kPayout, kMargining, kFunding, kOnDefault, kCva, kDva, kTotal, kReplacement, kSlots };

struct Accumulators {
    std::array<std::vector<double>, kSlots> a;
    explicit Accumulators(std::size_t n) {
        for (auto& v : a)
            v.assign(n, 0.0);
    }
    void add(Slot slot, std::size_t p, double amount) {
        a[slot][p] += amount;
        if (slot <= kOnDefault)
            a[kTotal][p] += amount;
    }
};

class Engine {
public:
    Engine(const ScenarioSet& s, const Deal& deal, const CsaSpec& csa, const LiquidityPolicy* policy,
           const DefaultModel& defaults, const McSettings& settings, const CollateralPaths* fixed)
        : s_(s), deal_(deal), csa_(csa), policy_(policy), defaults_(defaults), cfg_(settings),
          ms_(csa, s.grid), valuer_(s, deal), flows_at_(deal.by_grid_index(s.grid)), acc_(s.n_paths),
          fixed_(fixed) {
        if (s.n_paths == 0)
            throw std::invalid_argument("pricer: no paths");
        deal.validate(s.grid);
        csa.validate();
        defaults.validate();
        collateralized_ = csa.collateralized() || fixed;
        if (fixed && (fixed->n_dates != ms_.size() || fixed->values.size() != s.n_paths * ms_.size()))
            throw std::invalid_argument("pricer: collateral paths do not match the margining schedule");
        if (policy_) {
            policy_->validate();
            for (double t : policy_->funding_dates)
                funding_index_.push_back(s.grid.index_of(t));
        }
        build_events();
        collateral_.assign(s.n_paths * std::max<std::size_t>(ms_.size(), 1), 0.0);
        if (fixed)
            collateral_ = fixed->values;
        value_at_margin_.assign(s.n_paths, 0.0);
        funding_inclusive_ = policy_ && csa_.close_out == CloseOutConvention::FundingInclusive;
    }

    PricingResult run() {
        if (funding_inclusive_)
            funding_fits_.assign(s_.grid.size(), std::nullopt);
        sweep();
        return collect();
    }

private:
    // ---- setup -------------------------------------------------------------

    void build_events() {
        std::vector<std::size_t> idx{0, s_.grid.size() - 1};
        for (auto i : ms_.index)
            idx.push_back(i);
        for (auto i : funding_index_)
            idx.push_back(i);
        std::sort(idx.begin(), idx.end());
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        events_ = idx;
        margin_at_.assign(events_.size(), -1);
        funding_at_.assign(events_.size(), -1);
        for (std::size_t e = 0; e < events_.size(); ++e) {
            for (std::size_t k = 0; k < ms_.size(); ++k)
                if (ms_.index[k] == events_[e])
                    margin_at_[e] = static_cast<long>(k);
            for (std::size_t j = 0; j < funding_index_.size(); ++j)
                if (funding_index_[j] == events_[e])
                    funding_at_[e] = static_cast<long>(j);
        }
    }

    double& collateral(std::size_t p, std::size_t k) { return collateral_[p * ms_.size() + k]; }
    std::span<const double> collateral_row(std::size_t p) const {
        return {collateral_.data() + p * ms_.size(), ms_.size()};
    }

    // Copies the accumulator slots this pricing can write to.
    void copy_active(Accumulators& dst, const Accumulators& src) const {
        for (int slot = 0; slot < kSlots; ++slot) {
            if ((slot == kFunding && !policy_) || (slot == kReplacement && !funding_inclusive_))
                continue;
            dst.a[slot].assign(src.a[slot].begin(), src.a[slot].end());
        }
    }

    // Margining period containing grid date t (t_k <= t < t_{k+1}).
    long period_at(double t) const {
        auto k = ms_.period_containing(t);
        return k ? static_cast<long>(*k) : -1;
    }

    bool price_referenced() const {
        return collateralized_ && !fixed_ && csa_.reference == CollateralReference::Price;
    }

    RegressionFit fit(const std::vector<double>& features, std::size_t n_vars, const std::vector<double>& targets,
                      const std::vector<unsigned char>& mask) {
        RegressionSamples rs{features, n_vars, targets, s_.weights, mask};
        RegressionFit f = regress(rs, cfg_.degree);
        ++diag_.regressions;
        if (f.fallback)
            ++diag_.fallbacks;
        diag_.max_condition = std::max(diag_.max_condition, f.condition);
        return f;
    }

    FundingBonds funding_bonds(std::size_t j, double P) const {
        const auto& fd = policy_->funding_dates;
        return effective_funding_bonds(*policy_, defaults_, fd[j], fd[j + 1], P);
    }

    // ---- backward sweep ----------------------------------------------------

    void sweep() {
        const std::size_t E = events_.size();
        process_date(E - 1);
        for (std::size_t e = E - 1; e-- > 0;) {
            const double t = s_.grid[events_[e]];
            long k = collateralized_ ? period_at(t) : -1;
            if (k < 0) {
                process_interval(e);
                process_date(e);
                continue;
            }
            if (margin_at_[e] != k)
                continue;  // handled with the margining date opening the period
            std::size_t hi = e + 1;
            while (margin_at_[hi] != k + 1)
                ++hi;
            margin_block(static_cast<std::size_t>(k), e, hi);
        }
    }

    void run_block(std::size_t lo, std::size_t hi) {
        for (std::size_t e = hi; e-- > lo;) {
            process_interval(e);
            process_date(e);
        }
    }

    void margin_block(std::size_t k, std::size_t lo, std::size_t hi) {
        const std::size_t n = s_.n_paths;
        const double tk = ms_.time[k];
        if (!price_referenced()) {
            if (!fixed_) {
                parallel_for(n, cfg_.workers, [&](std::size_t b, std::size_t e) {
                    for (std::size_t p = b; p < e; ++p)
                        collateral(p, k) =
                            s_.tau(p) > tk ? csa_.rule(valuer_.mark_to_market(p, ms_.index[k])) : 0.0;
                });
            }
            run_block(lo, hi);
            iterations_ = std::max(iterations_, 1);
            return;
        }
        const double tol = cfg_.tolerance * std::max(1.0, std::abs(deal_.notional()));
        copy_active(saved_, acc_);
        const Accumulators& saved = saved_;
        auto& guess = guess_;
        auto& next = next_;
        auto& before = before_;
        auto& frozen = frozen_;
        // Start from the account of the following period.
        guess.assign(n, 0.0);
        for (std::size_t p = 0; p < n; ++p)
            guess[p] = s_.tau(p) > tk ? collateral(p, k + 1) : 0.0;
        next.assign(n, 0.0);
        before.assign(n, std::nan(""));
        frozen.assign(n, 0);
        for (int it = 1;; ++it) {
            if (it > 1)
                copy_active(acc_, saved);
            for (std::size_t p = 0; p < n; ++p)
                collateral(p, k) = guess[p];
            run_block(lo, hi);
            double diff = 0.0;
            std::size_t worst = 0;
            for (std::size_t p = 0; p < n; ++p) {
                next[p] = frozen[p] || !(s_.tau(p) > tk) ? guess[p] : csa_.rule(value_at_margin_[p]);
                double d = std::abs(next[p] - guess[p]);
                if (d > diff) {
                    diff = d;
                    worst = p;
                }
            }
            iterations_ = std::max(iterations_, it);
            if (diff <= tol)
                return;
            if (it >= cfg_.max_iterations)
                throw ConvergenceError("collateral fixed point did not converge at t=" + std::to_string(tk),
                                       guess[worst], next[worst]);
            // A discrete rule can alternate between two admissible amounts;
            // such paths keep the smaller one.
            std::size_t cycling = 0;
            for (std::size_t p = 0; p < n; ++p) {
                if (!frozen[p] && next[p] == before[p] && next[p] != guess[p]) {
                    frozen[p] = 1;
                    next[p] = std::abs(guess[p]) < std::abs(next[p]) ? guess[p] : next[p];
                    ++cycling;
                }
            }
            if (cycling)
                log_warn("collateral fixed point: " + std::to_string(cycling) + " paths alternate at t=" +
                         std::to_string(tk) + "; keeping the smaller amount");
            before = guess;
            guess = next;
        }
    }

    // Deal flows and the first default inside (t_e, t_{e+1}].
    void process_interval(std::size_t e) {
        const std::size_t i0 = events_[e], i1 = events_[e + 1];
        const double t0 = s_.grid[i0], t1 = s_.grid[i1], T = s_.grid.maturity();
        const std::vector<std::optional<RegressionFit>>* cont = funding_fits_.empty() ? nullptr : &funding_fits_;
        parallel_for(s_.n_paths, cfg_.workers, [&](std::size_t b, std::size_t end) {
            for (std::size_t p = b; p < end; ++p) {
                const double tau = s_.tau(p);
                if (funding_inclusive_)
                    for (std::size_t g = i0 + 1; g <= i1; ++g)
                        for (const Flow* f : flows_at_[g])
                            acc_.add(kReplacement, p, f->payoff(s_.x(p, g)) * s_.discount(p, g));
                if (!(tau > t0))
                    continue;
                for (std::size_t g = i0 + 1; g <= i1; ++g) {
                    if (!(s_.grid[g] < tau))
                        break;
                    for (const Flow* f : flows_at_[g])
                        acc_.add(kPayout, p, f->payoff(s_.x(p, g)) * s_.discount(p, g));
                }
                if (tau <= t1 && tau <= T) {
                    double c_pre = 0.0;
                    if (collateralized_)
                        c_pre = pre_default_collateral(s_, p, csa_, ms_, collateral_row(p)).value;
                    Party defaulted = s_.counterparty_first(p) ? Party::Counterparty : Party::Investor;
                    Party surviving = defaulted == Party::Counterparty ? Party::Investor : Party::Counterparty;
                    double eps = close_out_amount(csa_.close_out, surviving, p, valuer_, c_pre, cont);
                    double d = s_.df_at_tau[p];
                    acc_.add(kOnDefault, p, on_default_flow(eps, c_pre, defaulted, defaults_) * d);
                    auto adj = default_adjustment(eps, c_pre, defaulted, defaults_);
                    acc_.add(kCva, p, adj.cva * d);
                    acc_.add(kDva, p, adj.dva * d);
                }
            }
        });
    }

    // Margining summand, funding step and collateral reference at t_e.
    void process_date(std::size_t e) {
        const std::size_t n = s_.n_paths, i = events_[e];
        const double t = s_.grid[i];
        const long mk = margin_at_[e], fj = funding_at_[e];
        const bool margin_period = collateralized_ && mk >= 0 && static_cast<std::size_t>(mk) + 1 < ms_.size();
        const bool fund = policy_ && fj >= 0 && static_cast<std::size_t>(fj) + 1 < funding_index_.size() &&
                          t < s_.grid.maturity();
        const bool reference = mk >= 0 && price_referenced();
        const bool replacement = funding_inclusive_ && fj >= 0;
        if (!margin_period && !fund && !reference && !replacement)
            return;

        const long period = collateralized_ ? period_at(t) : -1;
        const bool with_c = period >= 0 && mk < 0;
        const std::size_t n_vars = with_c ? 2 : 1;
        // Under deterministic rates the period bonds do not depend on the path.
        const bool same_bonds = s_.model->deterministic_rates();
        struct Bonds {
            double P = 1.0, plus = 1.0, minus = 1.0;
        };
        auto margin_bonds = [&](double x) {
            double tn = ms_.time[static_cast<std::size_t>(mk) + 1];
            double P = s_.model->bond(t, tn, x);
            return Bonds{P, csa_.c_plus.bond(t, tn, P), csa_.c_minus.bond(t, tn, P)};
        };
        auto period_funding_bonds = [&](double x) {
            const std::size_t j = static_cast<std::size_t>(fj);
            double P = s_.model->bond(t, policy_->funding_dates[j + 1], x);
            auto fb = funding_bonds(j, P);
            return Bonds{P, fb.p_plus_effective, fb.p_minus};
        };
        const Bonds mb0 = same_bonds && margin_period ? margin_bonds(0.0) : Bonds{};
        const Bonds fb0 = same_bonds && fund ? period_funding_bonds(0.0) : Bonds{};
        auto& target = target_;
        auto& feats = feats_;
        auto& alive = alive_;
        target.assign(n, 0.0);
        feats.assign(n * n_vars, 0.0);
        alive.assign(n, 0);
        parallel_for(n, cfg_.workers, [&](std::size_t b, std::size_t end) {
            for (std::size_t p = b; p < end; ++p) {
                feats[p * n_vars] = s_.x(p, i);
                if (with_c)
                    feats[p * n_vars + 1] = collateral(p, static_cast<std::size_t>(period));
                if (!(s_.tau(p) > t))
                    continue;
                alive[p] = 1;
                if (margin_period) {
                    const Bonds mb = same_bonds ? mb0 : margin_bonds(s_.x(p, i));
                    double m = margin_cost_summand(collateral(p, static_cast<std::size_t>(mk)), mb.P, mb.plus,
                                                   mb.minus);
                    acc_.add(kMargining, p, m * s_.discount(p, i));
                }
                target[p] = acc_.a[kTotal][p] / s_.discount(p, i);
            }
        });
        std::fill(value_at_margin_.begin(), value_at_margin_.end(), 0.0);
        const bool any_alive = std::any_of(alive.begin(), alive.end(), [](unsigned char a) { return a != 0; });
        if ((fund || reference) && any_alive) {
            RegressionFit u = fit(feats, n_vars, target, alive);
            parallel_for(n, cfg_.workers, [&](std::size_t b, std::size_t end) {
                for (std::size_t p = b; p < end; ++p) {
                    if (!alive[p] && !(fund && replacement))
                        continue;
                    double a = u(std::span<const double>(feats.data() + p * n_vars, n_vars));
                    if (!fund) {
                        value_at_margin_[p] = a;
                        continue;
                    }
                    const Bonds fb = same_bonds ? fb0 : period_funding_bonds(s_.x(p, i));
                    double c = 0.0;
                    if (csa_.rehypothecation && period >= 0)
                        c = collateral(p, static_cast<std::size_t>(period));
                    double gap = a - c;
                    double z = gap >= 0.0 ? fb.plus / fb.P * gap : fb.minus / fb.P * gap;
                    double phi = funding_summand(z, fb.P, fb.plus, fb.minus) * s_.discount(p, i);
                    if (replacement)
                        acc_.add(kReplacement, p, phi);
                    if (!alive[p])
                        continue;
                    acc_.add(kFunding, p, phi);
                    value_at_margin_[p] = c + z;
                }
            });
        }
        if (replacement)
            fit_replacement(i);
    }

    // Fit of the funding-inclusive replacement value at grid date i on the
    // state, flows paid at i included.
    void fit_replacement(std::size_t i) {
        const std::size_t n = s_.n_paths;
        repl_feats_.assign(n, 0.0);
        repl_target_.assign(n, 0.0);
        repl_all_.assign(n, 1);
        parallel_for(n, cfg_.workers, [&](std::size_t b, std::size_t end) {
            for (std::size_t p = b; p < end; ++p) {
                double here = 0.0;
                for (const Flow* f : flows_at_[i])
                    here += f->payoff(s_.x(p, i));
                repl_feats_[p] = s_.x(p, i);
                repl_target_[p] = acc_.a[kReplacement][p] / s_.discount(p, i) + here;
            }
        });
        funding_fits_[i] = fit(repl_feats_, 1, repl_target_, repl_all_);
    }

    PricingResult collect() const {
        PricingResult r;
        r.seed = s_.seed;
        r.n_paths = s_.n_paths;
        auto est = [&](Slot slot) { return estimate(s_, acc_.a[slot]); };
        auto total = est(kTotal), pay = est(kPayout), mar = est(kMargining), fun = est(kFunding),
             def = est(kOnDefault), cva = est(kCva), dva = est(kDva);
        r.components = {pay.mean, mar.mean, fun.mean, def.mean};
        r.value = r.components.sum();
        r.cva = cva.mean;
        r.dva = dva.mean;
        r.std_errors.value = total.std_error;
        r.std_errors.components = {pay.std_error, mar.std_error, fun.std_error, def.std_error};
        r.std_errors.cva = cva.std_error;
        r.std_errors.dva = dva.std_error;
        r.iterations = iterations_;
        r.diagnostics = diag_;
        r.pathwise = acc_.a[kTotal];
        return r;
    }

    const ScenarioSet& s_;
    const Deal& deal_;
    const CsaSpec& csa_;
    const LiquidityPolicy* policy_;
    const DefaultModel& defaults_;
    McSettings cfg_;
    MarginSchedule ms_;
    CloseOutValuer valuer_;
    std::vector<std::vector<const Flow*>> flows_at_;
    Accumulators acc_;
    const CollateralPaths* fixed_;
    bool collateralized_ = false;
    bool funding_inclusive_ = false;

    std::vector<std::size_t> funding_index_;
    std::vector<std::size_t> events_;
    std::vector<long> margin_at_;
    std::vector<long> funding_at_;
    std::vector<double> collateral_;
    std::vector<double> value_at_margin_;
    // Scratch buffers reused across dates.
    Accumulators saved_{0};
    std::vector<double> target_, feats_, guess_, next_, before_;
    std::vector<unsigned char> alive_, frozen_;
    std::vector<double> repl_feats_, repl_target_;
    std::vector<unsigned char> repl_all_;
    std::vector<std::optional<RegressionFit>> funding_fits_;
    Diagnostics diag_;
    int iterations_ = 0;
};

}  // namespace

PricingResult price_bccva(const ScenarioSet& s, const Deal& deal, const CsaSpec& csa, const DefaultModel& defaults,
                          const McSettings& settings, const CollateralPaths* collateral) {
    return Engine(s, deal, csa, nullptr, defaults, settings, collateral).run();
}

PricingResult price_bccfva(const ScenarioSet& s, const Deal& deal, const CsaSpec& csa,
                           const LiquidityPolicy& policy, const DefaultModel& defaults,
                           const McSettings& settings) {
    PricingResult base = price_bccva(s, deal, csa, defaults, settings);
    PricingResult r = Engine(s, deal, csa, &policy, defaults, settings, nullptr).run();
    std::vector<double> diff(s.n_paths);
    for (std::size_t p = 0; p < s.n_paths; ++p)
        diff[p] = base.pathwise[p] - r.pathwise[p];
    r.fva = base.value - r.value;
    r.std_errors.fva = estimate(s, diff).std_error;
    r.iterations = std::max(r.iterations, base.iterations);
    return r;
}

FvaEstimate fva(const PricingResult& no_funding, const PricingResult& funding) {
    if (no_funding.seed != funding.seed || no_funding.n_paths != funding.n_paths ||
        no_funding.pathwise.size() != funding.pathwise.size())
        throw std::invalid_argument("fva: results come from different scenarios");
    const std::size_t n = funding.pathwise.size();
    FvaEstimate out{no_funding.value - funding.value, 0.0};
    if (n < 2)
        return out;
    double mean = 0.0;
    for (std::size_t p = 0; p < n; ++p)
        mean += no_funding.pathwise[p] - funding.pathwise[p];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        double d = no_funding.pathwise[p] - funding.pathwise[p] - mean;
        var += d * d;
    }
    out.std_error = std::sqrt(var / static_cast<double>(n - 1) / static_cast<double>(n));
    return out;
}

}  // namespace xva
