#include "xva/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "xva/log.hpp"
#include "xva/parallel.hpp"

namespace xva {

ScenarioSet ScenarioSet::empty(TimeGrid grid, std::size_t n, std::shared_ptr<const StateModel> model) {
    ScenarioSet s;
    s.grid = std::move(grid);
    s.n_paths = n;
    s.model = std::move(model);
    std::size_t m = s.grid.size();
    s.state.assign(n * m, s.model->initial_state());
    s.df.assign(n * m, 1.0);
    s.tau_investor.assign(n, kNoDefault);
    s.tau_counterparty.assign(n, kNoDefault);
    s.state_at_tau.assign(n, std::nan(""));
    s.df_at_tau.assign(n, std::nan(""));
    return s;
}

void ScenarioSet::validate() const {
    double T = grid.maturity();
    for (std::size_t p = 0; p < n_paths; ++p) {
        if (discount(p, 0) != 1.0)
            throw std::logic_error("scenario: D(0,0) must be 1");
        if (tau_investor[p] == tau_counterparty[p] && tau_investor[p] <= T)
            throw std::logic_error("scenario: simultaneous defaults");
    }
    if (!weights.empty() && weights.size() != n_paths)
        throw std::logic_error("scenario: weight count mismatch");
}

double default_time_from_uniform(const HazardCurve& hazard, double u) {
    return hazard.inverse_cumulative(-std::log(u));
}

ScenarioSet simulate(const MarketModel& model, const TimeGrid& grid, std::size_t n_paths,
                     std::uint64_t seed, unsigned workers) {
    if (n_paths == 0)
        throw std::invalid_argument("simulate: need at least one path");
    model.defaults.validate();
    ScenarioSet s = ScenarioSet::empty(grid, n_paths, model.state);
    s.seed = seed;
    const std::size_t m = grid.size();
    const double T = grid.maturity();
    const double rho = model.defaults.correlation;
    const StateModel& sm = *model.state;
    std::vector<unsigned char> tied(n_paths, 0);

    parallel_for(n_paths, workers, [&](std::size_t begin, std::size_t end) {
        std::vector<double> integral(m, 0.0), x(m), df(m);
        for (std::size_t p = begin; p < end; ++p) {
            PhiloxStream rng(seed, p, 0);
            x[0] = sm.initial_state();
            df[0] = 1.0;
            for (std::size_t i = 1; i < m; ++i) {
                auto st = sm.step(grid[i - 1], grid[i], x[i - 1], rng);
                x[i] = st.state;
                integral[i] = integral[i - 1] + st.integral;
                df[i] = sm.discount_from_integral(grid[i], integral[i]);
            }
            for (std::size_t i = 0; i < m; ++i) {
                s.state[i * n_paths + p] = x[i];
                s.df[i * n_paths + p] = df[i];
            }

            PhiloxStream drng(seed, p, 1);
            double z1 = drng.normal(), z2 = drng.normal();
            double zc = rho * z1 + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * z2;
            double ti = default_time_from_uniform(model.defaults.lambda_investor, normal_cdf(z1));
            double tc = default_time_from_uniform(model.defaults.lambda_counterparty, normal_cdf(zc));
            if (ti == tc && ti <= T) {
                tc += kTieEpsilon;
                tied[p] = 1;
            }
            s.tau_investor[p] = ti;
            s.tau_counterparty[p] = tc;

            double tau = std::min(ti, tc);
            if (tau <= T) {
                std::size_t k = grid.last_at_or_before(tau);
                if (grid[k] == tau || k + 1 >= m) {
                    s.state_at_tau[p] = x[k];
                    s.df_at_tau[p] = df[k];
                } else {
                    PhiloxStream brng(seed, p, 2);
                    StateModel::Step end{x[k + 1], integral[k + 1] - integral[k]};
                    auto mid = sm.bridge(grid[k], x[k], grid[k + 1], end, tau, brng);
                    s.state_at_tau[p] = mid.state;
                    s.df_at_tau[p] = sm.discount_from_integral(tau, integral[k] + mid.integral);
                }
            }
        }
    });

    std::size_t ties = 0;
    for (auto t : tied)
        ties += t;
    if (ties)
        log_warn("simulate: broke " + std::to_string(ties) + " simultaneous default(s)");
    return s;
}

namespace {

// Neumaier-compensated running sum.
struct CompensatedSum {
    double sum = 0.0, carry = 0.0;
    void add(double v) {
        double t = sum + v;
        carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + carry; }
};

}  // namespace

Estimate estimate(const ScenarioSet& s, const std::vector<double>& samples) {
    const double n = static_cast<double>(s.n_paths);
    CompensatedSum total, wtotal;
    for (std::size_t p = 0; p < s.n_paths; ++p) {
        double w = s.weights.empty() ? 1.0 : s.weights[p];
        total.add(w * samples[p]);
        wtotal.add(w);
    }
    const double wsum = wtotal.value();
    const double mean = total.value() / wsum;
    CompensatedSum var;
    for (std::size_t p = 0; p < s.n_paths; ++p) {
        double w = (s.weights.empty() ? 1.0 : s.weights[p]) / wsum;
        double d = samples[p] - mean;
        var.add(w * w * d * d);
    }
    // For equal weights this is the sample variance of the mean.
    double corr = n > 1.0 && s.weights.empty() ? n / (n - 1.0) : 1.0;
    return {mean, std::sqrt(std::max(var.value(), 0.0) * corr)};
}

}  // namespace xva
