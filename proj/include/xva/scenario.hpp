#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "xva/default_model.hpp"
#include "xva/state_model.hpp"
#include "xva/time_grid.hpp"

namespace xva {

/// Everything needed to generate scenarios.
struct MarketModel {
    std::shared_ptr<const StateModel> state;
    DefaultModel defaults;

    const Curve& curve() const { return state->curve(); }
};

/// Simulated paths on a common grid. State and discount arrays are stored
/// date by date (all paths at grid date 0, then date 1, ...), so sweeps
/// across paths at a fixed date read contiguous memory.
struct ScenarioSet {
    TimeGrid grid;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    std::shared_ptr<const StateModel> model;

    std::vector<double> state;  // grid.size() x n_paths
    std::vector<double> df;     // realized D(0,t_i)
    std::vector<double> tau_investor;
    std::vector<double> tau_counterparty;
    // State and D(0,tau) at the first default when it happens by maturity.
    std::vector<double> state_at_tau;
    std::vector<double> df_at_tau;
    /// Probability weights; empty means equally weighted paths.
    std::vector<double> weights;

    double x(std::size_t p, std::size_t i) const { return state[i * n_paths + p]; }
    double discount(std::size_t p, std::size_t i) const { return df[i * n_paths + p]; }
    double tau(std::size_t p) const { return std::min(tau_investor[p], tau_counterparty[p]); }
    bool counterparty_first(std::size_t p) const { return tau_counterparty[p] < tau_investor[p]; }
    double weight(std::size_t p) const {
        return weights.empty() ? 1.0 / static_cast<double>(n_paths) : weights[p];
    }

    /// Allocates storage for n paths on the grid with no defaults.
    static ScenarioSet empty(TimeGrid grid, std::size_t n, std::shared_ptr<const StateModel> model);
    /// Checks structural invariants; throws std::logic_error on violation.
    void validate() const;
};

/// Offset applied to the counterparty default time when both names default
/// at the same instant.
inline constexpr double kTieEpsilon = 1e-10;

/// Deterministic in (model, grid, n_paths, seed) for any worker count.
ScenarioSet simulate(const MarketModel& model, const TimeGrid& grid, std::size_t n_paths,
                     std::uint64_t seed, unsigned workers = 1);

/// Inverse-intensity default time for a survival-probability draw u.
double default_time_from_uniform(const HazardCurve& hazard, double u);

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Weighted mean and Monte Carlo standard error of per-path samples.
Estimate estimate(const ScenarioSet& s, const std::vector<double>& samples);

}  // namespace xva
