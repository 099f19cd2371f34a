#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace xva {

/// Flags attached to a grid date.
enum DateRole : std::uint8_t {
    kNone = 0,
    kMargin = 1,
    kFunding = 2,
    kPayout = 4,
};

/// Master simulation grid in year fractions.
///
/// Strictly increasing, starts at 0 and ends at the deal maturity. Every
/// margining, funding and payment date must be a member; lookups by time
/// use an exact match after snapping to a relative tolerance.
class TimeGrid {
public:
    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> dates);

    /// n equal steps on [0, maturity].
    static TimeGrid uniform(double maturity, std::size_t steps);

    /// Union of all the given date sets plus 0 (duplicates merged).
    static TimeGrid merged(std::initializer_list<std::span<const double>> sets);

    std::size_t size() const noexcept { return dates_.size(); }
    double operator[](std::size_t i) const { return dates_[i]; }
    double maturity() const { return dates_.back(); }
    std::span<const double> dates() const noexcept { return dates_; }

    /// Index of the grid date equal to t; throws std::invalid_argument when t is not on the grid.
    std::size_t index_of(double t) const;
    bool contains(double t) const noexcept;

    /// Index of the first grid date >= t (size() when t is beyond maturity).
    std::size_t first_at_or_after(double t) const noexcept;
    /// Index of the last grid date <= t.
    std::size_t last_at_or_before(double t) const noexcept;

    void mark(std::span<const double> times, DateRole role);
    bool has_role(std::size_t i, DateRole role) const noexcept { return (roles_[i] & role) != 0; }
    std::vector<std::size_t> indices_with(DateRole role) const;

private:
    std::vector<double> dates_;
    std::vector<std::uint8_t> roles_;
};

/// Tolerance used to decide whether two year fractions denote the same date.
inline constexpr double kDateTolerance = 1e-10;

}  // namespace xva
