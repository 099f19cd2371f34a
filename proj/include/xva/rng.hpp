#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace xva {

/// Philox4x32-10 counter-based generator. Each (seed, path, stream) triple
/// addresses an independent sequence, so a path's draws never depend on how
/// paths are distributed over workers.
class PhiloxStream {
public:
    PhiloxStream(std::uint64_t seed, std::uint64_t path, std::uint32_t stream = 0) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          path_(path), stream_(stream) {}

    /// Uniform on the open interval (0,1) with 53-bit resolution.
    double uniform() noexcept {
        std::uint32_t a = next_u32();
        std::uint32_t b = next_u32();
        return ((static_cast<double>(a >> 5) * 67108864.0 + static_cast<double>(b >> 6)) + 0.5) /
               9007199254740992.0;
    }

    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double phi = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

    std::uint32_t next_u32() noexcept {
        if (pos_ == 4) {
            block_ = generate(counter_++);
            pos_ = 0;
        }
        return block_[pos_++];
    }

private:
    std::array<std::uint32_t, 4> generate(std::uint64_t n) const noexcept {
        std::array<std::uint32_t, 4> c{static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(n >> 32),
                                       static_cast<std::uint32_t>(path_),
                                       static_cast<std::uint32_t>(path_ >> 32) ^ (stream_ * 0x9E3779B9u)};
        std::array<std::uint32_t, 2> k = key_;
        for (int round = 0; round < 10; ++round) {
            std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
            std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
            k[0] += 0x9E3779B9u;
            k[1] += 0xBB67AE85u;
        }
        return c;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t path_;
    std::uint32_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace xva
