#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "xva/csa.hpp"
#include "xva/deal.hpp"
#include "xva/default_model.hpp"
#include "xva/oracles.hpp"
#include "xva/policy.hpp"
#include "xva/scenario.hpp"
#include "xva/time_grid.hpp"

namespace xva {

/// Malformed document: bad JSON, wrong types, unknown keys or names.
class ParseError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Well-formed but inconsistent or out-of-range inputs.
class ValidationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Mode { Bccva, Bccfva, Fva, Oracle };
enum class Format { Json, Csv };

/// Either an explicit list of dates or `count` equal periods up to maturity.
struct DateSpec {
    std::optional<int> count;
    std::vector<double> dates;
    std::vector<double> resolve(double maturity) const;
};

struct RateSpec {
    bool spread = false;
    double value = 0.0;
    AccrualRate build() const { return spread ? AccrualRate::spread(value) : AccrualRate::absolute(value); }
};

struct HazardSpec {
    std::vector<double> ends;
    std::vector<double> rates{0.0};
    HazardCurve build() const { return ends.empty() ? HazardCurve(rates.at(0)) : HazardCurve(ends, rates); }
};

struct ModelConfig {
    /// Zero-rate pillars; a flat curve when empty.
    std::vector<Curve::Pillar> pillars;
    double flat_rate = 0.0;
    double mean_reversion = 0.1;
    double volatility = 0.0;
    HazardSpec hazard_investor;
    HazardSpec hazard_counterparty;
    double rec_investor = 0.4;
    double rec_counterparty = 0.4;
    double rec_prime_investor = 1.0;
    double rec_prime_counterparty = 1.0;
    double correlation = 0.0;
};

struct DealTemplate {
    enum class Type { Bullet, Annuity };
    Type type = Type::Bullet;
    double maturity = 1.0;
    int frequency = 1;  // payments per year
    double amount = 1.0;
};

struct DealConfig {
    std::optional<DealTemplate> tmpl;
    std::vector<Flow> flows;
    double notional = 1.0;
    Deal build() const;
};

struct CsaConfig {
    DateSpec margin_dates;
    RateSpec c_plus;
    RateSpec c_minus;
    double alpha = 0.0;
    double threshold = 0.0;
    double mta = 0.0;
    bool rehypothecation = false;
    CloseOutConvention close_out = CloseOutConvention::RiskFree;
    CollateralReference reference = CollateralReference::Price;
};

struct PolicyConfig {
    PolicyKind kind = PolicyKind::Treasury;
    DateSpec funding_dates;
    RateSpec f_plus;
    RateSpec f_minus;
    double funder_recovery = 1.0;
    std::optional<SpreadDecomposition> spreads;
};

struct McConfig {
    std::int64_t paths = 1 << 16;
    std::uint64_t seed = 42;
    int degree = 2;
    int steps = 250;
    double tolerance = 1e-12;
    int max_iterations = 10;
};

struct RunConfig {
    ModelConfig model;
    DealConfig deal;
    std::optional<CsaConfig> csa;
    std::optional<PolicyConfig> policy;
    McConfig mc;
    Mode mode = Mode::Bccva;
    std::optional<LimitCaseSpec::Kind> oracle;
    std::string output_path;
    Format format = Format::Json;
};

/// Parses a JSON document; throws ParseError.
RunConfig parse_config(const std::string& text);
RunConfig parse_config(const nlohmann::json& doc);
/// Canonical JSON form; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& config);
/// FNV-1a 64-bit hash of the canonical form, as 16 hex digits.
std::string config_hash(const RunConfig& config);
/// Throws ValidationError.
void validate(const RunConfig& config);

Mode parse_mode(const std::string& name);
Format parse_format(const std::string& name);
std::string to_string(Mode mode);

/// Domain objects assembled from a validated configuration.
struct Assembled {
    MarketModel market;
    Deal deal;
    TimeGrid grid;
    CsaSpec csa;
    std::optional<LiquidityPolicy> policy;
};
Assembled assemble(const RunConfig& config);

/// Deterministic limit-case inputs read from the configuration.
LimitCaseSpec limit_case(const RunConfig& config);

}  // namespace xva
