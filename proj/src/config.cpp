#include "xva/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "xva/state_model.hpp"

namespace xva {

using nlohmann::json;

namespace {

// Reads fields of one JSON object and rejects keys nobody asked for.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw ParseError(path_ + ": expected an object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }
    const json& at(const std::string& key) {
        if (!has(key))
            throw ParseError(path_ + "." + key + ": missing");
        return j_.at(key);
    }
    double number(const std::string& key, double fallback) {
        if (!has(key))
            return fallback;
        return as_number(j_.at(key), path_ + "." + key);
    }
    bool boolean(const std::string& key, bool fallback) {
        if (!has(key))
            return fallback;
        if (!j_.at(key).is_boolean())
            throw ParseError(path_ + "." + key + ": expected true or false");
        return j_.at(key).get<bool>();
    }
    std::int64_t integer(const std::string& key, std::int64_t fallback) {
        if (!has(key))
            return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer())
            throw ParseError(path_ + "." + key + ": expected an integer");
        return v.get<std::int64_t>();
    }
    std::string text(const std::string& key, const std::string& fallback) {
        if (!has(key))
            return fallback;
        if (!j_.at(key).is_string())
            throw ParseError(path_ + "." + key + ": expected a string");
        return j_.at(key).get<std::string>();
    }
    std::string path(const std::string& key) const { return path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ParseError(path_ + "." + it.key() + ": unknown key");
    }

    static double as_number(const json& v, const std::string& where) {
        if (!v.is_number())
            throw ParseError(where + ": expected a number");
        return v.get<double>();
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<double> number_list(const json& v, const std::string& where) {
    if (!v.is_array())
        throw ParseError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v)
        out.push_back(Section::as_number(e, where));
    return out;
}

template <class E>
E lookup(const std::string& name, std::initializer_list<std::pair<const char*, E>> table, const std::string& where) {
    for (const auto& [k, v] : table)
        if (name == k)
            return v;
    throw ParseError(where + ": unknown value '" + name + "'");
}

template <class E>
const char* name_of(E value, std::initializer_list<std::pair<const char*, E>> table) {
    for (const auto& [k, v] : table)
        if (v == value)
            return k;
    return "";
}

const std::initializer_list<std::pair<const char*, Mode>> kModes = {
    {"bccva", Mode::Bccva}, {"bccfva", Mode::Bccfva}, {"fva", Mode::Fva}, {"oracle", Mode::Oracle}};
const std::initializer_list<std::pair<const char*, Format>> kFormats = {{"json", Format::Json},
                                                                         {"csv", Format::Csv}};
const std::initializer_list<std::pair<const char*, CloseOutConvention>> kCloseOuts = {
    {"riskFree", CloseOutConvention::RiskFree},
    {"collateralPrice", CloseOutConvention::CollateralPrice},
    {"fundingInclusive", CloseOutConvention::FundingInclusive}};
const std::initializer_list<std::pair<const char*, CollateralReference>> kReferences = {
    {"price", CollateralReference::Price}, {"markToMarket", CollateralReference::MarkToMarket}};
const std::initializer_list<std::pair<const char*, PolicyKind>> kPolicies = {
    {"treasury", PolicyKind::Treasury}, {"directMarket", PolicyKind::DirectMarket}};
const std::initializer_list<std::pair<const char*, LimitCaseSpec::Kind>> kOracles = {
    {"collateralDiscounting", LimitCaseSpec::Kind::CollateralDiscounting},
    {"fundingWithCollateral", LimitCaseSpec::Kind::FundingWithCollateral},
    {"fundingWithoutCollateral", LimitCaseSpec::Kind::FundingWithoutCollateral},
    {"riskFree", LimitCaseSpec::Kind::RiskFree}};
const std::initializer_list<std::pair<const char*, Payoff::Kind>> kPayoffs = {
    {"linear", Payoff::Kind::Linear}, {"call", Payoff::Kind::Call}, {"put", Payoff::Kind::Put}};
const std::initializer_list<std::pair<const char*, DealTemplate::Type>> kTemplates = {
    {"bullet", DealTemplate::Type::Bullet}, {"annuity", DealTemplate::Type::Annuity}};

// ---- readers ---------------------------------------------------------------

DateSpec read_dates(const json& v, const std::string& where) {
    DateSpec d;
    if (v.is_array()) {
        d.dates = number_list(v, where);
        return d;
    }
    Section s(v, where);
    std::int64_t n = s.integer("count", 0);
    s.at("count");
    s.finish();
    d.count = static_cast<int>(n);
    return d;
}

RateSpec read_rate(const json& v, const std::string& where) {
    if (v.is_number())
        return {false, v.get<double>()};
    Section s(v, where);
    RateSpec r;
    bool abs = s.has("absolute"), spr = s.has("spread");
    if (abs == spr)
        throw ParseError(where + ": give exactly one of 'absolute' or 'spread'");
    r.spread = spr;
    r.value = s.number(spr ? "spread" : "absolute", 0.0);
    s.finish();
    return r;
}

HazardSpec read_hazard(const json& v, const std::string& where) {
    HazardSpec h;
    if (v.is_number()) {
        h.rates = {v.get<double>()};
        return h;
    }
    Section s(v, where);
    h.ends = number_list(s.at("ends"), s.path("ends"));
    h.rates = number_list(s.at("rates"), s.path("rates"));
    s.finish();
    return h;
}

ModelConfig read_model(const json& v) {
    Section s(v, "model");
    ModelConfig m;
    if (s.has("curve")) {
        const json& c = s.at("curve");
        if (c.is_number()) {
            m.flat_rate = c.get<double>();
        } else if (c.is_array()) {
            for (const auto& p : c) {
                auto pair = number_list(p, "model.curve[]");
                if (pair.size() != 2)
                    throw ParseError("model.curve: pillars are [time, zeroRate] pairs");
                m.pillars.push_back({pair[0], pair[1]});
            }
        } else {
            throw ParseError("model.curve: expected a number or an array of pillars");
        }
    }
    m.mean_reversion = s.number("meanReversion", m.mean_reversion);
    m.volatility = s.number("volatility", m.volatility);
    if (s.has("hazard")) {
        Section h(s.at("hazard"), "model.hazard");
        if (h.has("investor"))
            m.hazard_investor = read_hazard(h.at("investor"), h.path("investor"));
        if (h.has("counterparty"))
            m.hazard_counterparty = read_hazard(h.at("counterparty"), h.path("counterparty"));
        h.finish();
    }
    if (s.has("recovery")) {
        Section r(s.at("recovery"), "model.recovery");
        m.rec_investor = r.number("investor", m.rec_investor);
        m.rec_counterparty = r.number("counterparty", m.rec_counterparty);
        m.rec_prime_investor = r.number("investorCollateral", m.rec_prime_investor);
        m.rec_prime_counterparty = r.number("counterpartyCollateral", m.rec_prime_counterparty);
        r.finish();
    }
    m.correlation = s.number("correlation", m.correlation);
    s.finish();
    return m;
}

DealConfig read_deal(const json& v) {
    Section s(v, "deal");
    DealConfig d;
    d.notional = s.number("notional", d.notional);
    bool has_template = s.has("template"), has_flows = s.has("flows");
    if (has_template == has_flows)
        throw ParseError("deal: give exactly one of 'template' or 'flows'");
    if (has_template) {
        Section t(s.at("template"), "deal.template");
        DealTemplate tp;
        tp.type = lookup(t.text("type", "bullet"), kTemplates, t.path("type"));
        tp.maturity = t.number("maturity", tp.maturity);
        tp.frequency = static_cast<int>(t.integer("frequency", tp.frequency));
        tp.amount = t.number("amount", tp.amount);
        t.finish();
        d.tmpl = tp;
    } else {
        const json& fl = s.at("flows");
        if (!fl.is_array())
            throw ParseError("deal.flows: expected an array");
        for (std::size_t i = 0; i < fl.size(); ++i) {
            Section f(fl[i], "deal.flows[" + std::to_string(i) + "]");
            Flow flow{Section::as_number(f.at("time"), f.path("time")), {}};
            if (f.has("amount")) {
                flow.payoff = Payoff::fixed(f.number("amount", 0.0));
            } else {
                flow.payoff.kind = lookup(f.text("kind", "linear"), kPayoffs, f.path("kind"));
                flow.payoff.level = f.number("level", 0.0);
                flow.payoff.slope = f.number("slope", 0.0);
                flow.payoff.strike = f.number("strike", 0.0);
                flow.payoff.scale = f.number("scale", 1.0);
            }
            f.finish();
            d.flows.push_back(flow);
        }
    }
    s.finish();
    return d;
}

std::pair<RateSpec, RateSpec> read_rate_pair(Section& s, const std::string& key) {
    std::pair<RateSpec, RateSpec> out;
    if (!s.has(key))
        return out;
    const json& v = s.at(key);
    if (v.is_number() || (v.is_object() && (v.contains("absolute") || v.contains("spread")))) {
        out.first = out.second = read_rate(v, s.path(key));
        return out;
    }
    Section r(v, s.path(key));
    if (r.has("plus"))
        out.first = read_rate(r.at("plus"), r.path("plus"));
    if (r.has("minus"))
        out.second = read_rate(r.at("minus"), r.path("minus"));
    r.finish();
    return out;
}

CsaConfig read_csa(const json& v) {
    Section s(v, "csa");
    CsaConfig c;
    c.margin_dates = read_dates(s.at("marginDates"), s.path("marginDates"));
    std::tie(c.c_plus, c.c_minus) = read_rate_pair(s, "collateralRate");
    c.alpha = s.number("alpha", c.alpha);
    c.threshold = s.number("threshold", c.threshold);
    c.mta = s.number("mta", c.mta);
    c.rehypothecation = s.boolean("rehypothecation", c.rehypothecation);
    c.close_out = lookup(s.text("closeOut", "riskFree"), kCloseOuts, s.path("closeOut"));
    c.reference = lookup(s.text("reference", "price"), kReferences, s.path("reference"));
    s.finish();
    return c;
}

PolicyConfig read_policy(const json& v) {
    Section s(v, "policy");
    PolicyConfig p;
    p.kind = lookup(s.text("kind", "treasury"), kPolicies, s.path("kind"));
    p.funding_dates = read_dates(s.at("fundingDates"), s.path("fundingDates"));
    std::tie(p.f_plus, p.f_minus) = read_rate_pair(s, "fundingRate");
    p.funder_recovery = s.number("funderRecovery", p.funder_recovery);
    if (s.has("spreads")) {
        Section sp(s.at("spreads"), "policy.spreads");
        SpreadDecomposition d;
        d.credit = sp.number("credit", 0.0);
        d.liquidity_plus = sp.number("liquidityPlus", 0.0);
        d.liquidity_minus = sp.number("liquidityMinus", 0.0);
        sp.finish();
        p.spreads = d;
    }
    s.finish();
    return p;
}

McConfig read_mc(const json& v) {
    Section s(v, "mc");
    McConfig m;
    m.paths = s.integer("paths", m.paths);
    if (s.has("seed")) {
        const json& seed = s.at("seed");
        if (!seed.is_number_unsigned())
            throw ParseError("mc.seed: expected a non-negative integer");
        m.seed = seed.get<std::uint64_t>();
    }
    m.degree = static_cast<int>(s.integer("degree", m.degree));
    m.steps = static_cast<int>(s.integer("steps", m.steps));
    m.tolerance = s.number("tolerance", m.tolerance);
    m.max_iterations = static_cast<int>(s.integer("maxIterations", m.max_iterations));
    s.finish();
    return m;
}

// ---- writers ---------------------------------------------------------------

json write_dates(const DateSpec& d) {
    if (d.count)
        return json{{"count", *d.count}};
    return json(d.dates);
}

json write_rate(const RateSpec& r) { return r.spread ? json{{"spread", r.value}} : json(r.value); }

json write_hazard(const HazardSpec& h) {
    if (h.ends.empty())
        return json(h.rates.at(0));
    return json{{"ends", h.ends}, {"rates", h.rates}};
}

json write_flow(const Flow& f) {
    json j{{"time", f.time}};
    const Payoff& p = f.payoff;
    if (p.kind == Payoff::Kind::Linear && p.slope == 0.0 && p.scale == 1.0) {
        j["amount"] = p.level;
        return j;
    }
    j["kind"] = name_of(p.kind, kPayoffs);
    j["level"] = p.level;
    j["slope"] = p.slope;
    j["strike"] = p.strike;
    j["scale"] = p.scale;
    return j;
}

}  // namespace

// ---- public ------------------------------------------------------------------

std::vector<double> DateSpec::resolve(double maturity) const {
    if (!count)
        return dates;
    std::vector<double> out;
    for (int i = 0; i <= *count; ++i)
        out.push_back(i == *count ? maturity : maturity * i / *count);
    return out;
}

Deal DealConfig::build() const {
    if (!tmpl)
        return Deal(flows, notional);
    std::vector<Flow> out;
    if (tmpl->type == DealTemplate::Type::Bullet) {
        out.push_back({tmpl->maturity, Payoff::fixed(tmpl->amount)});
    } else {
        long n = std::lround(tmpl->maturity * tmpl->frequency);
        for (long k = 1; k <= n; ++k)
            out.push_back({k == n ? tmpl->maturity : static_cast<double>(k) / tmpl->frequency,
                           Payoff::fixed(tmpl->amount)});
    }
    return Deal(out, notional);
}

Mode parse_mode(const std::string& name) { return lookup(name, kModes, "mode"); }
Format parse_format(const std::string& name) { return lookup(name, kFormats, "output.format"); }
std::string to_string(Mode mode) { return name_of(mode, kModes); }

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

RunConfig parse_config(const json& doc) {
    try {
        Section s(doc, "config");
        RunConfig c;
        if (s.has("model"))
            c.model = read_model(s.at("model"));
        c.deal = read_deal(s.at("deal"));
        if (s.has("csa") && !s.at("csa").is_null())
            c.csa = read_csa(s.at("csa"));
        if (s.has("policy") && !s.at("policy").is_null())
            c.policy = read_policy(s.at("policy"));
        if (s.has("mc"))
            c.mc = read_mc(s.at("mc"));
        c.mode = parse_mode(s.text("mode", "bccva"));
        if (s.has("oracle") && !s.at("oracle").is_null()) {
            if (!s.at("oracle").is_string())
                throw ParseError("config.oracle: expected a string");
            c.oracle = lookup(s.at("oracle").get<std::string>(), kOracles, "config.oracle");
        }
        if (s.has("output")) {
            Section o(s.at("output"), "output");
            c.output_path = o.text("path", "");
            c.format = parse_format(o.text("format", "json"));
            o.finish();
        }
        s.finish();
        return c;
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
}

json to_json(const RunConfig& c) {
    json model;
    if (c.model.pillars.empty()) {
        model["curve"] = c.model.flat_rate;
    } else {
        json pillars = json::array();
        for (const auto& p : c.model.pillars)
            pillars.push_back({p.time, p.zero_rate});
        model["curve"] = pillars;
    }
    model["meanReversion"] = c.model.mean_reversion;
    model["volatility"] = c.model.volatility;
    model["hazard"] = {{"investor", write_hazard(c.model.hazard_investor)},
                       {"counterparty", write_hazard(c.model.hazard_counterparty)}};
    model["recovery"] = {{"investor", c.model.rec_investor},
                         {"counterparty", c.model.rec_counterparty},
                         {"investorCollateral", c.model.rec_prime_investor},
                         {"counterpartyCollateral", c.model.rec_prime_counterparty}};
    model["correlation"] = c.model.correlation;

    json deal{{"notional", c.deal.notional}};
    if (c.deal.tmpl) {
        deal["template"] = {{"type", name_of(c.deal.tmpl->type, kTemplates)},
                            {"maturity", c.deal.tmpl->maturity},
                            {"frequency", c.deal.tmpl->frequency},
                            {"amount", c.deal.tmpl->amount}};
    } else {
        json flows = json::array();
        for (const auto& f : c.deal.flows)
            flows.push_back(write_flow(f));
        deal["flows"] = flows;
    }

    json out{{"model", model}, {"deal", deal}};
    if (c.csa) {
        const CsaConfig& a = *c.csa;
        out["csa"] = {{"marginDates", write_dates(a.margin_dates)},
                      {"collateralRate", {{"plus", write_rate(a.c_plus)}, {"minus", write_rate(a.c_minus)}}},
                      {"alpha", a.alpha},
                      {"threshold", a.threshold},
                      {"mta", a.mta},
                      {"rehypothecation", a.rehypothecation},
                      {"closeOut", name_of(a.close_out, kCloseOuts)},
                      {"reference", name_of(a.reference, kReferences)}};
    }
    if (c.policy) {
        const PolicyConfig& p = *c.policy;
        json pj{{"kind", name_of(p.kind, kPolicies)},
                {"fundingDates", write_dates(p.funding_dates)},
                {"fundingRate", {{"plus", write_rate(p.f_plus)}, {"minus", write_rate(p.f_minus)}}},
                {"funderRecovery", p.funder_recovery}};
        if (p.spreads)
            pj["spreads"] = {{"credit", p.spreads->credit},
                             {"liquidityPlus", p.spreads->liquidity_plus},
                             {"liquidityMinus", p.spreads->liquidity_minus}};
        out["policy"] = pj;
    }
    out["mc"] = {{"paths", c.mc.paths},     {"seed", c.mc.seed},
                 {"degree", c.mc.degree},   {"steps", c.mc.steps},
                 {"tolerance", c.mc.tolerance}, {"maxIterations", c.mc.max_iterations}};
    out["mode"] = to_string(c.mode);
    if (c.oracle)
        out["oracle"] = name_of(*c.oracle, kOracles);
    out["output"] = {{"path", c.output_path}, {"format", name_of(c.format, kFormats)}};
    return out;
}

std::string config_hash(const RunConfig& config) {
    std::string text = to_json(config).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void validate(const RunConfig& c) {
    auto fail = [](const std::string& m) { throw ValidationError(m); };
    if (c.mc.paths <= 0)
        fail("mc.paths must be positive");
    if (c.mc.degree < 0 || c.mc.degree > 6)
        fail("mc.degree must lie in [0, 6]");
    if (c.mc.steps <= 0)
        fail("mc.steps must be positive");
    if (!(c.mc.tolerance > 0.0))
        fail("mc.tolerance must be positive");
    if (c.mc.max_iterations <= 0)
        fail("mc.maxIterations must be positive");
    if (c.model.volatility < 0.0)
        fail("model.volatility must be non-negative");
    if (c.model.volatility > 0.0 && !(c.model.mean_reversion > 0.0))
        fail("model.meanReversion must be positive when volatility is positive");
    if (c.deal.tmpl) {
        if (!(c.deal.tmpl->maturity > 0.0))
            fail("deal.template.maturity must be positive");
        if (c.deal.tmpl->frequency <= 0)
            fail("deal.template.frequency must be positive");
    } else if (c.deal.flows.empty()) {
        fail("deal.flows must not be empty");
    }
    for (const DateSpec* d : {c.csa ? &c.csa->margin_dates : nullptr, c.policy ? &c.policy->funding_dates : nullptr})
        if (d && d->count && *d->count <= 0)
            fail("date count must be positive");
    if (c.mode == Mode::Oracle && !c.oracle)
        fail("mode oracle needs an 'oracle' kind");
    if ((c.mode == Mode::Bccfva || c.mode == Mode::Fva) && !c.policy)
        fail("mode " + to_string(c.mode) + " needs a 'policy' section");
    try {
        Assembled a = assemble(c);
        (void)a;
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        fail(e.what());
    }
}

Assembled assemble(const RunConfig& c) {
    ModelConfig m = c.model;
    Curve curve = m.pillars.empty() ? Curve::flat(m.flat_rate) : Curve(m.pillars);
    DefaultModel dm;
    dm.lambda_investor = m.hazard_investor.build();
    dm.lambda_counterparty = m.hazard_counterparty.build();
    dm.rec_investor = m.rec_investor;
    dm.rec_counterparty = m.rec_counterparty;
    dm.rec_prime_investor = m.rec_prime_investor;
    dm.rec_prime_counterparty = m.rec_prime_counterparty;
    dm.correlation = m.correlation;
    dm.validate();

    Deal deal = c.deal.build();
    const double T = deal.maturity();
    if (!(T > 0.0))
        throw ValidationError("deal maturity must be positive");

    CsaSpec csa;
    std::vector<double> margin, funding;
    if (c.csa) {
        margin = c.csa->margin_dates.resolve(T);
        csa.margin_dates = margin;
        csa.c_plus = c.csa->c_plus.build();
        csa.c_minus = c.csa->c_minus.build();
        csa.rule = {c.csa->alpha, c.csa->threshold, c.csa->mta};
        csa.rehypothecation = c.csa->rehypothecation;
        csa.close_out = c.csa->close_out;
        csa.reference = c.csa->reference;
        csa.validate();
    }
    std::optional<LiquidityPolicy> policy;
    if (c.policy) {
        LiquidityPolicy p;
        p.kind = c.policy->kind;
        funding = c.policy->funding_dates.resolve(T);
        p.funding_dates = funding;
        p.f_plus = c.policy->f_plus.build();
        p.f_minus = c.policy->f_minus.build();
        p.funder_recovery = c.policy->funder_recovery;
        p.spreads = c.policy->spreads;
        p.validate();
        policy = p;
    }
    for (double t : margin)
        if (t < 0.0 || t > T + kDateTolerance)
            throw ValidationError("margin dates must lie in [0, deal maturity]");
    for (double t : funding)
        if (t < 0.0 || t > T + kDateTolerance)
            throw ValidationError("funding dates must lie in [0, deal maturity]");

    TimeGrid base = TimeGrid::uniform(T, static_cast<std::size_t>(c.mc.steps));
    std::vector<double> pay = deal.payment_times();
    TimeGrid grid = TimeGrid::merged({base.dates(), margin, funding, pay});
    deal.validate(grid);

    auto state = std::make_shared<GaussianShortRate>(curve, m.mean_reversion, m.volatility);
    return {MarketModel{state, dm}, deal, grid, csa, policy};
}

LimitCaseSpec limit_case(const RunConfig& c) {
    if (!c.oracle)
        throw ValidationError("no oracle kind configured");
    LimitCaseSpec s;
    s.kind = *c.oracle;
    s.risk_free = c.model.pillars.empty() ? Curve::flat(c.model.flat_rate) : Curve(c.model.pillars);
    const auto& hc = c.model.hazard_counterparty;
    const auto& hi = c.model.hazard_investor;
    auto flat = [](const HazardSpec& h, const char* who) {
        if (!h.ends.empty() && std::any_of(h.rates.begin(), h.rates.end(), [&](double r) { return r != h.rates[0]; }))
            throw ValidationError(std::string("oracle needs a flat ") + who + " hazard");
        return h.rates.at(0);
    };
    s.lambda_counterparty = flat(hc, "counterparty");
    s.lambda_investor = flat(hi, "investor");
    s.recovery_investor = c.model.rec_investor;
    s.recovery_counterparty = c.model.rec_counterparty;
    if (c.csa) {
        if (c.csa->c_plus.spread)
            throw ValidationError("oracle needs an absolute collateral rate");
        s.collateral_rate = c.csa->c_plus.value;
    }
    if (c.policy) {
        if (c.policy->f_plus.spread)
            throw ValidationError("oracle needs an absolute funding rate");
        s.funding_rate_plus = c.policy->f_plus.value;
    }
    s.horizon = c.deal.build().maturity();
    return s;
}

}  // namespace xva
