#include "xva/run.hpp"

#include <chrono>
#include <sstream>

#include "xva/log.hpp"
#include "xva/oracles.hpp"
#include "xva/pricer.hpp"

namespace xva {

using ordered = nlohmann::ordered_json;

namespace {

std::string error_record(const std::string& kind, const std::string& message, Format format,
                         const ConvergenceError* conv = nullptr) {
    ordered err{{"kind", kind}, {"message", message}};
    if (conv) {
        err["previous"] = conv->previous;
        err["last"] = conv->last;
    }
    if (format == Format::Csv) {
        std::ostringstream os;
        os << "key,value\nschemaVersion," << kSchemaVersion << "\nerror.kind," << kind << "\nerror.message,\""
           << [&] {
                  std::string m = message;
                  for (std::size_t p = 0; (p = m.find('"', p)) != std::string::npos; p += 2)
                      m.insert(p, "\"");
                  return m;
              }()
           << "\"\n";
        return os.str();
    }
    return ordered{{"schemaVersion", kSchemaVersion}, {"error", err}}.dump(2) + "\n";
}

ordered components_json(const Components& c) {
    return {{"payout", c.payout}, {"margining", c.margining}, {"funding", c.funding}, {"onDefault", c.on_default}};
}

ordered pricing_report(const RunConfig& config, const PricingResult& r, std::optional<double> bccva_value) {
    ordered rep;
    rep["schemaVersion"] = kSchemaVersion;
    rep["mode"] = to_string(config.mode);
    rep["value"] = r.value;
    rep["components"] = components_json(r.components);
    rep["cva"] = r.cva;
    rep["dva"] = r.dva;
    rep["fva"] = r.fva;
    if (bccva_value)
        rep["bccvaValue"] = *bccva_value;
    rep["stderr"] = {{"value", r.std_errors.value},
                     {"payout", r.std_errors.components.payout},
                     {"margining", r.std_errors.components.margining},
                     {"funding", r.std_errors.components.funding},
                     {"onDefault", r.std_errors.components.on_default},
                     {"cva", r.std_errors.cva},
                     {"dva", r.std_errors.dva},
                     {"fva", r.std_errors.fva}};
    rep["iterations"] = r.iterations;
    rep["diagnostics"] = {{"regressions", r.diagnostics.regressions},
                          {"reducedFits", r.diagnostics.fallbacks},
                          {"maxCondition", r.diagnostics.max_condition}};
    rep["seed"] = r.seed;
    rep["nPaths"] = r.n_paths;
    return rep;
}

ordered oracle_report(const RunConfig& config, const Assembled& a) {
    LimitCaseSpec spec = limit_case(config);
    std::vector<ScheduledFlow> flows;
    for (const auto& f : a.deal.flows()) {
        if (!f.payoff.deterministic())
            throw ValidationError("oracle mode needs deterministic flows");
        flows.push_back({f.time, f.payoff(0.0)});
    }
    ordered rep;
    rep["schemaVersion"] = kSchemaVersion;
    rep["mode"] = to_string(config.mode);
    rep["oracle"] = to_json(config)["oracle"];
    try {
        rep["value"] = limit_price(spec, flows);
        const std::vector<double>* dates = nullptr;
        if (spec.kind == LimitCaseSpec::Kind::FundingWithoutCollateral && a.policy)
            dates = &a.policy->funding_dates;
        else if (spec.kind != LimitCaseSpec::Kind::RiskFree && config.csa)
            dates = &a.csa.margin_dates;
        if (dates)
            rep["discreteValue"] = discrete_recursion_oracle(spec, *dates, flows);
    } catch (const std::domain_error& e) {
        throw ValidationError(e.what());
    }
    rep["components"] = nullptr;
    rep["cva"] = 0.0;
    rep["dva"] = 0.0;
    rep["fva"] = 0.0;
    rep["stderr"] = {{"value", 0.0}};
    rep["seed"] = config.mc.seed;
    rep["nPaths"] = 0;
    return rep;
}

void flatten(const ordered& j, const std::string& prefix, std::ostringstream& os) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), os);
        return;
    }
    os << prefix << ',';
    if (j.is_string())
        os << j.get<std::string>();
    else
        os << j.dump();
    os << '\n';
}

std::string render(const ordered& rep, Format format) {
    if (format == Format::Json)
        return rep.dump(2) + "\n";
    std::ostringstream os;
    os << "key,value\n";
    for (auto it = rep.begin(); it != rep.end(); ++it) {
        if (it.key() == "config") {
            std::string text = it.value().dump();
            std::string quoted;
            for (char ch : text)
                quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
            os << "config,\"" << quoted << "\"\n";
            continue;
        }
        flatten(it.value(), it.key(), os);
    }
    return os.str();
}

}  // namespace

void apply(const Overrides& o, RunConfig& c) {
    if (o.mode)
        c.mode = *o.mode;
    if (o.seed)
        c.mc.seed = *o.seed;
    if (o.paths)
        c.mc.paths = *o.paths;
    if (o.output)
        c.output_path = *o.output;
    if (o.format)
        c.format = *o.format;
}

RunOutcome run(const RunConfig& config, const RunOptions& options) {
    RunOutcome out;
    out.format = config.format;
    out.output_path = config.output_path;
    const auto start = std::chrono::steady_clock::now();
    try {
        validate(config);
        Assembled a = assemble(config);
        ordered rep;
        if (config.mode == Mode::Oracle) {
            rep = oracle_report(config, a);
        } else {
            McSettings mc;
            mc.degree = config.mc.degree;
            mc.workers = options.workers;
            mc.tolerance = config.mc.tolerance;
            mc.max_iterations = config.mc.max_iterations;
            log_info("simulating " + std::to_string(config.mc.paths) + " paths on " +
                     std::to_string(a.grid.size()) + " dates");
            ScenarioSet s = simulate(a.market, a.grid, static_cast<std::size_t>(config.mc.paths), config.mc.seed,
                                     options.workers);
            if (config.mode == Mode::Bccva) {
                rep = pricing_report(config, price_bccva(s, a.deal, a.csa, a.market.defaults, mc), std::nullopt);
            } else {
                PricingResult r = price_bccfva(s, a.deal, a.csa, *a.policy, a.market.defaults, mc);
                rep = pricing_report(config, r, r.value + r.fva);
            }
        }
        rep["configHash"] = config_hash(config);
        rep["config"] = to_json(config);
        if (options.wall_clock)
            rep["wallClock"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.body = render(rep, config.format);
    } catch (const ConvergenceError& e) {
        out.exit_code = kExitConvergence;
        out.body = error_record("convergence", e.what(), config.format, &e);
    } catch (const ValidationError& e) {
        out.exit_code = kExitValidation;
        out.body = error_record("validation", e.what(), config.format);
    } catch (const std::invalid_argument& e) {
        out.exit_code = kExitValidation;
        out.body = error_record("validation", e.what(), config.format);
    } catch (const std::exception& e) {
        out.exit_code = kExitFailure;
        out.body = error_record("failure", e.what(), config.format);
    }
    return out;
}

RunOutcome run_document(const std::string& text, const Overrides& overrides, const RunOptions& options) {
    RunConfig config;
    try {
        config = parse_config(text);
    } catch (const ParseError& e) {
        Format f = overrides.format.value_or(Format::Json);
        return {kExitParse, error_record("parse", e.what(), f), f, overrides.output.value_or("")};
    }
    apply(overrides, config);
    return run(config, options);
}

}  // namespace xva
