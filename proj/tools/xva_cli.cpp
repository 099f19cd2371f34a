#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "xva/log.hpp"
#include "xva/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Collateral- and funding-adjusted deal pricing"};
    std::string config_path, mode, output, format;
    std::uint64_t seed = 0;
    std::int64_t paths = 0;
    unsigned threads = 1;
    bool verbose = false;
    app.add_option("--config", config_path, "Run configuration (JSON)")->required();
    app.add_option("--mode", mode, "bccva, bccfva, fva or oracle");
    auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides the configuration)");
    auto* paths_opt = app.add_option("--paths", paths, "Number of paths (overrides the configuration)");
    app.add_option("--output", output, "Report file; standard output when omitted");
    app.add_option("--format", format, "json or csv");
    app.add_option("--threads", threads, "Worker threads (results do not depend on it)")
        ->check(CLI::Range(1u, 1024u));
    app.add_flag("--verbose", verbose, "Progress and warnings on standard error");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : xva::kExitParse;
    }
    if (verbose)
        xva::log_level() = static_cast<int>(xva::LogLevel::Info);

    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "cannot read " << config_path << "\n";
        return xva::kExitParse;
    }
    std::stringstream text;
    text << in.rdbuf();

    xva::Overrides o;
    try {
        if (!mode.empty())
            o.mode = xva::parse_mode(mode);
        if (!format.empty())
            o.format = xva::parse_format(format);
    } catch (const xva::ParseError& e) {
        std::cerr << e.what() << "\n";
        return xva::kExitParse;
    }
    if (*seed_opt)
        o.seed = seed;
    if (*paths_opt)
        o.paths = paths;
    if (!output.empty())
        o.output = output;

    xva::RunOutcome r = xva::run_document(text.str(), o, {threads, true});
    if (r.output_path.empty()) {
        std::cout << r.body;
    } else {
        std::ofstream out(r.output_path);
        out << r.body;
        if (!out) {
            std::cerr << "cannot write " << r.output_path << "\n";
            return xva::kExitFailure;
        }
    }
    if (r.exit_code != 0)
        std::cerr << r.body;
    return r.exit_code;
}
