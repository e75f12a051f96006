#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mixapprox/harness.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"mixapprox: desk-scale studies of mixture approximation rates"};
    std::string study;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_path;
    std::string format;
    bool strict = false;
    app.add_option("study", study, "conv-rate | mix-rate | mle-risk | bounds | check-identity")
        ->required()
        ->check(CLI::IsMember({"conv-rate", "mix-rate", "mle-risk", "bounds", "check-identity"}));
    app.add_option("--config", config_path, "key = value config file")->required();
    auto* seed_opt = app.add_option("--seed", seed, "overrides the config seed");
    auto* out_opt = app.add_option("--out", out_path, "output file (stdout when absent)");
    auto* format_opt = app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--strict", strict, "exit 3 when any bound check fails");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        mixapprox::ExperimentConfig config = mixapprox::load_config(config_path);
        if (!config.study.empty() && config.study != study) {
            throw mixapprox::ValidationError("config names study '" + config.study + "' but '" + study +
                                             "' was requested");
        }
        config.study = study;
        if (*seed_opt) {
            config.seed = seed;
        }
        if (*out_opt) {
            config.out_path = out_path;
        }
        if (*format_opt) {
            config.out_format = format;
        }
        const mixapprox::Report report = mixapprox::run_study(config);
        mixapprox::emit_report(report, config.out_path, config.out_format);
        for (const std::string& d : report.diagnostics) {
            std::cerr << "note: " << d << '\n';
        }
        if (!report.all_dominated()) {
            for (const auto& b : report.bounds) {
                if (!b.dominated) {
                    std::cerr << "bound " << b.bound_name << " failed at n=" << b.n << " N=" << b.N
                              << ": measured " << b.measured << " > rhs " << b.rhs << '\n';
                }
            }
            if (strict) {
                return 3;
            }
        }
        return 0;
    } catch (const mixapprox::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
