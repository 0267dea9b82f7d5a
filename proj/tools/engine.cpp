// engine: command-line driver for the remuneration-option and underwriting-risk valuations.
//
//   engine price-cap        --config run.json [--out DIR]
//   engine simulate         --config run.json [--seed N] [--scenarios N] [--threads N] [--out DIR]
//   engine value            --config run.json [--seed N] [--scenarios N] [--threads N] [--out DIR]
//   engine calibrate-spread --config run.json [--point V,S --point V,S] [--out DIR]

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mcev/app.hpp"

namespace {

constexpr int exit_config_error = 2;
constexpr int exit_domain_error = 3;

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> scenarios;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::vector<std::string> points;
};

void add_common(CLI::App* cmd, Flags& f, bool stochastic) {
    cmd->add_option("--config", f.config, "run configuration (JSON)")->required();
    cmd->add_option("--out", f.out, "output directory");
    if (stochastic) {
        cmd->add_option("--seed", f.seed, "random seed");
        cmd->add_option("--scenarios", f.scenarios, "number of loss-ratio scenarios")->check(CLI::Range(2u, 100000000u));
        cmd->add_option("--threads", f.threads, "worker threads (0 = hardware)");
    }
}

mcev::SpreadPoint parse_point(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw mcev::ConfigError("--point expects REL_VOL,SPREAD, got '" + text + "'");
    return {mcev::io::detail::parse_double(text.substr(0, comma), "--point"),
            mcev::io::detail::parse_double(text.substr(comma + 1), "--point")};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Market and underwriting risk valuation for individual-protection portfolios"};
    app.set_version_flag("--version", mcev::app::version);
    app.require_subcommand(1);

    Flags flags;
    auto* price_cap = app.add_subcommand("price-cap", "value the remuneration option as a Black-76 cap strip");
    auto* simulate = app.add_subcommand("simulate", "generate loss-ratio scenarios, fan charts and histograms");
    auto* value = app.add_subcommand("value", "PVFP statistics, risk spread and underwriting risk cost");
    auto* calibrate = app.add_subcommand("calibrate-spread", "fit spread = a ln(b v + 1) through two points");
    add_common(price_cap, flags, false);
    add_common(simulate, flags, true);
    add_common(value, flags, true);
    add_common(calibrate, flags, false);
    calibrate->add_option("--point", flags.points, "REL_VOL,SPREAD calibration point (give two)")->expected(2);

    CLI11_PARSE(app, argc, argv);

    try {
        mcev::app::Overrides overrides{flags.seed, flags.scenarios, flags.out, flags.threads};
        mcev::app::RunConfig cfg = mcev::app::load_run_config(flags.config, overrides);

        if (price_cap->parsed()) {
            mcev::app::run_price_cap(cfg, std::cout);
        } else if (simulate->parsed()) {
            mcev::app::run_simulate(cfg, std::cout);
        } else if (value->parsed()) {
            mcev::app::run_value(cfg, std::cout);
        } else if (calibrate->parsed()) {
            if (!flags.points.empty()) {
                if (mcev::io::read_json(flags.config).contains("spread_calibration")) {
                    throw mcev::ConfigError("--point conflicts with config value 'spread_calibration'");
                }
                cfg.spread_points = {parse_point(flags.points.at(0)), parse_point(flags.points.at(1))};
            }
            mcev::app::run_calibrate_spread(cfg, std::cout);
        }
    } catch (const mcev::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const mcev::DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return exit_domain_error;
    } catch (const mcev::CalibrationError& e) {
        std::cerr << "calibration error: " << e.what() << "\n";
        return exit_domain_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
