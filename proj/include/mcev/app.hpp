#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mcev/cap_pricer.hpp"
#include "mcev/io.hpp"
#include "mcev/loss_model.hpp"
#include "mcev/market_curves.hpp"
#include "mcev/projection.hpp"
#include "mcev/risk_engine.hpp"

// Command implementations behind the `engine` executable. Every command reads a
// RunConfig, writes its artifacts plus a manifest under the output directory
// and prints a short summary.
namespace mcev::app {

namespace fs = std::filesystem;
using io::json;

inline constexpr const char* version = "1.0.0";

inline constexpr std::size_t default_scenarios = 10000;
inline constexpr std::uint64_t default_seed = 20081;
inline constexpr std::size_t default_horizon = 30;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> scenarios;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
};

struct RunConfig {
    fs::path config_path;
    std::string config_text;

    std::optional<fs::path> curve_csv;
    std::optional<fs::path> vols_csv;
    double spot_index_rate = 0.0;
    double tax_rate = 0.0;

    std::optional<fs::path> cap;
    std::vector<fs::path> portfolios;
    std::optional<fs::path> weights;
    std::optional<fs::path> replay;

    std::size_t scenarios = default_scenarios;
    std::uint64_t seed = default_seed;
    std::size_t horizon = 0;  // 0: each portfolio's own chronicle
    double histogram_bin_width = 0.1;
    fs::path out = "out";
    unsigned threads = 0;

    std::vector<SpreadPoint> spread_points{{0.10, 0.02}, {0.20, 0.03}};
    std::optional<SpreadFunction> spread_function;
};

namespace detail {

using io::detail::get_field;
using io::detail::get_field_or;
using io::detail::resolve;

// A flag and a config key may both be given only if they agree.
template <typename T>
T merge(const json& doc, const char* key, const std::optional<T>& flag, T fallback, const std::string& where) {
    if (doc.contains(key)) {
        const T from_file = get_field<T>(doc, key, where);
        if (flag && *flag != from_file) {
            throw ConfigError(where + ": --" + std::string(key) + " conflicts with config value '" + key + "'");
        }
        return from_file;
    }
    return flag ? *flag : fallback;
}

}  // namespace detail

inline RunConfig parse_run_config(const json& doc, const fs::path& config_path, std::string config_text,
                                  const Overrides& flags = {}) {
    using detail::get_field;
    using detail::get_field_or;
    const std::string where = config_path.string();
    const fs::path base = config_path.parent_path();
    if (!doc.is_object()) throw ConfigError(where + ": configuration must be a JSON object");

    RunConfig cfg;
    cfg.config_path = config_path;
    cfg.config_text = std::move(config_text);

    if (doc.contains("market")) {
        const auto m = doc.at("market");
        if (m.contains("curve")) cfg.curve_csv = detail::resolve(base, get_field<std::string>(m, "curve", where + " market"));
        if (m.contains("vols")) cfg.vols_csv = detail::resolve(base, get_field<std::string>(m, "vols", where + " market"));
        cfg.spot_index_rate = get_field_or<double>(m, "spot_index_rate", 0.0, where + " market");
        cfg.tax_rate = get_field_or<double>(m, "tax_rate", 0.0, where + " market");
        if (!(cfg.tax_rate >= 0.0 && cfg.tax_rate < 1.0)) throw ConfigError(where + ": market.tax_rate must lie in [0,1)");
    }
    if (doc.contains("cap")) cfg.cap = detail::resolve(base, get_field<std::string>(doc, "cap", where));
    if (doc.contains("weights")) cfg.weights = detail::resolve(base, get_field<std::string>(doc, "weights", where));
    if (doc.contains("replay")) cfg.replay = detail::resolve(base, get_field<std::string>(doc, "replay", where));
    for (const auto& p : get_field_or<std::vector<std::string>>(doc, "portfolios", {}, where)) {
        cfg.portfolios.push_back(detail::resolve(base, p));
    }

    cfg.seed = detail::merge<std::uint64_t>(doc, "seed", flags.seed, default_seed, where);
    cfg.scenarios = detail::merge<std::size_t>(doc, "scenarios", flags.scenarios, default_scenarios, where);
    cfg.threads = detail::merge<unsigned>(doc, "threads", flags.threads, 0u, where);
    if (doc.contains("out")) {
        const auto from_file = get_field<std::string>(doc, "out", where);
        if (flags.out && fs::path(*flags.out) != fs::path(from_file)) {
            throw ConfigError(where + ": --out conflicts with config value 'out'");
        }
        cfg.out = detail::resolve(base, from_file);
    } else if (flags.out) {
        cfg.out = *flags.out;
    } else {
        cfg.out = "out";
    }

    cfg.horizon = get_field_or<std::size_t>(doc, "horizon", 0, where);
    cfg.histogram_bin_width = get_field_or<double>(doc, "histogram_bin_width", 0.1, where);
    if (cfg.scenarios < 2) throw ConfigError(where + ": 'scenarios' must be at least 2");
    if (doc.contains("horizon") && cfg.horizon < 1) throw ConfigError(where + ": 'horizon' must be at least 1");
    if (!(cfg.histogram_bin_width > 0.0)) throw ConfigError(where + ": 'histogram_bin_width' must be positive");

    if (doc.contains("spread_calibration")) {
        cfg.spread_points.clear();
        for (const auto& p : doc.at("spread_calibration")) {
            cfg.spread_points.push_back({get_field<double>(p, "rel_vol", where + " spread_calibration"),
                                         get_field<double>(p, "spread", where + " spread_calibration")});
        }
        if (cfg.spread_points.size() != 2) throw ConfigError(where + ": 'spread_calibration' needs exactly two points");
    }
    if (doc.contains("spread_function")) {
        const auto f = doc.at("spread_function");
        cfg.spread_function = SpreadFunction{get_field<double>(f, "a", where + " spread_function"),
                                             get_field<double>(f, "b", where + " spread_function"), 1.0};
    }
    return cfg;
}

inline RunConfig load_run_config(const fs::path& path, const Overrides& flags = {}) {
    std::string text = io::read_text(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": invalid JSON: " + e.what());
    }
    return parse_run_config(doc, path, std::move(text), flags);
}

inline MarketData load_market(const RunConfig& cfg) {
    if (!cfg.curve_csv) throw ConfigError(cfg.config_path.string() + ": missing market.curve (zero-coupon curve CSV)");
    if (!cfg.vols_csv) throw ConfigError(cfg.config_path.string() + ": missing market.vols (volatility CSV)");
    return MarketData(io::read_zero_curve(*cfg.curve_csv), io::read_vols(*cfg.vols_csv), cfg.spot_index_rate, cfg.tax_rate);
}

inline ZeroCurve load_curve(const RunConfig& cfg) {
    if (!cfg.curve_csv) throw ConfigError(cfg.config_path.string() + ": missing market.curve (zero-coupon curve CSV)");
    return io::read_zero_curve(*cfg.curve_csv);
}

inline std::vector<PortfolioSpec> load_portfolios(const RunConfig& cfg) {
    if (cfg.portfolios.empty()) throw ConfigError(cfg.config_path.string() + ": no portfolios configured");
    std::vector<PortfolioSpec> out;
    for (const auto& p : cfg.portfolios) out.push_back(io::read_portfolio(p, cfg.horizon, cfg.tax_rate));
    return out;
}

inline std::optional<WeightMatrix> load_weights(const RunConfig& cfg) {
    if (!cfg.weights) return std::nullopt;
    return io::read_weight_matrix(*cfg.weights);
}

inline SpreadFunction spread_function(const RunConfig& cfg) {
    if (cfg.spread_function) return *cfg.spread_function;
    return calibrate_spread(cfg.spread_points.at(0), cfg.spread_points.at(1));
}

// Manifest enabling an exact rerun. Thread count is deliberately absent: it
// does not affect results.
inline void write_manifest(const RunConfig& cfg, const std::string& command) {
    std::ostringstream effective;
    effective << cfg.config_text << "\n--seed=" << cfg.seed << "\n--scenarios=" << cfg.scenarios;
    json m = {{"command", command},
              {"config", cfg.config_path.filename().string()},
              {"config_hash", "fnv1a64:" + io::hex64(io::fnv1a64(effective.str()))},
              {"seed", cfg.seed},
              {"scenarios", cfg.scenarios},
              {"version", version}};
    io::write_text(cfg.out / "manifest.json", m.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// price-cap

struct PriceCapResult {
    CapValuation valuation;  // insurer-cost sign, booked flows and CRD filled in
    bool replayed = false;
};

inline std::string cap_report_csv(const CapSpec& spec, const MarketData& market, const CapValuation& priced,
                                  const CapValuation& report) {
    const std::size_t n = spec.horizon();
    std::ostringstream csv;
    csv << "row";
    for (std::size_t j = 0; j <= n; ++j) csv << ",t" << j;
    csv << "\n";
    auto periodic = [&](const char* name, auto value) {
        csv << name;
        for (std::size_t j = 0; j <= n; ++j) csv << "," << io::format_number(value(j));
        csv << "\n";
    };
    auto single = [&](const char* name, double value) {
        csv << name << "," << io::format_number(value);
        for (std::size_t j = 1; j <= n; ++j) csv << ",";
        csv << "\n";
    };
    const auto t = [&](std::size_t j) { return static_cast<double>(j) * spec.accrual; };
    periodic("zero_coupon_rate", [&](std::size_t j) { return market.curve.zero_rate(t(j)); });
    periodic("discount_factor", [&](std::size_t j) { return priced.discount_factors[j]; });
    periodic("index_forward_rate", [&](std::size_t j) { return priced.forwards[j]; });
    periodic("contractual_rate", [&](std::size_t j) { return spec.strike_at(j); });
    periodic("volatility", [&](std::size_t j) { return priced.vols[j]; });
    periodic("notional", [&](std::size_t j) { return spec.notionals[j]; });
    periodic("caps", [&](std::size_t j) { return report.caplet_values[j]; });
    single("stochastic_value", report.stochastic_value);
    single("deterministic_value", report.deterministic_value);
    single("valuation_spread", report.valuation_spread);
    single("sum_discounted_booked_flows", report.booked_flows_pv);
    single("crd", report.crd);
    return csv.str();
}

inline PriceCapResult run_price_cap(const RunConfig& cfg, std::ostream& log) {
    if (!cfg.cap) throw ConfigError(cfg.config_path.string() + ": missing 'cap' (cap specification JSON)");
    const MarketData market = load_market(cfg);
    const io::CapDocument doc = io::read_cap(*cfg.cap);

    const CapValuation priced = price_cap(doc.spec, market);
    CapValuation report = doc.replay ? valuation_from_caplets(doc.replay->caplet_values, doc.replay->deterministic_value)
                                     : as_insurer_cost(priced);
    report = with_option_cost(std::move(report), doc.booked_flows_pv, market.tax_rate);

    io::write_text(cfg.out / "cap_valuation.csv", cap_report_csv(doc.spec, market, priced, report));
    write_manifest(cfg, "price-cap");

    log << "Cost of remuneration option" << (doc.replay ? " (replayed caplets)" : "") << "\n"
        << "  stochastic value     " << io::format_fixed(report.stochastic_value, 2) << "\n"
        << "  deterministic value  " << io::format_fixed(report.deterministic_value, 2) << "\n"
        << "  valuation spread     " << io::format_fixed(report.valuation_spread, 2) << "\n"
        << "  booked flows (PV)    " << io::format_fixed(report.booked_flows_pv, 2) << "\n"
        << "  CRD                  " << io::format_fixed(report.crd, 2) << "\n";
    return {std::move(report), doc.replay.has_value()};
}

// ---------------------------------------------------------------------------
// simulate

inline std::string scenarios_csv(const LossScenarioSet& set) {
    std::string out = "scenario";
    for (std::size_t t = 0; t < set.horizon; ++t) out += ",y" + std::to_string(t + 1);
    out += "\n";
    for (std::size_t i = 0; i < set.scenario_count; ++i) {
        out += std::to_string(i);
        for (double v : set.row(i)) {
            out += ',';
            out += io::format_number(v);
        }
        out += '\n';
    }
    return out;
}

inline std::string fan_chart_csv(const std::vector<FanChartRow>& rows) {
    std::ostringstream csv;
    csv << "year,q01,q25,q50,q75,q99\n";
    for (const auto& r : rows) {
        csv << r.year;
        for (double q : r.quantiles) csv << "," << io::format_number(q);
        csv << "\n";
    }
    return csv.str();
}

inline std::string histogram_csv(const std::vector<HistogramBin>& bins) {
    std::ostringstream csv;
    csv << "bin_lower,bin_upper,count\n";
    for (const auto& b : bins) csv << io::format_number(b.lower) << "," << io::format_number(b.upper) << "," << b.count << "\n";
    return csv.str();
}

struct SimulatedPortfolio {
    PortfolioSpec spec;
    LognormalParams params;
    LossScenarioSet scenarios;
};

inline std::vector<SimulatedPortfolio> simulate_portfolios(const RunConfig& cfg) {
    const auto weights = load_weights(cfg);
    std::vector<SimulatedPortfolio> out;
    for (const auto& spec : load_portfolios(cfg)) {
        const ScenarioInputs inputs = scenario_inputs(spec, weights ? &*weights : nullptr);
        out.push_back({spec, inputs.params, generate_scenarios(inputs, cfg.scenarios, cfg.seed, cfg.threads)});
    }
    return out;
}

inline std::vector<SimulatedPortfolio> run_simulate(const RunConfig& cfg, std::ostream& log) {
    auto sims = simulate_portfolios(cfg);
    for (const auto& s : sims) {
        const auto& id = s.spec.id;
        io::write_text(cfg.out / ("scenarios_" + id + ".csv"), scenarios_csv(s.scenarios));
        io::write_text(cfg.out / ("fan_chart_" + id + ".csv"), fan_chart_csv(fan_chart(s.scenarios)));
        const auto year1 = s.scenarios.column(0);
        io::write_text(cfg.out / ("histogram_" + id + ".csv"), histogram_csv(histogram(year1, cfg.histogram_bin_width)));
        log << id << ": " << s.scenarios.scenario_count << " scenarios x " << s.scenarios.horizon
            << " years, mu=" << io::format_fixed(s.params.mu, 4) << " sigma=" << io::format_fixed(s.params.sigma, 4)
            << ", floored values: " << s.scenarios.floor_events << "\n";
    }
    write_manifest(cfg, "simulate");
    return sims;
}

// ---------------------------------------------------------------------------
// value

struct ValueResult {
    std::vector<PvfpStatistics> rows;
    RiskTotals totals;
    std::vector<std::pair<std::string, LognormalParams>> lognormal;
    SpreadFunction spread_fn;
};

inline std::string risk_report_csv(const std::vector<PvfpStatistics>& rows, const RiskTotals& totals) {
    std::ostringstream csv;
    csv << "portfolio,mean_pvfp,vol_pvfp,spread,pvfp_tsr_spread,pvfp_tsr,cur\n";
    for (const auto& r : rows) {
        csv << r.portfolio << "," << io::format_number(r.mean) << "," << io::format_number(r.vol) << ","
            << io::format_number(r.spread) << "," << io::format_number(r.pvfp_spread) << ","
            << io::format_number(r.pvfp_tsr) << "," << io::format_number(r.cur) << "\n";
    }
    csv << "total,,,,," << io::format_number(totals.pvfp_tsr) << "," << io::format_number(totals.cur) << "\n";
    return csv.str();
}

inline std::string lognormal_csv(const std::vector<std::pair<std::string, LognormalParams>>& params) {
    std::ostringstream csv;
    csv << "portfolio,mean_sp,sigma,mu,cv\n";
    for (const auto& [id, p] : params) {
        csv << id << "," << io::format_number(p.mean()) << "," << io::format_number(p.sigma) << ","
            << io::format_number(p.mu) << "," << io::format_number(p.coefficient_of_variation()) << "\n";
    }
    return csv.str();
}

/// Replay document: pre-computed PVFP figures per portfolio, either as
/// summary moments (`mean_pvfp`, `vol_pvfp`) or as a `samples_csv` file, plus
/// `pvfp_tsr` and `pvfp_tsr_spread`.
inline std::vector<PvfpStatistics> replay_statistics(const fs::path& path, const SpreadFunction& fn) {
    using io::detail::get_field;
    const json doc = io::read_json(path);
    const std::string where = path.string();
    std::vector<PvfpStatistics> rows;
    for (const auto& p : get_field<json>(doc, "portfolios", where)) {
        const auto id = get_field<std::string>(p, "id", where);
        const std::string w = where + " (" + id + ")";
        PvfpMoments m;
        if (p.contains("samples_csv")) {
            const auto samples = io::read_pvfp_samples(io::detail::resolve(path.parent_path(), get_field<std::string>(p, "samples_csv", w)));
            m = pvfp_stats(std::span<const double>(samples));
        } else {
            m = {get_field<double>(p, "mean_pvfp", w), get_field<double>(p, "vol_pvfp", w)};
        }
        rows.push_back(risk_statistics(id, m, get_field<double>(p, "pvfp_tsr", w), get_field<double>(p, "pvfp_tsr_spread", w), fn));
    }
    if (rows.empty()) throw ConfigError(where + ": no portfolios to replay");
    return rows;
}

inline void print_value_tables(const ValueResult& r, std::ostream& log) {
    if (!r.lognormal.empty()) {
        log << "Lognormal parameters of S/P(1)\n";
        for (const auto& [id, p] : r.lognormal) {
            log << "  " << id << "  mean " << io::format_percent(p.mean(), 0) << "  mu " << io::format_percent(p.mu, 0)
                << "  sigma " << io::format_percent(p.sigma, 0) << "\n";
        }
    }
    log << "Spread function: " << io::format_fixed(r.spread_fn.a, 6) << " * ln(" << io::format_fixed(r.spread_fn.b, 4)
        << " * v + 1)\n";
    log << "Underwriting risk cost\n";
    for (const auto& s : r.rows) {
        log << "  " << s.portfolio << "  E[PVFP] " << io::format_fixed(s.mean, 0) << "  Vol " << io::format_fixed(s.vol, 0)
            << "  spread " << io::format_percent(s.spread, 2) << "  PVFP(TSR+spread) " << io::format_fixed(s.pvfp_spread, 0)
            << "  PVFP(TSR) " << io::format_fixed(s.pvfp_tsr, 0) << "  CUR " << io::format_fixed(s.cur, 0) << "\n";
    }
    // The printed total adds the rounded rows so the table foots; the CSV keeps the exact sum.
    double pvfp_shown = 0.0, cur_shown = 0.0;
    for (const auto& s : r.rows) {
        pvfp_shown += std::round(s.pvfp_tsr);
        cur_shown += std::round(s.cur);
    }
    log << "  total  PVFP(TSR) " << io::format_fixed(pvfp_shown, 0) << "  CUR " << io::format_fixed(cur_shown, 0) << "\n";
}

inline ValueResult run_value(const RunConfig& cfg, std::ostream& log) {
    ValueResult r;
    r.spread_fn = spread_function(cfg);
    if (cfg.replay) {
        r.rows = replay_statistics(*cfg.replay, r.spread_fn);
    } else {
        const ZeroCurve curve = load_curve(cfg);
        for (const auto& s : simulate_portfolios(cfg)) {
            const auto samples = pvfp_batch(s.spec, s.scenarios, curve, 0.0, cfg.threads);
            std::ostringstream csv;
            csv << "scenario,pvfp\n";
            for (const auto& smp : samples) csv << smp.scenario_index << "," << io::format_number(smp.pvfp) << "\n";
            io::write_text(cfg.out / ("pvfp_" + s.spec.id + ".csv"), csv.str());
            r.lognormal.emplace_back(s.spec.id, s.params);
            r.rows.push_back(risk_statistics(s.spec, samples, curve, r.spread_fn));
        }
        io::write_text(cfg.out / "lognormal_params.csv", lognormal_csv(r.lognormal));
    }
    r.totals = aggregate(r.rows);
    io::write_text(cfg.out / "risk_report.csv", risk_report_csv(r.rows, r.totals));
    write_manifest(cfg, "value");
    print_value_tables(r, log);
    return r;
}

// ---------------------------------------------------------------------------
// calibrate-spread

inline SpreadFunction run_calibrate_spread(const RunConfig& cfg, std::ostream& log) {
    const SpreadFunction fn = calibrate_spread(cfg.spread_points.at(0), cfg.spread_points.at(1));
    const json doc = {{"a", fn.a}, {"b", fn.b}, {"c", fn.c}};
    io::write_text(cfg.out / "spread_function.json", doc.dump(2) + "\n");
    write_manifest(cfg, "calibrate-spread");
    log << "spread(v) = " << io::format_fixed(fn.a, 6) << " * ln(" << io::format_fixed(fn.b, 6) << " * v + 1)\n";
    for (const auto& p : cfg.spread_points) {
        log << "  v=" << io::format_percent(p.rel_vol, 2) << "  target " << io::format_percent(p.spread, 4) << "  fitted "
            << io::format_percent(fn(p.rel_vol), 4) << "\n";
    }
    return fn;
}

}  // namespace mcev::app
