#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "mcev/cap_pricer.hpp"
#include "mcev/errors.hpp"
#include "mcev/loss_model.hpp"
#include "mcev/market_curves.hpp"
#include "mcev/projection.hpp"
#include "mcev/risk_engine.hpp"

namespace mcev::io {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Text helpers

inline std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const fs::path& path, std::string_view text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(path.string() + ": cannot open file for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw ConfigError(path.string() + ": write failed");
}

// Shortest representation that round-trips; independent of the C locale.
inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    std::string s(buf, res.ptr);
    if (s.find_first_not_of("-0.") == std::string::npos && !s.empty() && s[0] == '-') s.erase(0, 1);
    return s;
}

inline std::string format_percent(double v, int decimals) { return format_fixed(v * 100.0, decimals) + "%"; }

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t hash = 0xcbf29ce484222325ULL) {
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    const auto res = std::to_chars(buf, buf + 16, v, 16);
    std::string s(buf, res.ptr);
    return std::string(16 - s.size(), '0') + s;
}

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline double parse_double(std::string_view text, const std::string& where) {
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ConfigError(where + ": '" + std::string(text) + "' is not a number");
    }
    return v;
}

}  // namespace detail

// Numeric CSV with a mandatory header row. Blank lines and '#' comments are skipped.
inline CsvTable read_csv(const fs::path& path, std::span<const std::string_view> expected_header = {}) {
    const std::string text = read_text(path);
    std::istringstream in(text);
    std::string line;
    CsvTable table;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view body = detail::trim(line);
        if (body.empty() || body.front() == '#') continue;
        auto fields = detail::split(body);
        if (table.header.empty()) {
            for (auto f : fields) table.header.emplace_back(f);
            if (!expected_header.empty()) {
                bool ok = table.header.size() == expected_header.size();
                for (std::size_t i = 0; ok && i < expected_header.size(); ++i) ok = table.header[i] == expected_header[i];
                if (!ok) {
                    std::string want;
                    for (auto h : expected_header) want += (want.empty() ? "" : ",") + std::string(h);
                    throw ConfigError(path.string() + ": expected header '" + want + "'");
                }
            }
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(table.header.size()) + " fields");
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            row.push_back(detail::parse_double(fields[i], path.string() + ":" + std::to_string(line_no) + " field '" +
                                                              table.header[i] + "'"));
        }
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty()) throw ConfigError(path.string() + ": empty CSV");
    return table;
}

inline std::vector<double> csv_column(const CsvTable& t, std::size_t c) {
    std::vector<double> out;
    out.reserve(t.rows.size());
    for (const auto& r : t.rows) out.push_back(r[c]);
    return out;
}

inline ZeroCurve read_zero_curve(const fs::path& path) {
    static constexpr std::string_view header[] = {"tenor_years", "zero_rate"};
    const auto t = read_csv(path, header);
    try {
        return ZeroCurve(csv_column(t, 0), csv_column(t, 1));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

inline VolTermStructure read_vols(const fs::path& path) {
    static constexpr std::string_view header[] = {"fixing_years", "black_vol"};
    const auto t = read_csv(path, header);
    if (t.rows.empty()) throw ConfigError(path.string() + ": no volatility nodes");
    try {
        return VolTermStructure(csv_column(t, 0), csv_column(t, 1));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

// Chronicle CSV `year,expected_sp`, years 1..H in order.
inline std::vector<double> read_chronicle(const fs::path& path) {
    static constexpr std::string_view header[] = {"year", "expected_sp"};
    const auto t = read_csv(path, header);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (t.rows[i][0] != static_cast<double>(i + 1)) {
            throw ConfigError(path.string() + ": years must run 1, 2, ... without gaps");
        }
    }
    return csv_column(t, 1);
}

// PVFP samples CSV `scenario,pvfp`.
inline std::vector<double> read_pvfp_samples(const fs::path& path) {
    static constexpr std::string_view header[] = {"scenario", "pvfp"};
    return csv_column(read_csv(path, header), 1);
}

// ---------------------------------------------------------------------------
// JSON documents

inline json read_json(const fs::path& path) {
    const std::string text = read_text(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": invalid JSON: " + e.what());
    }
}

namespace detail {

template <typename T>
T get_field(const json& doc, const char* key, const std::string& where) {
    if (!doc.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + ": field '" + key + "' has the wrong type");
    }
}

template <typename T>
T get_field_or(const json& doc, const char* key, T fallback, const std::string& where) {
    if (!doc.contains(key) || doc.at(key).is_null()) return fallback;
    return get_field<T>(doc, key, where);
}

inline fs::path resolve(const fs::path& base_dir, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
}

inline RiskLevel parse_risk_level(const std::string& s, const std::string& where) {
    for (std::size_t i = 0; i < risk_level_names.size(); ++i) {
        if (s == risk_level_names[i]) return static_cast<RiskLevel>(i);
    }
    throw ConfigError(where + ": unknown risk level '" + s + "' (expected strong, moderate or weak)");
}

}  // namespace detail

/// Weight matrix JSON: {"portfolio_age": {"under_1y": a, "under_4y": b,
/// "4y_plus": c}, "homogeneity": {"strong": .., "moderate": .., "weak": ..}, ...}.
inline WeightMatrix parse_weight_matrix(const json& doc, const std::string& where) {
    WeightMatrix w;
    if (!doc.is_object()) throw ConfigError(where + ": weight matrix must be a JSON object");
    const auto age = detail::get_field<json>(doc, "portfolio_age", where);
    for (std::size_t b = 0; b < age_bucket_names.size(); ++b) {
        w.age[b] = detail::get_field<double>(age, std::string(age_bucket_names[b]).c_str(), where + " portfolio_age");
    }
    for (std::size_t c = 0; c < criterion_count; ++c) {
        const std::string name(criterion_names[c]);
        const auto row = detail::get_field<json>(doc, name.c_str(), where);
        for (std::size_t l = 0; l < risk_level_names.size(); ++l) {
            w.criteria[c][l] = detail::get_field<double>(row, std::string(risk_level_names[l]).c_str(), where + " " + name);
        }
    }
    return w;
}

inline WeightMatrix read_weight_matrix(const fs::path& path) { return parse_weight_matrix(read_json(path), path.string()); }

inline RiskCriteria parse_criteria(const json& doc, const std::string& where) {
    RiskCriteria rc;
    rc.portfolio_age = detail::get_field<double>(doc, "portfolio_age", where);
    if (rc.portfolio_age < 0.0) throw ConfigError(where + ": portfolio_age must be nonnegative");
    for (std::size_t c = 0; c < criterion_count; ++c) {
        const std::string name(criterion_names[c]);
        rc.ratings[c] = detail::parse_risk_level(detail::get_field<std::string>(doc, name.c_str(), where), where + " " + name);
    }
    return rc;
}

/// Portfolio JSON. `default_horizon` (0 = none) must match the chronicle the
/// document carries, and sets the length of a flat chronicle (30 years when
/// neither is given) built from `retained_sp` otherwise.
inline PortfolioSpec parse_portfolio(const json& doc, const fs::path& base_dir, const std::string& where,
                                     std::size_t default_horizon = 0, double default_tax_rate = 0.0) {
    using detail::get_field;
    using detail::get_field_or;
    PortfolioSpec p;
    p.id = get_field<std::string>(doc, "id", where);
    const std::string w = where + " (" + p.id + ")";
    p.initial_premium = get_field<double>(doc, "initial_premium", w);
    p.retained_sp = get_field_or<double>(doc, "retained_sp", 0.0, w);
    p.accounting_sp = get_field_or<double>(doc, "accounting_sp", 0.0, w);
    p.profit_share_rate = get_field_or<double>(doc, "profit_share_rate", 0.0, w);
    p.tax_rate = get_field_or<double>(doc, "tax_rate", default_tax_rate, w);
    p.reversion_speed = get_field_or<double>(doc, "reversion_speed", 0.8, w);
    p.actuarial_age = get_field_or<double>(doc, "actuarial_age", 0.0, w);
    p.risk_anticipation = get_field_or<bool>(doc, "risk_anticipation", false, w);

    if (doc.contains("chronicle")) {
        p.chronicle = get_field<std::vector<double>>(doc, "chronicle", w);
    } else if (doc.contains("chronicle_csv")) {
        p.chronicle = read_chronicle(detail::resolve(base_dir, get_field<std::string>(doc, "chronicle_csv", w)));
    } else {
        const auto h = static_cast<std::size_t>(get_field_or<double>(doc, "horizon", default_horizon ? static_cast<double>(default_horizon) : 30.0, w));
        if (h == 0) throw ConfigError(w + ": horizon must be at least one year");
        if (p.retained_sp <= 0.0) throw ConfigError(w + ": a flat chronicle needs a positive 'retained_sp'");
        p.chronicle.assign(h, p.retained_sp);
    }
    if (default_horizon != 0 && p.chronicle.size() != default_horizon) {
        throw ConfigError(w + ": chronicle covers " + std::to_string(p.chronicle.size()) + " years but the horizon is " +
                          std::to_string(default_horizon));
    }

    const auto renewal = get_field<json>(doc, "renewal", w);
    const auto mode = get_field<std::string>(renewal, "mode", w + " renewal");
    if (mode == "tacit") {
        p.renewal = TacitRenewal{get_field<double>(renewal, "lapse_rate", w + " renewal")};
    } else if (mode == "fixed_term") {
        p.renewal = FixedTerm{get_field<double>(renewal, "mean_remaining_term_months", w + " renewal")};
    } else {
        throw ConfigError(w + ": renewal mode must be 'tacit' or 'fixed_term'");
    }

    const auto vol = get_field<json>(doc, "volatility", w);
    const int given = static_cast<int>(vol.contains("sigma")) + static_cast<int>(vol.contains("cv")) +
                      static_cast<int>(vol.contains("criteria"));
    if (given != 1) throw ConfigError(w + ": volatility needs exactly one of 'sigma', 'cv' or 'criteria'");
    if (vol.contains("sigma")) {
        p.volatility = DirectSigma{get_field<double>(vol, "sigma", w + " volatility")};
    } else if (vol.contains("cv")) {
        p.volatility = DirectCoefficientOfVariation{get_field<double>(vol, "cv", w + " volatility")};
    } else {
        p.volatility = ScoredCriteria{parse_criteria(vol.at("criteria"), w + " volatility.criteria")};
    }

    try {
        p.validate();
    } catch (const DomainError& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return p;
}

inline PortfolioSpec read_portfolio(const fs::path& path, std::size_t default_horizon = 0, double default_tax_rate = 0.0) {
    return parse_portfolio(read_json(path), path.parent_path(), path.string(), default_horizon, default_tax_rate);
}

/// Per-period figures replayed instead of priced (insurer-cost sign).
struct CapReplay {
    std::vector<double> caplet_values;
    double deterministic_value = 0.0;
};

struct CapDocument {
    CapSpec spec;
    double booked_flows_pv = 0.0;
    std::optional<CapReplay> replay;
};

inline CapDocument parse_cap(const json& doc, const std::string& where) {
    using detail::get_field;
    using detail::get_field_or;
    CapDocument d;
    d.spec.strike = get_field<double>(doc, "strike", where);
    d.spec.index_tenor = get_field_or<double>(doc, "index_tenor_years", 3.0, where);
    d.spec.accrual = get_field_or<double>(doc, "accrual_years", 1.0, where);
    d.spec.notionals = get_field<std::vector<double>>(doc, "notionals", where);
    d.spec.strikes = get_field_or<std::vector<double>>(doc, "strikes", {}, where);
    d.spec.spot_index_first_fixing = get_field_or<bool>(doc, "spot_index_first_fixing", false, where);
    d.booked_flows_pv = get_field_or<double>(doc, "booked_flows_pv", 0.0, where);
    if (doc.contains("replay")) {
        const auto r = doc.at("replay");
        d.replay = CapReplay{get_field<std::vector<double>>(r, "caplet_values", where + " replay"),
                             get_field<double>(r, "deterministic_value", where + " replay")};
        if (d.replay->caplet_values.size() != d.spec.notionals.size()) {
            throw ConfigError(where + ": replay.caplet_values needs one value per period");
        }
    }
    try {
        d.spec.validate();
    } catch (const DomainError& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return d;
}

inline CapDocument read_cap(const fs::path& path) { return parse_cap(read_json(path), path.string()); }

}  // namespace mcev::io
