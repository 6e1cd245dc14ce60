#ifndef BILINEAR_ID_REPORT_HPP
#define BILINEAR_ID_REPORT_HPP

// Experiment config files and CSV reports.
//
// Config files are line-oriented `key = value` text whose keys are the
// ExperimentConfig field names; lists are comma separated, `#` starts a
// comment and unknown or repeated keys are rejected.

#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bilinear_id/errors.hpp"
#include "bilinear_id/experiment.hpp"
#include "bilinear_id/io.hpp"

namespace bilinear_id {

inline constexpr std::string_view kRowsHeader =
    "trial,T,sigma_u,sigma_w,err0_normalized,errk_avg_normalized,composite_error,cond_xtilde,"
    "rho_atilde,max_state_norm,seed,status";

inline constexpr std::string_view kBmsbHeader =
    "config,sigma_u,sigma_w,check,estimate,std_error,threshold,lower_bound,samples,status";

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline long long parse_integer(std::string_view s) {
    s = trim(s);
    long long x = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw FormatError("not an integer: '" + std::string(s) + "'");
    }
    return x;
}

inline std::uint64_t parse_unsigned(std::string_view s) {
    s = trim(s);
    std::uint64_t x = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw FormatError("not an unsigned integer: '" + std::string(s) + "'");
    }
    return x;
}

inline std::string optional_field(const std::optional<double>& x) {
    return x ? format_double(*x) : std::string{};
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& is) {
    ExperimentConfig cfg;
    std::set<std::string, std::less<>> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string_view s = line;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) {
            throw FormatError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key(detail::trim(s.substr(0, eq)));
        const std::string_view value = detail::trim(s.substr(eq + 1));
        if (!seen.insert(key).second) {
            throw FormatError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        try {
            if (key == "n") {
                cfg.n = detail::parse_integer(value);
            } else if (key == "m") {
                cfg.m = detail::parse_integer(value);
            } else if (key == "rho0") {
                cfg.rho0 = parse_double(value);
            } else if (key == "rhok") {
                cfg.rhok = parse_double(value);
            } else if (key == "sweep_variable") {
                if (value == "sigma_u") {
                    cfg.sweep_variable = SweepVariable::sigma_u;
                } else if (value == "sigma_w") {
                    cfg.sweep_variable = SweepVariable::sigma_w;
                } else {
                    throw FormatError("sweep_variable must be sigma_u or sigma_w");
                }
            } else if (key == "sweep_values") {
                cfg.sweep_values.clear();
                for (auto item : split(value, ',')) cfg.sweep_values.push_back(parse_double(item));
            } else if (key == "fixed_sigma") {
                cfg.fixed_sigma = parse_double(value);
            } else if (key == "T_values") {
                cfg.T_values.clear();
                for (auto item : split(value, ',')) cfg.T_values.push_back(detail::parse_integer(item));
            } else if (key == "repetitions") {
                cfg.repetitions = detail::parse_integer(value);
            } else if (key == "base_seed") {
                cfg.base_seed = detail::parse_unsigned(value);
            } else if (key == "delta") {
                cfg.delta = parse_double(value);
            } else {
                throw FormatError("unknown key '" + key + "'");
            }
        } catch (const FormatError& e) {
            throw FormatError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

inline void write_config(std::ostream& os, const ExperimentConfig& cfg) {
    os << "n = " << cfg.n << '\n'
       << "m = " << cfg.m << '\n'
       << "rho0 = " << format_double(cfg.rho0) << '\n'
       << "rhok = " << format_double(cfg.rhok) << '\n'
       << "sweep_variable = " << (cfg.sweep_variable == SweepVariable::sigma_u ? "sigma_u" : "sigma_w")
       << '\n'
       << "sweep_values = ";
    for (std::size_t i = 0; i < cfg.sweep_values.size(); ++i) {
        os << (i ? ", " : "") << format_double(cfg.sweep_values[i]);
    }
    os << "\nfixed_sigma = " << format_double(cfg.fixed_sigma) << "\nT_values = ";
    for (std::size_t i = 0; i < cfg.T_values.size(); ++i) {
        os << (i ? ", " : "") << cfg.T_values[i];
    }
    os << "\nrepetitions = " << cfg.repetitions << '\n'
       << "base_seed = " << cfg.base_seed << '\n'
       << "delta = " << format_double(cfg.delta) << '\n';
}

inline void write_rows_csv(std::ostream& os, const std::vector<ExperimentRow>& rows) {
    os << kRowsHeader << '\n';
    for (const ExperimentRow& r : rows) {
        os << r.trial << ',' << r.T << ',' << format_double(r.sigma_u) << ','
           << format_double(r.sigma_w) << ',' << detail::optional_field(r.err0_normalized) << ','
           << detail::optional_field(r.errk_avg_normalized) << ','
           << detail::optional_field(r.composite_error) << ',' << detail::optional_field(r.cond_xtilde)
           << ',' << format_double(r.rho_atilde) << ',' << detail::optional_field(r.max_state_norm)
           << ',' << r.seed << ',' << to_string(r.status) << '\n';
    }
}

inline void write_summary_csv(std::ostream& os, const std::vector<GroupSummary>& groups) {
    os << "sigma_u,sigma_w,T,ok,failed,mean,sd,median\n";
    for (const GroupSummary& g : groups) {
        os << format_double(g.sigma_u) << ',' << format_double(g.sigma_w) << ',' << g.T << ','
           << g.ok << ',' << g.failed << ',' << format_double(g.mean) << ',' << format_double(g.sd)
           << ',' << format_double(g.median) << '\n';
    }
}

inline void write_table1_csv(std::ostream& os, const std::vector<std::pair<double, double>>& table) {
    os << "sigma_u,rho_atilde\n";
    for (const auto& [s, rho] : table) {
        os << format_double(s) << ',' << format_double(rho) << '\n';
    }
}

inline void write_bmsb_csv(std::ostream& os, const std::vector<BmsbReportRow>& rows) {
    os << kBmsbHeader << '\n';
    for (const BmsbReportRow& r : rows) {
        os << r.config << ',' << format_double(r.sigma_u) << ',' << format_double(r.sigma_w) << ','
           << r.check << ',' << format_double(r.estimate) << ',' << format_double(r.std_error) << ','
           << format_double(r.threshold) << ',' << format_double(r.lower_bound) << ',' << r.samples
           << ',' << r.status << '\n';
    }
}

}  // namespace bilinear_id

#endif  // BILINEAR_ID_REPORT_HPP
