#ifndef BILINEAR_ID_IO_HPP
#define BILINEAR_ID_IO_HPP

// Plain-text formats.
//
// System file:
//   bilinear <n> <m>
//   A 0
//   <n rows of n numbers>
//   ...
//   A m
//   <n rows of n numbers>
//
// Trajectory CSV: header t,x_1..x_n,u_1..u_m and one row per time step;
// the input fields of the final row are empty.
//
// Floats are written with 17 significant digits so text round trips are exact.

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "bilinear_id/errors.hpp"
#include "bilinear_id/linalg.hpp"
#include "bilinear_id/model.hpp"

namespace bilinear_id {

inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw FormatError("not a number: '" + std::string(s) + "'");
    }
    return x;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline void write_system(std::ostream& os, const BilinearSystem& sys) {
    os << "bilinear " << sys.n() << ' ' << sys.m() << '\n';
    for (std::size_t k = 0; k < sys.matrices().size(); ++k) {
        os << "A " << k << '\n';
        const Matrix& a = sys.A(k);
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            for (Eigen::Index j = 0; j < a.cols(); ++j) {
                if (j > 0) os << ' ';
                os << format_double(a(i, j));
            }
            os << '\n';
        }
    }
}

inline BilinearSystem read_system(std::istream& is) {
    std::string word;
    long long n = 0;
    long long m = 0;
    if (!(is >> word) || word != "bilinear" || !(is >> n >> m)) {
        throw FormatError("system file: expected header 'bilinear n m'");
    }
    if (n < 1 || m < 1) {
        throw FormatError("system file: n and m must be positive");
    }
    std::vector<Matrix> mats;
    for (long long k = 0; k <= m; ++k) {
        long long index = -1;
        if (!(is >> word) || word != "A" || !(is >> index) || index != k) {
            throw FormatError("system file: expected 'A " + std::to_string(k) + "'");
        }
        Matrix a(n, n);
        for (long long i = 0; i < n; ++i) {
            for (long long j = 0; j < n; ++j) {
                if (!(is >> word)) {
                    throw FormatError("system file: truncated block A " + std::to_string(k));
                }
                a(i, j) = parse_double(word);
            }
        }
        mats.push_back(std::move(a));
    }
    if (is >> word) {
        throw FormatError("system file: trailing content '" + word + "'");
    }
    return BilinearSystem(std::move(mats));
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const Eigen::Index n = traj.n();
    const Eigen::Index m = traj.m();
    os << 't';
    for (Eigen::Index i = 1; i <= n; ++i) os << ",x_" << i;
    for (Eigen::Index k = 1; k <= m; ++k) os << ",u_" << k;
    os << '\n';
    for (Eigen::Index t = 0; t < traj.states.cols(); ++t) {
        os << t;
        for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(traj.states(i, t));
        for (Eigen::Index k = 0; k < m; ++k) {
            os << ',';
            if (t < traj.inputs.cols()) os << format_double(traj.inputs(k, t));
        }
        os << '\n';
    }
}

/// Read a trajectory CSV; sigma_u is not part of the file and must be supplied.
inline Trajectory read_trajectory_csv(std::istream& is, const NoiseParams& params) {
    std::string line;
    if (!std::getline(is, line)) {
        throw FormatError("trajectory csv: missing header");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line, ',');
    if (header.empty() || header[0] != "t") {
        throw FormatError("trajectory csv: header must start with 't'");
    }
    Eigen::Index n = 0;
    Eigen::Index m = 0;
    for (std::size_t c = 1; c < header.size(); ++c) {
        const std::string expect_x = "x_" + std::to_string(n + 1);
        const std::string expect_u = "u_" + std::to_string(m + 1);
        if (m == 0 && header[c] == expect_x) {
            ++n;
        } else if (header[c] == expect_u) {
            ++m;
        } else {
            throw FormatError("trajectory csv: unexpected column '" + std::string(header[c]) + "'");
        }
    }
    if (n < 1 || m < 1) {
        throw FormatError("trajectory csv: need at least one state and one input column");
    }
    std::vector<std::vector<double>> xs;
    std::vector<std::vector<double>> us;
    bool inputs_ended = false;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != header.size()) {
            throw FormatError("trajectory csv: row " + std::to_string(xs.size()) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(header.size()));
        }
        if (parse_double(fields[0]) != static_cast<double>(xs.size())) {
            throw FormatError("trajectory csv: time index out of sequence at row " +
                              std::to_string(xs.size()));
        }
        std::vector<double> x;
        for (Eigen::Index i = 0; i < n; ++i) x.push_back(parse_double(fields[1 + i]));
        xs.push_back(std::move(x));
        bool blank = true;
        for (Eigen::Index k = 0; k < m; ++k) blank = blank && fields[1 + n + k].empty();
        if (blank) {
            inputs_ended = true;
            continue;
        }
        if (inputs_ended) {
            throw FormatError("trajectory csv: inputs present after a blank-input row");
        }
        std::vector<double> u;
        for (Eigen::Index k = 0; k < m; ++k) u.push_back(parse_double(fields[1 + n + k]));
        us.push_back(std::move(u));
    }
    if (us.size() + 1 != xs.size() || us.size() < 2) {
        throw FormatError("trajectory csv: need T+2 state rows and T+1 input rows with T >= 1");
    }
    Trajectory traj{Matrix(n, static_cast<Eigen::Index>(xs.size())),
                    Matrix(m, static_cast<Eigen::Index>(us.size())), std::nullopt, 0, params};
    for (std::size_t t = 0; t < xs.size(); ++t) {
        for (Eigen::Index i = 0; i < n; ++i) traj.states(i, static_cast<Eigen::Index>(t)) = xs[t][i];
    }
    for (std::size_t t = 0; t < us.size(); ++t) {
        for (Eigen::Index k = 0; k < m; ++k) traj.inputs(k, static_cast<Eigen::Index>(t)) = us[t][k];
    }
    require_finite(traj.states, "trajectory csv: states");
    require_finite(traj.inputs, "trajectory csv: inputs");
    return traj;
}

}  // namespace bilinear_id

#endif  // BILINEAR_ID_IO_HPP
