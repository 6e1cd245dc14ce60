#include <limits>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "bilinear_id/experiment.hpp"
#include "bilinear_id/io.hpp"
#include "bilinear_id/report.hpp"

namespace bid = bilinear_id;
using bid::Matrix;
using bid::Vector;

TEST(FormatDouble, RoundTripsExactly) {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::numeric_limits<double>::max(),
                     std::numeric_limits<double>::denorm_min()}) {
        EXPECT_EQ(bid::parse_double(bid::format_double(x)), x);
    }
    EXPECT_EQ(bid::format_double(0.1), "0.10000000000000001");
}

TEST(ParseDouble, RejectsGarbage) {
    EXPECT_THROW(bid::parse_double("1.5x"), bid::FormatError);
    EXPECT_THROW(bid::parse_double(""), bid::FormatError);
}

TEST(SystemFile, RoundTrip) {
    const auto sys = bid::generate_system(3, 2, 0.6, 0.5, 1);
    std::stringstream ss;
    bid::write_system(ss, sys);
    EXPECT_EQ(ss.str().rfind("bilinear 3 2\nA 0\n", 0), 0u);
    const auto back = bid::read_system(ss);
    EXPECT_EQ(back, sys);
}

TEST(SystemFile, Malformed) {
    auto read = [](const std::string& text) {
        std::istringstream is(text);
        return bid::read_system(is);
    };
    EXPECT_THROW(read(""), bid::FormatError);
    EXPECT_THROW(read("linear 1 1\n"), bid::FormatError);
    EXPECT_THROW(read("bilinear 1 1\nA 0\n0.5\n"), bid::FormatError);
    EXPECT_THROW(read("bilinear 1 1\nA 0\n0.5\nA 2\n0.1\n"), bid::FormatError);
    EXPECT_THROW(read("bilinear 1 1\nA 0\n0.5\nA 1\n0.1\nextra\n"), bid::FormatError);
    EXPECT_THROW(read("bilinear 1 1\nA 0\nabc\nA 1\n0.1\n"), bid::FormatError);
    EXPECT_NO_THROW(read("bilinear 1 1\nA 0\n0.5\nA 1\n0.1\n"));
}

TEST(TrajectoryCsv, RoundTrip) {
    const auto sys = bid::generate_system(2, 2, 0.6, 0.5, 2);
    const auto traj = bid::simulate(sys, bid::NoiseParams(1.3, 0.2), 25, 3);
    std::stringstream ss;
    bid::write_trajectory_csv(ss, traj);
    std::string header;
    std::getline(ss, header);
    EXPECT_EQ(header, "t,x_1,x_2,u_1,u_2");
    ss.seekg(0);
    const auto back = bid::read_trajectory_csv(ss, bid::NoiseParams(1.3, 0.0));
    EXPECT_EQ(back.states, traj.states);
    EXPECT_EQ(back.inputs, traj.inputs);
    EXPECT_EQ(back.horizon(), 25);
    EXPECT_FALSE(back.noises.has_value());
}

TEST(TrajectoryCsv, FinalRowHasBlankInputs) {
    const auto sys = bid::generate_system(1, 2, 0.6, 0.5, 2);
    const auto traj = bid::simulate(sys, bid::NoiseParams(1.0, 0.2), 2, 3);
    std::stringstream ss;
    bid::write_trajectory_csv(ss, traj);
    std::string line, last;
    while (std::getline(ss, line)) last = line;
    EXPECT_EQ(last.substr(last.size() - 2), ",,");
    EXPECT_EQ(last.substr(0, 2), "3,");
}

TEST(TrajectoryCsv, Malformed) {
    auto read = [](const std::string& text) {
        std::istringstream is(text);
        return bid::read_trajectory_csv(is, bid::NoiseParams(1.0, 0.0));
    };
    EXPECT_THROW(read(""), bid::FormatError);
    EXPECT_THROW(read("time,x_1,u_1\n"), bid::FormatError);
    EXPECT_THROW(read("t,x_1,y_1\n"), bid::FormatError);
    EXPECT_THROW(read("t,x_1\n0,1\n"), bid::FormatError);
    EXPECT_THROW(read("t,x_1,u_1\n0,1,2\n1,1\n"), bid::FormatError);
    EXPECT_THROW(read("t,x_1,u_1\n0,1,2\n2,1,3\n2,1,\n"), bid::FormatError);
    EXPECT_THROW(read("t,x_1,u_1\n0,1,2\n1,1,\n2,1,3\n"), bid::FormatError);
    EXPECT_THROW(read("t,x_1,u_1\n0,1,2\n1,1,\n"), bid::FormatError);
    EXPECT_NO_THROW(read("t,x_1,u_1\n0,1,2\n1,1,3\n2,1,\n"));
    EXPECT_NO_THROW(read("t,x_1,u_1\r\n0,1,2\r\n1,1,3\r\n2,1,\r\n"));
}

TEST(Config, DefaultsRoundTrip) {
    std::stringstream ss;
    bid::write_config(ss, bid::ExperimentConfig{});
    const auto cfg = bid::parse_config(ss);
    const bid::ExperimentConfig def;
    EXPECT_EQ(cfg.n, def.n);
    EXPECT_EQ(cfg.m, def.m);
    EXPECT_EQ(cfg.sweep_values, def.sweep_values);
    EXPECT_EQ(cfg.T_values, def.T_values);
    EXPECT_EQ(cfg.base_seed, def.base_seed);
    EXPECT_EQ(cfg.delta, def.delta);
}

TEST(Config, ParsesKeysAndComments) {
    std::istringstream is(
        "# noise sweep\n"
        "n = 3\n"
        "m=2\n"
        "sweep_variable = sigma_w   # noise levels\n"
        "sweep_values = 0.1, 0.3, 1.0\n"
        "fixed_sigma = 1.5\n"
        "T_values = 100,200,400\n"
        "\n"
        "repetitions = 5\n"
        "base_seed = 18446744073709551615\n");
    const auto cfg = bid::parse_config(is);
    EXPECT_EQ(cfg.n, 3);
    EXPECT_EQ(cfg.m, 2);
    EXPECT_EQ(cfg.sweep_variable, bid::SweepVariable::sigma_w);
    EXPECT_EQ(cfg.sweep_values, (std::vector<double>{0.1, 0.3, 1.0}));
    EXPECT_EQ(cfg.sigmas(0.3), (std::pair<double, double>{1.5, 0.3}));
    EXPECT_EQ(cfg.T_values, (std::vector<long long>{100, 200, 400}));
    EXPECT_EQ(cfg.repetitions, 5);
    EXPECT_EQ(cfg.base_seed, 18446744073709551615ull);
}

TEST(Config, Errors) {
    auto parse = [](const std::string& text) {
        std::istringstream is(text);
        return bid::parse_config(is);
    };
    EXPECT_THROW(parse("colour = blue\n"), bid::FormatError);
    EXPECT_THROW(parse("n = 3\nn = 4\n"), bid::FormatError);
    EXPECT_THROW(parse("n 3\n"), bid::FormatError);
    EXPECT_THROW(parse("n = three\n"), bid::FormatError);
    EXPECT_THROW(parse("sweep_variable = sigma_x\n"), bid::FormatError);
    EXPECT_THROW(parse("T_values = 100, 50\n"), bid::ParameterError);
    EXPECT_THROW(parse("repetitions = 0\n"), bid::ParameterError);
}

TEST(RowsCsv, HeaderIsExact) {
    std::ostringstream os;
    bid::write_rows_csv(os, {});
    EXPECT_EQ(os.str(),
              "trial,T,sigma_u,sigma_w,err0_normalized,errk_avg_normalized,composite_error,cond_xtilde,"
              "rho_atilde,max_state_norm,seed,status\n");
}

TEST(RowsCsv, FailureRowsLeaveMetricsBlank) {
    bid::ExperimentRow row;
    row.trial = 3;
    row.T = 50;
    row.sigma_u = 1.5;
    row.sigma_w = 0.3;
    row.rho_atilde = 1.25;
    row.seed = 99;
    row.status = bid::RowStatus::unstable_config;
    std::ostringstream os;
    bid::write_rows_csv(os, {row});
    const std::string text = os.str();
    EXPECT_EQ(text.substr(text.find('\n') + 1), "3,50,1.5,0.29999999999999999,,,,,1.25,,99,unstable_config\n");
}
