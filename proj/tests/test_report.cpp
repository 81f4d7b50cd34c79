#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "jumpbsde/report.hpp"

using namespace jumpbsde;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("jumpbsde_test_" + name);
}

}  // namespace

TEST(Report, Fnv1aKnownValues) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Report, FormatDoubleRoundTrips) {
    for (double v : {0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0}) {
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
}

TEST(Report, ValueFieldRoundTrip) {
    const MarkovModel m({"lo", "hi"}, {{0, 1}, {1, 0}}, 1.0);
    ValueField u(TimeGrid::uniform(0.0, 1.0, 3), 2, 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
        u.at(i, 0) = 0.1 * i;
        u.at(i, 1) = -1.0 / (i + 3.0);
    }
    const auto path = temp_file("field.csv");
    write_atomic(path, with_fingerprint("deadbeef", value_field_csv(m, u)));
    const auto back = read_value_field_csv(path, m);
    EXPECT_EQ(back.grid(), u.grid());
    for (std::size_t i = 0; i < u.values().size(); ++i) EXPECT_EQ(back.values()[i], u.values()[i]);
    EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    std::filesystem::remove(path);
}

TEST(Report, MalformedValueFilesRejected) {
    const MarkovModel m({"lo", "hi"}, {{0, 1}, {1, 0}}, 1.0);
    const auto path = temp_file("bad.csv");
    for (const char* body : {"t,s,u\n0,lo,1\n", "time,state,u\n0,lo,x\n0,hi,1\n",
                             "time,state,u\n0,lo,1\n", "time,state,u\n0,lo,1\n0,lo,2\n0,hi,1\n"}) {
        write_atomic(path, body);
        EXPECT_THROW(read_value_field_csv(path, m), std::exception) << body;
    }
    std::filesystem::remove(path);
    EXPECT_THROW(read_value_field_csv(temp_file("missing.csv"), m), std::runtime_error);
}

TEST(Report, TrajectoriesCsv) {
    const MarkovModel m({"lo", "hi"}, {{0, 1}, {1, 0}}, 1.0);
    const std::vector<Trajectory> paths{Trajectory(0.0, 0, 1.0, {{0.5, 0, 1}}), Trajectory(0.0, 1, 1.0, {})};
    EXPECT_EQ(trajectories_csv(m, paths),
              "path_id,jump_index,time,from_state,to_state\n0,0,0.5,lo,hi\n");
}
