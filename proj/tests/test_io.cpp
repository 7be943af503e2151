#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "ipl/io.hpp"

using namespace ipl;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const fs::path p = fs::temp_directory_path() / ("ipl_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace

TEST(Csv, EmptyColumnSetIsHeaderOnly) {
    const fs::path p = scratch_dir() / "empty.csv";
    emit_csv(p, {});
    EXPECT_EQ(slurp(p), "\n");
    emit_csv(p, {{"a", {}}, {"b", {}}});
    EXPECT_EQ(slurp(p), "a,b\n");
}

TEST(Csv, LayoutAndLineEndings) {
    const fs::path p = scratch_dir() / "layout.csv";
    emit_csv(p, {{"x", {1.0, 0.5}}, {"y", {-2.0, 0.1}}});
    EXPECT_EQ(slurp(p), "x,y\n1,-2\n0.5,0.10000000000000001\n");
    EXPECT_THROW(emit_csv(p, {{"x", {1.0}}, {"y", {}}}), IoError);
}

TEST(Csv, RoundTripIsBitwise) {
    std::mt19937_64 gen(5);
    std::vector<double> v;
    for (int i = 0; i < 2000; ++i) {
        double d;
        const std::uint64_t bits = gen();
        std::memcpy(&d, &bits, sizeof d);
        if (std::isfinite(d))
            v.push_back(d);
    }
    v.push_back(0.1);
    v.push_back(-0.0);
    v.push_back(std::numeric_limits<double>::denorm_min());
    v.push_back(std::numeric_limits<double>::max());
    const fs::path p = scratch_dir() / "round.csv";
    emit_csv(p, {{"v", v}});
    const auto cols = read_csv(p);
    ASSERT_EQ(cols.size(), 1u);
    ASSERT_EQ(cols[0].second.size(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        EXPECT_EQ(std::memcmp(&v[i], &cols[0].second[i], sizeof(double)), 0) << i;
}

TEST(Csv, UnwritablePath) {
    EXPECT_THROW(emit_csv("/nonexistent_dir_xyz/a.csv", {{"a", {1.0}}}), IoError);
}

TEST(Pgm, ConstantImage) {
    ImageGrid img(2);
    img.values.setConstant(3.5);
    const fs::path p = scratch_dir() / "const.pgm";
    emit_pgm(p, img);
    EXPECT_EQ(slurp(p), "P2\n5 5\n65535\n0 0 0 0 0\n0 0 0 0 0\n0 0 0 0 0\n0 0 0 0 0\n0 0 0 0 0\n");
    EXPECT_EQ(slurp(scratch_dir() / "const.scale.txt"), "min=3.5\nmax=3.5\n");
}

TEST(Pgm, OrientationAndScale) {
    ImageGrid img(1);
    img.values(2, 2) = 1.0;   // x1 high, x2 high: top right
    img.values(0, 0) = -1.0;  // bottom left
    const fs::path p = scratch_dir() / "orient.pgm";
    emit_pgm(p, img);
    EXPECT_EQ(slurp(p), "P2\n3 3\n65535\n32768 32768 65535\n32768 32768 32768\n0 32768 32768\n");
    EXPECT_EQ(slurp(pgm_scale_path(p)), "min=-1\nmax=1\n");
}

TEST(Config, ParsesKeyValueLines) {
    const fs::path p = scratch_dir() / "run.cfg";
    {
        std::ofstream os(p);
        os << "# comment\n\nalpha = 1e-4\n  method=tikhonov  \n";
    }
    const auto kv = read_config(p);
    ASSERT_EQ(kv.size(), 2u);
    EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"alpha", "1e-4"}));
    EXPECT_EQ(kv[1], (std::pair<std::string, std::string>{"method", "tikhonov"}));
    {
        std::ofstream os(p);
        os << "novalue\n";
    }
    EXPECT_THROW(read_config(p), IoError);
    EXPECT_THROW(read_config(scratch_dir() / "missing.cfg"), IoError);
}

TEST(Numbers, ParseDouble) {
    EXPECT_EQ(parse_double("1e-4"), 1e-4);
    EXPECT_EQ(parse_double("+2.5"), 2.5);
    EXPECT_THROW(parse_double("2.5x"), IoError);
    EXPECT_THROW(parse_double(""), IoError);
}
