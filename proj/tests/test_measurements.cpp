#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "exposnet/io.hpp"
#include "exposnet/measurements.hpp"

using namespace exposnet;

TEST_CASE("tri-axis combination") {
    CHECK(combine_triaxis(0, 0, 0) == 0.0);
    CHECK(combine_triaxis(1, 0, 0) == 1.0);
    CHECK(combine_triaxis(1, 2, 2) == doctest::Approx(3.0));  // sqrt(9)
    CHECK_THROWS_AS(combine_triaxis(-1, 0, 0), std::invalid_argument);

    // Homogeneous of degree 1.
    CHECK(combine_triaxis(0.6, 1.0, 0.8) * 2.0 ==
          doctest::Approx(combine_triaxis(1.2, 2.0, 1.6)));
}

TEST_CASE("total field over the seven bands") {
    std::array<double, kNumBands> zero{};
    CHECK(total_field(zero) == 0.0);

    std::array<double, kNumBands> pyth{3, 4, 0, 0, 0, 0, 0};
    CHECK(total_field(pyth) == doctest::Approx(5.0));

    std::array<double, kNumBands> tenth;
    tenth.fill(0.1);
    CHECK(total_field(tenth) ==
          doctest::Approx(0.2645751311064591));  // sqrt(0.07)

    // Permutation invariance.
    std::array<double, kNumBands> perm{0, 0, 4, 0, 3, 0, 0};
    CHECK(total_field(perm) == doctest::Approx(total_field(pyth)));
}

namespace {
RawRecord record_at(double t, double level = 0.1) {
    RawRecord r;
    r.timestamp_s = t;
    for (auto& band : r.e_xyz) band = {level, level, level};
    return r;
}
}  // namespace

TEST_CASE("GPS synchronization") {
    std::vector<GpsFix> track = {{100.0, 0.0, 0.0}, {110.0, 0.0, 0.001}};

    SUBCASE("record at an exact fix time takes that fix") {
        auto res = sync_gps({record_at(110.0)}, track);
        REQUIRE(res.points.size() == 1);
        CHECK(res.points[0].lon == doctest::Approx(0.001));
        CHECK(res.dropped == 0);
    }
    SUBCASE("record midway between fixes interpolates linearly") {
        auto res = sync_gps({record_at(105.0)}, track);
        REQUIRE(res.points.size() == 1);
        CHECK(res.points[0].lon == doctest::Approx(0.0005));
        CHECK(res.points[0].lat == doctest::Approx(0.0));
    }
    SUBCASE("record 10 s past the last fix is dropped and counted") {
        auto res = sync_gps({record_at(120.0)}, track);
        CHECK(res.points.empty());
        CHECK(res.dropped == 1);
    }
    SUBCASE("record 3 s past the last fix clamps to it") {
        auto res = sync_gps({record_at(113.0)}, track);
        REQUIRE(res.points.size() == 1);
        CHECK(res.points[0].lon == doctest::Approx(0.001));
    }
    SUBCASE("synced points carry combined band fields and total") {
        auto res = sync_gps({record_at(105.0, 0.1)}, track);
        REQUIRE(res.points.size() == 1);
        // Each axis 0.1 -> band field sqrt(0.03).
        CHECK(res.points[0].e_band[0] ==
              doctest::Approx(std::sqrt(0.03)));
        CHECK(res.points[0].e_total ==
              doctest::Approx(std::sqrt(7 * 0.03)));
    }
    SUBCASE("non-increasing GPS timestamps are rejected") {
        std::vector<GpsFix> bad = {{100.0, 0.0, 0.0}, {100.0, 0.0, 0.001}};
        CHECK_THROWS_AS(sync_gps({record_at(100.0)}, bad),
                        std::invalid_argument);
    }
}

namespace {
MeasurementPoint point_with_band0(double v) {
    MeasurementPoint p;
    p.e_band[0] = v;
    p.e_total = v;
    return p;
}
}  // namespace

TEST_CASE("area aggregation") {
    SUBCASE("constant series: RMS equals the value, STD zero") {
        std::vector<MeasurementPoint> pts(5, point_with_band0(1.0));
        AreaStats s = aggregate_area(pts);
        CHECK(s.rms[0] == doctest::Approx(1.0));
        CHECK(s.std[0] == doctest::Approx(0.0));
        CHECK(s.n_points == 5);
    }
    SUBCASE("alternating 3/4 series: RMS sqrt(12.5), STD 0.5") {
        std::vector<MeasurementPoint> pts;
        for (int i = 0; i < 6; ++i)
            pts.push_back(point_with_band0(i % 2 ? 4.0 : 3.0));
        AreaStats s = aggregate_area(pts);
        CHECK(s.rms[0] == doctest::Approx(3.5355339059327378).epsilon(1e-7));
        CHECK(s.std[0] == doctest::Approx(0.5).epsilon(1e-7));
        CHECK(s.total_rms == doctest::Approx(3.5355339059327378).epsilon(1e-7));
    }
    SUBCASE("population identity RMS^2 = mean^2 + STD^2") {
        std::vector<MeasurementPoint> pts;
        for (double v : {0.2, 0.5, 0.9, 1.4, 0.3, 0.7})
            pts.push_back(point_with_band0(v));
        AreaStats s = aggregate_area(pts);
        const double mean = (0.2 + 0.5 + 0.9 + 1.4 + 0.3 + 0.7) / 6.0;
        CHECK(s.rms[0] * s.rms[0] ==
              doctest::Approx(mean * mean + s.std[0] * s.std[0]).epsilon(1e-5));
    }
    SUBCASE("fewer than five points is rejected") {
        std::vector<MeasurementPoint> pts(4, point_with_band0(1.0));
        CHECK_THROWS_AS(aggregate_area(pts), std::invalid_argument);
    }
}

TEST_CASE("box-plot summary statistics") {
    SUBCASE("five-point series") {
        BoxStats s = summary_stats({5, 3, 1, 2, 4});
        CHECK(s.median == doctest::Approx(3.0));
        CHECK(s.q1 == doctest::Approx(2.0));
        CHECK(s.q3 == doctest::Approx(4.0));
        CHECK(s.outliers.empty());
    }
    SUBCASE("constant series collapses, no outliers") {
        BoxStats s = summary_stats({2.5, 2.5, 2.5, 2.5});
        CHECK(s.median == 2.5);
        CHECK(s.q1 == 2.5);
        CHECK(s.q3 == 2.5);
        CHECK(s.whisker_low == 2.5);
        CHECK(s.whisker_high == 2.5);
        CHECK(s.outliers.empty());
    }
    SUBCASE("far point is flagged as an outlier") {
        BoxStats s = summary_stats({1, 1, 1, 100});
        REQUIRE(s.outliers.size() == 1);
        CHECK(s.outliers[0] == 100.0);
        CHECK(s.whisker_high < 100.0);
    }
    SUBCASE("empty series is rejected") {
        CHECK_THROWS_AS(summary_stats({}), std::invalid_argument);
    }
}

TEST_CASE("measurement and GPS CSV round trips") {
    const std::string mpath = "test_meas_rt.csv";
    const std::string gpath = "test_gps_rt.csv";

    std::vector<RawRecord> records;
    for (int i = 0; i < 3; ++i) {
        RawRecord r;
        r.timestamp_s = 100.0 + i;
        for (int f = 0; f < kNumBands; ++f)
            r.e_xyz[f] = {0.01 * (i + 1), 0.02 * (f + 1), 0.005};
        records.push_back(r);
    }
    write_measurements_csv(mpath, records);
    auto back = read_measurements_csv(mpath);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(back[i].timestamp_s == doctest::Approx(records[i].timestamp_s));
        for (int f = 0; f < kNumBands; ++f)
            for (int a = 0; a < 3; ++a)
                CHECK(back[i].e_xyz[f][a] ==
                      doctest::Approx(records[i].e_xyz[f][a]).epsilon(1e-9));
    }

    std::vector<GpsFix> track = {{100.0, 45.1, 7.2}, {101.0, 45.1001, 7.2001}};
    write_gps_csv(gpath, track);
    auto tback = read_gps_csv(gpath);
    REQUIRE(tback.size() == 2);
    CHECK(tback[1].lat == doctest::Approx(45.1001).epsilon(1e-12));
    CHECK(tback[1].lon == doctest::Approx(7.2001).epsilon(1e-12));

    std::remove(mpath.c_str());
    std::remove(gpath.c_str());
}

TEST_CASE("malformed measurement files are rejected") {
    const std::string path = "test_meas_bad.csv";
    {
        std::ofstream out(path);
        out << "timestamp_s,e700_x\n1.0,0.1\n";  // wrong column count
    }
    CHECK_THROWS_AS(read_measurements_csv(path), DataError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_measurements_csv("does_not_exist.csv"), DataError);
}

TEST_CASE("non-increasing record timestamps are rejected at read") {
    const std::string path = "test_meas_ts.csv";
    std::vector<RawRecord> records = {record_at(100.0), record_at(101.0)};
    write_measurements_csv(path, records);
    {
        std::ofstream out(path, std::ios::app);
        RawRecord dup = record_at(101.0);  // not strictly increasing
        out << dup.timestamp_s;
        for (int b = 0; b < kNumBands; ++b)
            for (int a = 0; a < 3; ++a) out << "," << dup.e_xyz[b][a];
        out << "\n";
    }
    CHECK_THROWS_AS(read_measurements_csv(path), DataError);
    std::remove(path.c_str());
}
