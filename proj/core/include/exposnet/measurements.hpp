#pragma once

#include <array>
#include <string>
#include <vector>

#include "exposnet/geo.hpp"

namespace exposnet {

/// One tri-axis spectrum record: per band (Ex, Ey, Ez) in V/m.
struct RawRecord {
    double timestamp_s = 0.0;
    std::array<std::array<double, 3>, kNumBands> e_xyz{};
};

struct GpsFix {
    double timestamp_s = 0.0;
    double lat = 0.0;
    double lon = 0.0;
};

/// Geolocated per-band isotropic E-field values.
struct MeasurementPoint {
    double timestamp_s = 0.0;
    double lat = 0.0;
    double lon = 0.0;
    std::array<double, kNumBands> e_band{};
    double e_total = 0.0;
};

/// Isotropic combination of three orthogonal axes: sqrt(Ex^2 + Ey^2 + Ez^2).
double combine_triaxis(double ex, double ey, double ez);

/// Total E-field over the seven bands: sqrt(sum E_f^2).
double total_field(const std::array<double, kNumBands>& e_band);

struct SyncResult {
    std::vector<MeasurementPoint> points;
    int dropped = 0;
};

inline constexpr double kGpsSlackS = 5.0;

/// Linear interpolation of each record's position between the two bracketing
/// GPS fixes. Records within +/-5 s outside the track span clamp to the
/// nearest fix; records further out are dropped and counted.
SyncResult sync_gps(const std::vector<RawRecord>& records,
                    const std::vector<GpsFix>& track);

inline constexpr int kMinPointsPerTile = 5;

/// Per-band and total (RMS, population STD) over the given points.
struct AreaStats {
    std::array<double, kNumBands> rms{};
    std::array<double, kNumBands> std{};
    double total_rms = 0.0;
    double total_std = 0.0;
    int n_points = 0;
};

/// Requires at least kMinPointsPerTile points; throws std::invalid_argument
/// otherwise. Totals are computed from the per-point e_total values.
AreaStats aggregate_area(const std::vector<MeasurementPoint>& points);

/// Box-plot statistics: linear-interpolation quantiles, whiskers at 1.5*IQR
/// clamped to the data range.
struct BoxStats {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double whisker_low = 0.0;
    double whisker_high = 0.0;
    std::vector<double> outliers;
};

BoxStats summary_stats(std::vector<double> series);

// measurements.csv: timestamp_s, then 21 columns e{band}_{x|y|z} in
// band-ascending order. gps.csv: timestamp_s, lat, lon.
std::vector<RawRecord> read_measurements_csv(const std::string& path);
void write_measurements_csv(const std::string& path,
                            const std::vector<RawRecord>& records);
std::vector<GpsFix> read_gps_csv(const std::string& path);
void write_gps_csv(const std::string& path, const std::vector<GpsFix>& fixes);

}  // namespace exposnet
