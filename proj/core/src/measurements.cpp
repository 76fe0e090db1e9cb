#include "exposnet/measurements.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "exposnet/io.hpp"

namespace exposnet {

double combine_triaxis(double ex, double ey, double ez) {
    if (ex < 0.0 || ey < 0.0 || ez < 0.0)
        throw std::invalid_argument("combine_triaxis: field values must be >= 0");
    return std::sqrt(ex * ex + ey * ey + ez * ez);
}

double total_field(const std::array<double, kNumBands>& e_band) {
    double s = 0.0;
    for (double e : e_band) s += e * e;
    return std::sqrt(s);
}

SyncResult sync_gps(const std::vector<RawRecord>& records,
                    const std::vector<GpsFix>& track) {
    if (track.empty())
        throw std::invalid_argument("sync_gps: empty GPS track");
    for (std::size_t i = 1; i < track.size(); ++i)
        if (track[i].timestamp_s <= track[i - 1].timestamp_s)
            throw std::invalid_argument("sync_gps: GPS timestamps must be strictly increasing");

    SyncResult result;
    for (const RawRecord& rec : records) {
        const double t = rec.timestamp_s;
        if (t < track.front().timestamp_s - kGpsSlackS ||
            t > track.back().timestamp_s + kGpsSlackS) {
            ++result.dropped;
            continue;
        }
        MeasurementPoint pt;
        pt.timestamp_s = t;
        if (t <= track.front().timestamp_s) {
            pt.lat = track.front().lat;
            pt.lon = track.front().lon;
        } else if (t >= track.back().timestamp_s) {
            pt.lat = track.back().lat;
            pt.lon = track.back().lon;
        } else {
            auto it = std::upper_bound(track.begin(), track.end(), t,
                                       [](double v, const GpsFix& f) {
                                           return v < f.timestamp_s;
                                       });
            const GpsFix& b = *it;
            const GpsFix& a = *(it - 1);
            const double w = (t - a.timestamp_s) / (b.timestamp_s - a.timestamp_s);
            pt.lat = a.lat + w * (b.lat - a.lat);
            pt.lon = a.lon + w * (b.lon - a.lon);
        }
        for (int f = 0; f < kNumBands; ++f)
            pt.e_band[f] = combine_triaxis(rec.e_xyz[f][0], rec.e_xyz[f][1],
                                           rec.e_xyz[f][2]);
        pt.e_total = total_field(pt.e_band);
        result.points.push_back(pt);
    }
    return result;
}

namespace {
// RMS and population STD of one series.
void rms_std(const std::vector<double>& v, double& rms, double& stdev) {
    double sum = 0.0, sq = 0.0;
    for (double x : v) {
        sum += x;
        sq += x * x;
    }
    const double n = static_cast<double>(v.size());
    const double mean = sum / n;
    rms = std::sqrt(sq / n);
    stdev = std::sqrt(std::max(sq / n - mean * mean, 0.0));
}
}  // namespace

AreaStats aggregate_area(const std::vector<MeasurementPoint>& points) {
    if (points.size() < static_cast<std::size_t>(kMinPointsPerTile))
        throw std::invalid_argument("aggregate_area: needs at least " +
                                    std::to_string(kMinPointsPerTile) + " points, got " +
                                    std::to_string(points.size()));
    AreaStats stats;
    stats.n_points = static_cast<int>(points.size());
    std::vector<double> series(points.size());
    for (int f = 0; f < kNumBands; ++f) {
        for (std::size_t i = 0; i < points.size(); ++i)
            series[i] = points[i].e_band[f];
        rms_std(series, stats.rms[f], stats.std[f]);
    }
    for (std::size_t i = 0; i < points.size(); ++i) series[i] = points[i].e_total;
    rms_std(series, stats.total_rms, stats.total_std);
    return stats;
}

namespace {
// Linear-interpolation quantile on sorted data.
double quantile(const std::vector<double>& sorted, double q) {
    const double idx = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double w = idx - static_cast<double>(lo);
    return sorted[lo] + w * (sorted[hi] - sorted[lo]);
}
}  // namespace

BoxStats summary_stats(std::vector<double> series) {
    if (series.empty())
        throw std::invalid_argument("summary_stats: empty series");
    std::sort(series.begin(), series.end());
    BoxStats s;
    s.median = quantile(series, 0.5);
    s.q1 = quantile(series, 0.25);
    s.q3 = quantile(series, 0.75);
    const double iqr = s.q3 - s.q1;
    const double lo_bound = s.q1 - 1.5 * iqr;
    const double hi_bound = s.q3 + 1.5 * iqr;
    // Whiskers reach the extreme data points still within the 1.5*IQR fences.
    s.whisker_low = s.q1;
    s.whisker_high = s.q3;
    for (double x : series) {
        if (x < lo_bound || x > hi_bound) {
            s.outliers.push_back(x);
        } else {
            s.whisker_low = std::min(s.whisker_low, x);
            s.whisker_high = std::max(s.whisker_high, x);
        }
    }
    return s;
}

std::vector<RawRecord> read_measurements_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open " + path);
    std::vector<RawRecord> out;
    std::string line;
    std::getline(f, line);  // header
    int lineno = 1;
    double prev_t = -1e300;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 1 + 3 * kNumBands)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(1 + 3 * kNumBands) + " columns, got " +
                            std::to_string(fields.size()));
        RawRecord r;
        try {
            r.timestamp_s = std::stod(fields[0]);
            for (int b = 0; b < kNumBands; ++b)
                for (int a = 0; a < 3; ++a)
                    r.e_xyz[b][a] = std::stod(fields[1 + 3 * b + a]);
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(lineno) + ": bad number");
        }
        for (int b = 0; b < kNumBands; ++b)
            for (int a = 0; a < 3; ++a)
                if (r.e_xyz[b][a] < 0.0)
                    throw DataError(path + ":" + std::to_string(lineno) +
                                    ": negative field value");
        if (r.timestamp_s <= prev_t)
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": timestamps must be strictly increasing");
        prev_t = r.timestamp_s;
        out.push_back(r);
    }
    return out;
}

void write_measurements_csv(const std::string& path,
                            const std::vector<RawRecord>& records) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write " + path);
    f.precision(9);
    f << "timestamp_s";
    for (int b = 0; b < kNumBands; ++b)
        f << ",e" << kBandsMhz[b] << "_x,e" << kBandsMhz[b] << "_y,e"
          << kBandsMhz[b] << "_z";
    f << "\n";
    for (const RawRecord& r : records) {
        f << r.timestamp_s;
        for (int b = 0; b < kNumBands; ++b)
            for (int a = 0; a < 3; ++a) f << "," << r.e_xyz[b][a];
        f << "\n";
    }
}

std::vector<GpsFix> read_gps_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open " + path);
    std::vector<GpsFix> out;
    std::string line;
    std::getline(f, line);  // header
    int lineno = 1;
    double prev_t = -1e300;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected timestamp_s,lat,lon");
        GpsFix fix;
        try {
            fix.timestamp_s = std::stod(fields[0]);
            fix.lat = std::stod(fields[1]);
            fix.lon = std::stod(fields[2]);
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(lineno) + ": bad number");
        }
        if (fix.timestamp_s <= prev_t)
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": timestamps must be strictly increasing");
        prev_t = fix.timestamp_s;
        out.push_back(fix);
    }
    return out;
}

void write_gps_csv(const std::string& path, const std::vector<GpsFix>& fixes) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write " + path);
    f.precision(12);
    f << "timestamp_s,lat,lon\n";
    for (const GpsFix& fix : fixes)
        f << fix.timestamp_s << "," << fix.lat << "," << fix.lon << "\n";
}

}  // namespace exposnet
