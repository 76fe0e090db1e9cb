#include "exposnet/geo.hpp"

#include <cmath>
#include <stdexcept>

namespace exposnet {

namespace {
constexpr double kDegToRad = M_PI / 180.0;

struct XYPolygon {
    std::vector<LocalXY> pts;
    double min_x, max_x, min_y, max_y;
};

// Even-odd rule point-in-polygon test.
bool point_in_polygon(const XYPolygon& poly, double x, double y) {
    if (x < poly.min_x || x > poly.max_x || y < poly.min_y || y > poly.max_y)
        return false;
    bool inside = false;
    const std::size_t n = poly.pts.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const LocalXY& a = poly.pts[i];
        const LocalXY& b = poly.pts[j];
        if ((a.y > y) != (b.y > y)) {
            const double xi = a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (x < xi) inside = !inside;
        }
    }
    return inside;
}
}  // namespace

int band_index(int band_mhz) {
    for (int i = 0; i < kNumBands; ++i)
        if (kBandsMhz[i] == band_mhz) return i;
    return -1;
}

LocalXY project_to_local(double lat, double lon, const GeoOrigin& origin) {
    return {kEarthRadiusM * std::cos(origin.lat * kDegToRad) *
                (lon - origin.lon) * kDegToRad,
            kEarthRadiusM * (lat - origin.lat) * kDegToRad};
}

void local_to_geo(const LocalXY& p, const GeoOrigin& origin, double& lat,
                  double& lon) {
    lat = origin.lat + p.y / kEarthRadiusM / kDegToRad;
    lon = origin.lon +
          p.x / (kEarthRadiusM * std::cos(origin.lat * kDegToRad)) / kDegToRad;
}

double estimate_building_height(const BuildingFootprint& fp,
                                const std::vector<BuildingFootprint>& all) {
    if (fp.height_m) return *fp.height_m;
    if (fp.floors) return 3.0 * *fp.floors;

    auto centroid = [](const BuildingFootprint& f) {
        GeoOrigin c{0.0, 0.0};
        for (const GeoOrigin& v : f.vertices) {
            c.lat += v.lat;
            c.lon += v.lon;
        }
        c.lat /= f.vertices.size();
        c.lon /= f.vertices.size();
        return c;
    };
    auto known_height = [](const BuildingFootprint& f) -> std::optional<double> {
        if (f.height_m) return *f.height_m;
        if (f.floors) return 3.0 * *f.floors;
        return std::nullopt;
    };

    const GeoOrigin self = centroid(fp);
    double near_sum = 0.0, all_sum = 0.0;
    int near_n = 0, all_n = 0;
    for (const BuildingFootprint& other : all) {
        if (&other == &fp) continue;
        const auto h = known_height(other);
        if (!h) continue;
        all_sum += *h;
        ++all_n;
        const LocalXY d = project_to_local(centroid(other).lat,
                                           centroid(other).lon, self);
        if (std::hypot(d.x, d.y) <= 100.0) {
            near_sum += *h;
            ++near_n;
        }
    }
    if (near_n > 0) return near_sum / near_n;
    if (all_n > 0) return all_sum / all_n;
    return 0.0;
}

Tensor rasterize_buildings(const std::vector<BuildingFootprint>& footprints,
                           const Tile& tile) {
    Tensor map({1, kTileGrid, kTileGrid});
    std::vector<XYPolygon> polys;
    std::vector<double> heights;
    polys.reserve(footprints.size());
    for (const BuildingFootprint& fp : footprints) {
        if (fp.vertices.size() < 3)
            throw std::invalid_argument("rasterize_buildings: footprint needs >= 3 vertices");
        XYPolygon poly;
        poly.min_x = poly.min_y = 1e18;
        poly.max_x = poly.max_y = -1e18;
        for (const GeoOrigin& v : fp.vertices) {
            const LocalXY p = project_to_local(v.lat, v.lon, tile.center);
            poly.min_x = std::min(poly.min_x, p.x);
            poly.max_x = std::max(poly.max_x, p.x);
            poly.min_y = std::min(poly.min_y, p.y);
            poly.max_y = std::max(poly.max_y, p.y);
            poly.pts.push_back(p);
        }
        polys.push_back(std::move(poly));
        heights.push_back(estimate_building_height(fp, footprints));
    }
    for (int r = 0; r < kTileGrid; ++r) {
        for (int c = 0; c < kTileGrid; ++c) {
            const LocalXY p = tile.pixel_center(r, c);
            float h = 0.0f;
            for (std::size_t i = 0; i < polys.size(); ++i) {
                if (point_in_polygon(polys[i], p.x, p.y))
                    h = std::max(h, static_cast<float>(heights[i]));
            }
            map.data[static_cast<std::size_t>(r) * kTileGrid + c] = h;
        }
    }
    return map;
}

Tensor rasterize_bsa_heights(const std::vector<BsaRecord>& sites,
                             const Tile& tile) {
    Tensor map({1, kTileGrid, kTileGrid});
    // Mean antenna height per site
    std::vector<std::string> ids;
    std::vector<double> sum, cnt, lat, lon;
    for (const BsaRecord& s : sites) {
        std::size_t k = 0;
        for (; k < ids.size(); ++k)
            if (ids[k] == s.site_id) break;
        if (k == ids.size()) {
            ids.push_back(s.site_id);
            sum.push_back(0.0);
            cnt.push_back(0.0);
            lat.push_back(s.lat);
            lon.push_back(s.lon);
        }
        sum[k] += s.height_m;
        cnt[k] += 1.0;
    }
    const double half = kTileSideM / 2.0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const LocalXY p = project_to_local(lat[k], lon[k], tile.center);
        const int col = static_cast<int>(std::floor((p.x + half) / kTileResM));
        const int row = static_cast<int>(std::floor((half - p.y) / kTileResM));
        if (col < 0 || col >= kTileGrid || row < 0 || row >= kTileGrid) continue;
        const float h = static_cast<float>(sum[k] / cnt[k]);
        float& px = map.data[static_cast<std::size_t>(row) * kTileGrid + col];
        px = std::max(px, h);  // co-located sites: ties take the max
    }
    return map;
}

double antenna_gain(double delta_azimuth_deg) {
    double d = std::fmod(delta_azimuth_deg, 360.0);
    if (d > 180.0) d -= 360.0;
    if (d < -180.0) d += 360.0;
    if (std::fabs(d) >= 90.0) return 0.0;  // rear hemisphere suppressed
    const double c = std::cos(d * kDegToRad);
    const double c2 = c * c;
    return c2 * c2 * c2 * c2;
}

double native_beamwidth_deg() {
    // cos^8(theta) = 0.5 at theta = acos(2^(-1/8))
    return 2.0 * std::acos(std::pow(0.5, 0.125)) / kDegToRad;
}

Tensor rasterize_radiation(const std::vector<BsaRecord>& antennas, int band_mhz,
                           const Tile& tile) {
    Tensor map({1, kTileGrid, kTileGrid});
    const double native_bw = native_beamwidth_deg();
    for (const BsaRecord& a : antennas) {
        if (a.band_mhz != band_mhz) continue;
        const LocalXY ap = project_to_local(a.lat, a.lon, tile.center);
        const double coverage = a.coverage_m.value_or(kDefaultCoverageM);
        const double bw_scale =
            a.beamwidth_deg ? native_bw / *a.beamwidth_deg : 1.0;
        for (int r = 0; r < kTileGrid; ++r) {
            for (int c = 0; c < kTileGrid; ++c) {
                const LocalXY p = tile.pixel_center(r, c);
                const double dx = p.x - ap.x, dy = p.y - ap.y;
                const double dist = std::hypot(dx, dy);
                if (dist > coverage) continue;
                // Bearing of the pixel as seen from the antenna, clockwise
                // from north; boresight is the record azimuth.
                const double bearing = std::atan2(dx, dy) / kDegToRad;
                map.data[static_cast<std::size_t>(r) * kTileGrid + c] +=
                    static_cast<float>(
                        antenna_gain((bearing - a.azimuth_deg) * bw_scale));
            }
        }
    }
    return map;
}

Tensor resample_raster(const GeoRaster& src, const Tile& tile, float fill) {
    if (src.meters_per_pixel <= 0.0)
        throw std::invalid_argument("resample_raster: meters_per_pixel must be > 0");
    Tensor out({3, kTileGrid, kTileGrid}, fill);
    const std::size_t plane = static_cast<std::size_t>(kTileGrid) * kTileGrid;
    for (int r = 0; r < kTileGrid; ++r) {
        for (int c = 0; c < kTileGrid; ++c) {
            const LocalXY p = tile.pixel_center(r, c);
            double lat, lon;
            local_to_geo(p, tile.center, lat, lon);
            const LocalXY q = project_to_local(lat, lon, src.origin);
            const int col = static_cast<int>(std::floor(q.x / src.meters_per_pixel));
            const int row = static_cast<int>(std::floor(-q.y / src.meters_per_pixel));
            if (col < 0 || col >= src.width || row < 0 || row >= src.height)
                continue;
            const auto px = src.pixel(row, col);
            const std::size_t i = static_cast<std::size_t>(r) * kTileGrid + c;
            out.data[i] = px[0];
            out.data[plane + i] = px[1];
            out.data[2 * plane + i] = px[2];
        }
    }
    return out;
}

Tensor constant_raster(float value) {
    return Tensor({3, kTileGrid, kTileGrid}, value);
}

Tensor compose_input_tensor(const Tensor& ir, const Tensor& landcover,
                            const Tensor& building, const Tensor& bsa,
                            const std::vector<Tensor>& radiation) {
    auto check = [](const Tensor& t, int c, const char* name) {
        if (t.ndim() != 3 || t.dim(0) != c || t.dim(1) != kTileGrid ||
            t.dim(2) != kTileGrid)
            throw std::invalid_argument(std::string("compose_input_tensor: bad shape for ") +
                                        name + ": " + t.shape_str());
    };
    check(ir, 3, "ir");
    check(landcover, 3, "landcover");
    check(building, 1, "building");
    check(bsa, 1, "bsa");
    if (radiation.size() != kNumBands)
        throw std::invalid_argument("compose_input_tensor: expected 7 radiation maps");
    for (const Tensor& r : radiation) check(r, 1, "radiation");

    Tensor out({kInputChannels, kTileGrid, kTileGrid});
    float* dst = out.data.data();
    auto append = [&dst](const Tensor& t) {
        std::copy(t.data.begin(), t.data.end(), dst);
        dst += t.numel();
    };
    append(ir);
    append(landcover);
    append(building);
    append(bsa);
    for (const Tensor& r : radiation) append(r);
    return out;
}

}  // namespace exposnet
