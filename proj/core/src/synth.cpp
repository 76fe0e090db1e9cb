#include "exposnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "exposnet/io.hpp"

namespace exposnet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
// Fixed geographic anchor; the scene lives in a local frame around it.
constexpr double kAnchorLat = 45.0;
constexpr double kAnchorLon = 7.0;
constexpr double kRasterResM = 4.0;
}  // namespace

void ScenarioConfig::validate() const {
    if (extent_m < 1000.0)
        throw std::invalid_argument("ScenarioConfig: extent_m must be >= 1000");
    if (alpha < 2.0 || alpha > 4.0)
        throw std::invalid_argument("ScenarioConfig: alpha must be in [2, 4]");
    if (noise_floor < 0.0)
        throw std::invalid_argument("ScenarioConfig: noise_floor must be >= 0");
    if (n_buildings < 0 || n_bsas < 0 || power_scale <= 0.0 ||
        route_spacing_m <= 0.0 || route_pitch_m <= 0.0 ||
        building_min_side_m <= 0.0 ||
        building_max_side_m < building_min_side_m ||
        building_min_height_m <= 0.0 ||
        building_max_height_m < building_min_height_m ||
        bsa_min_height_m <= 0.0 || bsa_max_height_m < bsa_min_height_m)
        throw std::invalid_argument("ScenarioConfig: invalid field");
}

std::string ScenarioConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["extent_m"] = extent_m;
    j["n_buildings"] = n_buildings;
    j["building_min_side_m"] = building_min_side_m;
    j["building_max_side_m"] = building_max_side_m;
    j["building_min_height_m"] = building_min_height_m;
    j["building_max_height_m"] = building_max_height_m;
    j["n_bsas"] = n_bsas;
    j["bsa_min_height_m"] = bsa_min_height_m;
    j["bsa_max_height_m"] = bsa_max_height_m;
    j["power_scale"] = power_scale;
    j["alpha"] = alpha;
    j["noise_floor"] = noise_floor;
    j["route_spacing_m"] = route_spacing_m;
    j["route_pitch_m"] = route_pitch_m;
    return j.dump(2);
}

ScenarioConfig ScenarioConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    ScenarioConfig c;
    // Every field optional, defaulting to the built-in scenario.
    c.seed = j.value("seed", c.seed);
    c.extent_m = j.value("extent_m", c.extent_m);
    c.n_buildings = j.value("n_buildings", c.n_buildings);
    c.building_min_side_m = j.value("building_min_side_m", c.building_min_side_m);
    c.building_max_side_m = j.value("building_max_side_m", c.building_max_side_m);
    c.building_min_height_m =
        j.value("building_min_height_m", c.building_min_height_m);
    c.building_max_height_m =
        j.value("building_max_height_m", c.building_max_height_m);
    c.n_bsas = j.value("n_bsas", c.n_bsas);
    c.bsa_min_height_m = j.value("bsa_min_height_m", c.bsa_min_height_m);
    c.bsa_max_height_m = j.value("bsa_max_height_m", c.bsa_max_height_m);
    c.power_scale = j.value("power_scale", c.power_scale);
    c.alpha = j.value("alpha", c.alpha);
    c.noise_floor = j.value("noise_floor", c.noise_floor);
    c.route_spacing_m = j.value("route_spacing_m", c.route_spacing_m);
    c.route_pitch_m = j.value("route_pitch_m", c.route_pitch_m);
    c.validate();
    return c;
}

Scenario generate_scenario(const ScenarioConfig& config) {
    config.validate();
    Scenario sc;
    sc.config = config;
    sc.origin = {kAnchorLat, kAnchorLon};
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double half = config.extent_m / 2.0;

    auto to_geo = [&](double x, double y) {
        GeoOrigin g;
        local_to_geo({x, y}, sc.origin, g.lat, g.lon);
        return g;
    };

    for (int i = 0; i < config.n_buildings; ++i) {
        const double margin = config.building_max_side_m;
        const double cx = (unit(rng) * 2.0 - 1.0) * (half - margin);
        const double cy = (unit(rng) * 2.0 - 1.0) * (half - margin);
        const double sx = config.building_min_side_m +
                          unit(rng) * (config.building_max_side_m -
                                       config.building_min_side_m);
        const double sy = config.building_min_side_m +
                          unit(rng) * (config.building_max_side_m -
                                       config.building_min_side_m);
        BuildingFootprint fp;
        fp.id = "b" + std::to_string(i);
        fp.vertices = {to_geo(cx - sx / 2, cy - sy / 2),
                       to_geo(cx + sx / 2, cy - sy / 2),
                       to_geo(cx + sx / 2, cy + sy / 2),
                       to_geo(cx - sx / 2, cy + sy / 2)};
        fp.height_m = config.building_min_height_m +
                      unit(rng) * (config.building_max_height_m -
                                   config.building_min_height_m);
        sc.buildings.push_back(std::move(fp));
    }

    for (int i = 0; i < config.n_bsas; ++i) {
        BsaRecord r;
        r.site_id = "s" + std::to_string(i);
        const double cx = (unit(rng) * 2.0 - 1.0) * half * 0.9;
        const double cy = (unit(rng) * 2.0 - 1.0) * half * 0.9;
        const GeoOrigin g = to_geo(cx, cy);
        r.lat = g.lat;
        r.lon = g.lon;
        r.height_m = config.bsa_min_height_m +
                     unit(rng) * (config.bsa_max_height_m -
                                  config.bsa_min_height_m);
        r.azimuth_deg = unit(rng) * 360.0;
        r.band_mhz = kBandsMhz[i % kNumBands];
        sc.bsas.push_back(r);
    }

    // Rasters derived from the layout: buildings show as bright IR pixels and
    // as the built-up land-cover class.
    const int px = static_cast<int>(std::ceil(config.extent_m / kRasterResM));
    auto make_raster = [&](GeoRaster& ras) {
        ras.width = px;
        ras.height = px;
        ras.rgb.assign(static_cast<std::size_t>(px) * px * 3, 0);
        ras.origin = to_geo(-half, half);  // top-left corner
        ras.meters_per_pixel = kRasterResM;
    };
    make_raster(sc.infrared);
    make_raster(sc.landcover);
    // Building occupancy at raster resolution via the rectangle bounds in the
    // local frame (footprints are axis-aligned by construction).
    std::vector<float> hmap(static_cast<std::size_t>(px) * px, 0.0f);
    for (const BuildingFootprint& fp : sc.buildings) {
        double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
        for (const GeoOrigin& v : fp.vertices) {
            const LocalXY p = project_to_local(v.lat, v.lon, sc.origin);
            lo_x = std::min(lo_x, p.x);
            hi_x = std::max(hi_x, p.x);
            lo_y = std::min(lo_y, p.y);
            hi_y = std::max(hi_y, p.y);
        }
        const int c0 = std::max(0, static_cast<int>((lo_x + half) / kRasterResM));
        const int c1 = std::min(px - 1, static_cast<int>((hi_x + half) / kRasterResM));
        const int r0 = std::max(0, static_cast<int>((half - hi_y) / kRasterResM));
        const int r1 = std::min(px - 1, static_cast<int>((half - lo_y) / kRasterResM));
        for (int r = r0; r <= r1; ++r)
            for (int c = c0; c <= c1; ++c)
                hmap[static_cast<std::size_t>(r) * px + c] =
                    std::max(hmap[static_cast<std::size_t>(r) * px + c],
                             static_cast<float>(*fp.height_m));
    }
    for (int r = 0; r < px; ++r) {
        for (int c = 0; c < px; ++c) {
            const std::size_t i = (static_cast<std::size_t>(r) * px + c) * 3;
            const float hgt = hmap[static_cast<std::size_t>(r) * px + c];
            if (hgt > 0.0f) {
                const uint8_t ir = static_cast<uint8_t>(
                    std::min(255.0f, 120.0f + 3.0f * hgt));
                sc.infrared.rgb[i] = ir;
                sc.infrared.rgb[i + 1] = ir;
                sc.infrared.rgb[i + 2] = ir;
                sc.landcover.rgb[i] = 200;  // built-up
                sc.landcover.rgb[i + 1] = 50;
                sc.landcover.rgb[i + 2] = 50;
            } else {
                sc.infrared.rgb[i] = 60;
                sc.infrared.rgb[i + 1] = 60;
                sc.infrared.rgb[i + 2] = 60;
                sc.landcover.rgb[i] = 60;  // vegetation
                sc.landcover.rgb[i + 1] = 180;
                sc.landcover.rgb[i + 2] = 75;
            }
        }
    }

    // Serpentine drive covering the extent.
    const double margin = 50.0;
    bool east = true;
    for (double y = half - margin; y >= -half + margin;
         y -= config.route_pitch_m) {
        const double x0 = east ? -half + margin : half - margin;
        const double x1 = east ? half - margin : -half + margin;
        const double dir = east ? 1.0 : -1.0;
        for (double x = x0; dir * (x1 - x) >= 0.0;
             x += dir * config.route_spacing_m)
            sc.route.push_back(to_geo(x, y));
        east = !east;
    }
    return sc;
}

double oracle_field(double lat, double lon, const Scenario& scenario,
                    int band_mhz) {
    const LocalXY p = project_to_local(lat, lon, scenario.origin);
    double sum = 0.0;
    for (const BsaRecord& a : scenario.bsas) {
        if (a.band_mhz != band_mhz) continue;
        const LocalXY q = project_to_local(a.lat, a.lon, scenario.origin);
        const double dx = p.x - q.x, dy = p.y - q.y;
        const double d = std::max(std::hypot(dx, dy), 1.0);
        const double bearing = std::atan2(dx, dy) * 180.0 / M_PI;
        const double gain = antenna_gain(bearing - a.azimuth_deg);
        sum += scenario.config.power_scale * gain /
               std::pow(d, scenario.config.alpha);
    }
    const double noise = scenario.config.noise_floor;
    return std::sqrt(sum + noise * noise);
}

void synth_measurements(const Scenario& scenario,
                        std::vector<RawRecord>& records,
                        std::vector<GpsFix>& track) {
    records.clear();
    track.clear();
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    for (std::size_t i = 0; i < scenario.route.size(); ++i) {
        const GeoOrigin& g = scenario.route[i];
        const double t = static_cast<double>(i);
        track.push_back({t, g.lat, g.lon});
        RawRecord r;
        r.timestamp_s = t;
        for (int b = 0; b < kNumBands; ++b) {
            const double e = oracle_field(g.lat, g.lon, scenario, kBandsMhz[b]);
            const double axis = e * inv_sqrt3;
            r.e_xyz[b] = {axis, axis, axis};
        }
        records.push_back(r);
    }
}

void write_scenario_files(const Scenario& scenario, const std::string& dir) {
    fs::create_directories(dir);
    write_buildings_csv((fs::path(dir) / "buildings.csv").string(),
                        scenario.buildings);
    write_bsa_csv((fs::path(dir) / "bsa.csv").string(), scenario.bsas);
    save_geo_raster((fs::path(dir) / "ir.ppm").string(), scenario.infrared);
    save_geo_raster((fs::path(dir) / "landcover.ppm").string(),
                    scenario.landcover);
    std::vector<RawRecord> records;
    std::vector<GpsFix> track;
    synth_measurements(scenario, records, track);
    write_measurements_csv((fs::path(dir) / "measurements.csv").string(),
                           records);
    write_gps_csv((fs::path(dir) / "gps.csv").string(), track);
    std::ofstream cf(fs::path(dir) / "scenario.json");
    cf << scenario.config.to_json() << "\n";
}

Dataset generate_dataset(const ScenarioConfig& config, int n_test) {
    const Scenario scenario = generate_scenario(config);
    std::vector<RawRecord> records;
    std::vector<GpsFix> track;
    synth_measurements(scenario, records, track);
    const SyncResult sync = sync_gps(records, track);
    const std::vector<GeoOrigin> centers = select_area_centers(scenario.route);
    GeoSources sources;
    sources.buildings = scenario.buildings;
    sources.bsas = scenario.bsas;
    sources.infrared = scenario.infrared;
    sources.landcover = scenario.landcover;
    Dataset ds;
    ds.samples = build_samples(centers, sources, sync.points);
    if (ds.samples.empty())
        throw DataError("generate_dataset: scenario produced no samples");
    ds.n_test = std::min<int>(n_test, static_cast<int>(ds.samples.size()));
    std::vector<const AreaSample*> train, test;
    split_train_test(ds.samples, ds.n_test, train, test);
    ds.stats = fit_norm(train);
    return ds;
}

}  // namespace exposnet
