#pragma once

#include <string>
#include <vector>

#include "exposnet/dataset.hpp"
#include "exposnet/geo.hpp"
#include "exposnet/measurements.hpp"

namespace exposnet {

/// Parameters of the synthetic city and drive route.
struct ScenarioConfig {
    uint64_t seed = 0;
    double extent_m = 1400.0;  // side of the square scene
    int n_buildings = 60;
    double building_min_side_m = 10.0, building_max_side_m = 40.0;
    double building_min_height_m = 6.0, building_max_height_m = 30.0;
    int n_bsas = 14;  // sites, bands assigned round-robin over the 7 bands
    double bsa_min_height_m = 15.0, bsa_max_height_m = 45.0;
    double power_scale = 100.0;  // P_f: E = 0.1 V/m at 100 m boresight, alpha 2
    double alpha = 2.0;          // path-loss exponent, [2, 4]
    double noise_floor = 0.005;  // V/m, added in quadrature
    double route_spacing_m = 10.0;  // distance between route points
    double route_pitch_m = 160.0;   // serpentine row separation

    void validate() const;
    std::string to_json() const;
    static ScenarioConfig from_json(const std::string& text);
};

struct Scenario {
    ScenarioConfig config;
    GeoOrigin origin;  // geographic anchor of the scene center
    std::vector<BuildingFootprint> buildings;
    std::vector<BsaRecord> bsas;
    GeoRaster infrared, landcover;
    std::vector<GeoOrigin> route;
};

Scenario generate_scenario(const ScenarioConfig& config);

/// Log-distance propagation with the same cos^8 sector pattern the
/// rasterizer uses: E = sqrt(sum_antennas P * gain / max(d, 1)^alpha
/// + noise^2). Deterministic.
double oracle_field(double lat, double lon, const Scenario& scenario,
                    int band_mhz);

/// Tri-axis records along the route (1 s cadence, each axis E/sqrt(3)) and
/// the matching GPS track.
void synth_measurements(const Scenario& scenario,
                        std::vector<RawRecord>& records,
                        std::vector<GpsFix>& track);

/// Writes the scenario as the standard input files: buildings.csv, bsa.csv,
/// ir.ppm(+.wld), landcover.ppm(+.wld), measurements.csv, gps.csv.
void write_scenario_files(const Scenario& scenario, const std::string& dir);

/// Full pipeline run on a synthetic scenario: oracle measurements, GPS sync,
/// 50 m area centers, tensor/target assembly, last-n_test split, train-set
/// normalization stats. Samples are stored unnormalized.
Dataset generate_dataset(const ScenarioConfig& config, int n_test);

}  // namespace exposnet
