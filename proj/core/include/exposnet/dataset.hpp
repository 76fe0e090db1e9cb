#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "exposnet/geo.hpp"
#include "exposnet/measurements.hpp"
#include "exposnet/tensor.hpp"

namespace exposnet {

inline constexpr int kNumTargets = 16;  // 7 x (RMS, STD) + total (RMS, STD)

/// One training/evaluation sample: tile, 15-channel input tensor, the
/// nonzero BSA heights feeding the base-station branch, and the 16 target
/// scalars (per-band RMS/STD band-ascending, then total RMS, total STD).
struct AreaSample {
    Tile tile;
    Tensor input;  // 15 x 128 x 128
    std::vector<float> bsa_heights;
    std::array<float, kNumTargets> targets{};
};

/// Per-channel min/max fitted on the training set, plus BSA-height min/max.
struct NormStats {
    std::array<float, kInputChannels> channel_min{};
    std::array<float, kInputChannels> channel_max{};
    float bsa_min = 0.0f;
    float bsa_max = 0.0f;

    std::string to_json() const;
    static NormStats from_json(const std::string& json);
};

/// Greedy walk along the route: the first point is a center, and a new center
/// is emitted at the first point whose along-route distance from the previous
/// center reaches 50 m.
std::vector<GeoOrigin> select_area_centers(const std::vector<GeoOrigin>& route,
                                           double spacing_m = 50.0);

/// Geospatial inputs for sample construction. Missing land cover produces the
/// all-white placeholder; missing infrared produces an all-zero map.
struct GeoSources {
    std::vector<BuildingFootprint> buildings;
    std::vector<BsaRecord> bsas;
    std::optional<GeoRaster> infrared;
    std::optional<GeoRaster> landcover;
};

/// Input tensor plus BSA heights for one tile (no targets).
AreaSample build_inputs(const Tile& tile, const GeoSources& sources);

/// One sample per center that has at least kMinPointsPerTile measurement
/// points inside its tile square; centers below the threshold are skipped.
std::vector<AreaSample> build_samples(const std::vector<GeoOrigin>& centers,
                                      const GeoSources& sources,
                                      const std::vector<MeasurementPoint>& points);

/// Last n_test samples in route order form the test set; no shuffling.
/// Throws std::invalid_argument if n_test > samples.size().
void split_train_test(const std::vector<AreaSample>& samples, int n_test,
                      std::vector<const AreaSample*>& train,
                      std::vector<const AreaSample*>& test);

NormStats fit_norm(const std::vector<const AreaSample*>& train);

/// x' = (x - min) / (max - min) per channel, clipped to [0, 1]; a degenerate
/// channel (max == min) maps to 0. BSA heights use the BSA stats. Targets are
/// not normalized.
AreaSample apply_norm(const AreaSample& sample, const NormStats& stats);

// Binary sample file, exact round trip:
// magic "EXPN", u16 version=1, u8 flags, u8 C=15, u16 H=128, u16 W=128,
// u8 n_bands=7, u16 n_bsa, tensor data (C*H*W little-endian f32),
// BSA heights (n_bsa f32), targets (16 f32), center lat/lon (2 f64).
void write_sample(const std::string& path, const AreaSample& sample);
AreaSample read_sample(const std::string& path);

/// Samples plus the split marker and normalization stats, as stored in a
/// dataset directory (samples/NNNN.expn, norm_stats.json, split.json).
struct Dataset {
    std::vector<AreaSample> samples;
    NormStats stats;
    int n_test = 0;
};

void save_dataset(const std::string& dir, const Dataset& ds);
Dataset load_dataset(const std::string& dir);

}  // namespace exposnet
