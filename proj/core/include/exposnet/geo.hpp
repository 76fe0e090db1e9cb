#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "exposnet/tensor.hpp"

namespace exposnet {

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr int kNumBands = 7;
inline constexpr std::array<int, kNumBands> kBandsMhz = {700,  800,  900, 1800,
                                                        2100, 2600, 3500};
inline constexpr int kTileSideM = 400;
inline constexpr int kTileGrid = 128;
inline constexpr double kTileResM = 3.125;  // 400 / 128
inline constexpr int kInputChannels = 15;

/// Index of a band in kBandsMhz, or -1 if unknown.
int band_index(int band_mhz);

struct GeoOrigin {
    double lat = 0.0;
    double lon = 0.0;
};

struct LocalXY {
    double x = 0.0;  // meters east
    double y = 0.0;  // meters north
};

/// Local equirectangular projection about `origin` (spherical Earth).
LocalXY project_to_local(double lat, double lon, const GeoOrigin& origin);

/// Inverse of project_to_local.
void local_to_geo(const LocalXY& p, const GeoOrigin& origin, double& lat,
                  double& lon);

/// One 400 m x 400 m area tile, 128 x 128 pixels at 3.125 m/px.
struct Tile {
    GeoOrigin center;

    /// Pixel-center offset from the tile center in local meters.
    /// Row 0 is the north edge.
    LocalXY pixel_center(int row, int col) const {
        return {(col + 0.5) * kTileResM - kTileSideM / 2.0,
                kTileSideM / 2.0 - (row + 0.5) * kTileResM};
    }

    bool contains_local(const LocalXY& p) const {
        const double half = kTileSideM / 2.0;
        return p.x >= -half && p.x < half && p.y > -half && p.y <= half;
    }
};

struct BuildingFootprint {
    std::string id;
    std::vector<GeoOrigin> vertices;  // lat/lon, >= 3
    std::optional<double> height_m;
    std::optional<int> floors;
};

struct BsaRecord {
    std::string site_id;
    double lat = 0.0;
    double lon = 0.0;
    double height_m = 0.0;
    double azimuth_deg = 0.0;  // [0, 360), clockwise from north
    int band_mhz = 0;
    std::optional<double> beamwidth_deg;
    std::optional<double> coverage_m;
};

inline constexpr double kDefaultCoverageM = 500.0;

/// RGB raster with a geographic anchor at its top-left corner.
struct GeoRaster {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> rgb;  // row-major, 3 bytes per pixel
    GeoOrigin origin;          // top-left corner
    double meters_per_pixel = 1.0;

    std::array<uint8_t, 3> pixel(int row, int col) const {
        const std::size_t i = (static_cast<std::size_t>(row) * width + col) * 3;
        return {rgb[i], rgb[i + 1], rgb[i + 2]};
    }
};

/// Resolve a footprint's height: stored height, else 3 m per floor, else the
/// mean height of neighbors with centroids within 100 m, else the mean over
/// all resolvable footprints, else 0.
double estimate_building_height(const BuildingFootprint& fp,
                                const std::vector<BuildingFootprint>& all);

/// 1 x 128 x 128 building height map in meters. Pixel value is the height of
/// the covering footprint (point-in-polygon at pixel centers); overlapping
/// footprints take the max, 0 where no building.
Tensor rasterize_buildings(const std::vector<BuildingFootprint>& footprints,
                           const Tile& tile);

/// 1 x 128 x 128 map; the pixel containing each site center gets the mean
/// antenna height over that site, all other pixels 0.
Tensor rasterize_bsa_heights(const std::vector<BsaRecord>& sites,
                             const Tile& tile);

/// Normalized sector gain cos^8(delta_azimuth), clamped to 0 beyond +/-90 deg.
double antenna_gain(double delta_azimuth_deg);

/// Half-power beamwidth of the native cos^8 pattern, in degrees.
double native_beamwidth_deg();

/// Superposed normalized gains of all in-band antennas; each antenna
/// contributes within its coverage radius (default 500 m). 1 x 128 x 128.
Tensor rasterize_radiation(const std::vector<BsaRecord>& antennas, int band_mhz,
                           const Tile& tile);

/// Nearest-neighbor sample of `src` at tile pixel centers, 3 x 128 x 128 with
/// values 0-255. Pixels outside the source extent get `fill`.
Tensor resample_raster(const GeoRaster& src, const Tile& tile, float fill);

/// All-constant 3 x 128 x 128 map (used for the white land-cover placeholder).
Tensor constant_raster(float value);

///// Stack the channel groups into the 15 x 128 x 128 input tensor:
/// IR(3), land cover(3), building height(1), BSA height(1),
/// radiation 700 -> 3500 ascending (7).
Tensor compose_input_tensor(const Tensor& ir, const Tensor& landcover,
                            const Tensor& building, const Tensor& bsa,
                            const std::vector<Tensor>& radiation);

}  // namespace exposnet
