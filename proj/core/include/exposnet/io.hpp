#pragma once

#include <string>
#include <vector>

#include "exposnet/geo.hpp"

namespace exposnet {

/// Error for malformed or unreadable input files.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Binary PPM (P6) with a sidecar text world file holding
// origin_lat, origin_lon, meters_per_pixel on three lines.
void write_ppm(const std::string& path, int width, int height,
               const std::vector<uint8_t>& rgb);
void read_ppm(const std::string& path, int& width, int& height,
              std::vector<uint8_t>& rgb);
void write_world_file(const std::string& path, const GeoOrigin& origin,
                      double meters_per_pixel);

/// Loads `path` (.ppm) plus its world file (`path` with extension .wld).
GeoRaster load_geo_raster(const std::string& path);
void save_geo_raster(const std::string& path, const GeoRaster& raster);

/// Grayscale binary PGM (P5).
void write_pgm(const std::string& path, int width, int height,
               const std::vector<uint8_t>& gray);

// buildings.csv: id, polygon ("lon lat;lon lat;..."), height_m?, floors?
std::vector<BuildingFootprint> read_buildings_csv(const std::string& path);
void write_buildings_csv(const std::string& path,
                         const std::vector<BuildingFootprint>& footprints);

// bsa.csv: site_id, lat, lon, height_m, azimuth_deg, band_mhz,
//          beamwidth_deg?, coverage_m?
std::vector<BsaRecord> read_bsa_csv(const std::string& path);
void write_bsa_csv(const std::string& path, const std::vector<BsaRecord>& records);

/// Splits one CSV line on commas (no quoting; none of the formats need it).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace exposnet
