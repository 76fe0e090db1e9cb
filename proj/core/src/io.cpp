#include "exposnet/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace exposnet {

namespace {

std::ifstream open_in(const std::string& path, bool binary = false) {
    std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
    if (!f) throw DataError("cannot open " + path);
    return f;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw DataError("cannot write " + path);
    return f;
}

std::string world_path(const std::string& ppm_path) {
    const auto dot = ppm_path.find_last_of('.');
    return (dot == std::string::npos ? ppm_path : ppm_path.substr(0, dot)) +
           ".wld";
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("bad number '" + s + "' in " + where);
    }
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

void write_ppm(const std::string& path, int width, int height,
               const std::vector<uint8_t>& rgb) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
        throw std::invalid_argument("write_ppm: buffer size mismatch");
    auto f = open_out(path, true);
    f << "P6\n" << width << " " << height << "\n255\n";
    f.write(reinterpret_cast<const char*>(rgb.data()),
            static_cast<std::streamsize>(rgb.size()));
}

void read_ppm(const std::string& path, int& width, int& height,
              std::vector<uint8_t>& rgb) {
    auto f = open_in(path, true);
    std::string magic;
    int maxval = 0;
    f >> magic >> width >> height >> maxval;
    if (magic != "P6" || width <= 0 || height <= 0 || maxval != 255)
        throw DataError("not a P6/255 PPM: " + path);
    f.get();  // single whitespace after header
    rgb.resize(static_cast<std::size_t>(width) * height * 3);
    f.read(reinterpret_cast<char*>(rgb.data()),
           static_cast<std::streamsize>(rgb.size()));
    if (!f) throw DataError("truncated PPM: " + path);
}

void write_world_file(const std::string& path, const GeoOrigin& origin,
                      double meters_per_pixel) {
    auto f = open_out(path);
    f.precision(12);
    f << origin.lat << "\n" << origin.lon << "\n" << meters_per_pixel << "\n";
}

GeoRaster load_geo_raster(const std::string& path) {
    GeoRaster r;
    read_ppm(path, r.width, r.height, r.rgb);
    auto f = open_in(world_path(path));
    if (!(f >> r.origin.lat >> r.origin.lon >> r.meters_per_pixel))
        throw DataError("bad world file for " + path);
    if (r.meters_per_pixel <= 0.0)
        throw DataError("world file meters_per_pixel must be > 0: " + path);
    return r;
}

void save_geo_raster(const std::string& path, const GeoRaster& raster) {
    write_ppm(path, raster.width, raster.height, raster.rgb);
    write_world_file(world_path(path), raster.origin, raster.meters_per_pixel);
}

void write_pgm(const std::string& path, int width, int height,
               const std::vector<uint8_t>& gray) {
    if (gray.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("write_pgm: buffer size mismatch");
    auto f = open_out(path, true);
    f << "P5\n" << width << " " << height << "\n255\n";
    f.write(reinterpret_cast<const char*>(gray.data()),
            static_cast<std::streamsize>(gray.size()));
}

std::vector<BuildingFootprint> read_buildings_csv(const std::string& path) {
    auto f = open_in(path);
    std::vector<BuildingFootprint> out;
    std::string line;
    std::getline(f, line);  // header
    int lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < 2)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected id,polygon[,height_m,floors]");
        BuildingFootprint fp;
        fp.id = fields[0];
        std::stringstream poly(fields[1]);
        std::string vertex;
        while (std::getline(poly, vertex, ';')) {
            std::stringstream vs(vertex);
            double lon, lat;
            if (!(vs >> lon >> lat))
                throw DataError(path + ":" + std::to_string(lineno) + ": bad polygon vertex '" + vertex + "'");
            fp.vertices.push_back({lat, lon});
        }
        if (fp.vertices.size() < 3)
            throw DataError(path + ":" + std::to_string(lineno) + ": polygon needs >= 3 vertices");
        if (fields.size() > 2 && !fields[2].empty()) {
            fp.height_m = parse_double(fields[2], path);
            if (*fp.height_m < 0)
                throw DataError(path + ":" + std::to_string(lineno) + ": negative height");
        }
        if (fields.size() > 3 && !fields[3].empty())
            fp.floors = static_cast<int>(parse_double(fields[3], path));
        out.push_back(std::move(fp));
    }
    return out;
}

void write_buildings_csv(const std::string& path,
                         const std::vector<BuildingFootprint>& footprints) {
    auto f = open_out(path);
    f.precision(12);
    f << "id,polygon,height_m,floors\n";
    for (const BuildingFootprint& fp : footprints) {
        f << fp.id << ",";
        for (std::size_t i = 0; i < fp.vertices.size(); ++i) {
            if (i) f << ";";
            f << fp.vertices[i].lon << " " << fp.vertices[i].lat;
        }
        f << ",";
        if (fp.height_m) f << *fp.height_m;
        f << ",";
        if (fp.floors) f << *fp.floors;
        f << "\n";
    }
}

std::vector<BsaRecord> read_bsa_csv(const std::string& path) {
    auto f = open_in(path);
    std::vector<BsaRecord> out;
    std::string line;
    std::getline(f, line);  // header
    int lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < 6)
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": expected site_id,lat,lon,height_m,azimuth_deg,band_mhz[,beamwidth_deg,coverage_m]");
        BsaRecord r;
        r.site_id = fields[0];
        r.lat = parse_double(fields[1], path);
        r.lon = parse_double(fields[2], path);
        r.height_m = parse_double(fields[3], path);
        r.azimuth_deg = parse_double(fields[4], path);
        r.band_mhz = static_cast<int>(parse_double(fields[5], path));
        if (r.height_m <= 0)
            throw DataError(path + ":" + std::to_string(lineno) + ": height_m must be > 0");
        if (band_index(r.band_mhz) < 0)
            throw DataError(path + ":" + std::to_string(lineno) + ": unknown band " +
                            std::to_string(r.band_mhz));
        if (fields.size() > 6 && !fields[6].empty())
            r.beamwidth_deg = parse_double(fields[6], path);
        if (fields.size() > 7 && !fields[7].empty())
            r.coverage_m = parse_double(fields[7], path);
        out.push_back(std::move(r));
    }
    return out;
}

void write_bsa_csv(const std::string& path, const std::vector<BsaRecord>& records) {
    auto f = open_out(path);
    f.precision(12);
    f << "site_id,lat,lon,height_m,azimuth_deg,band_mhz,beamwidth_deg,coverage_m\n";
    for (const BsaRecord& r : records) {
        f << r.site_id << "," << r.lat << "," << r.lon << "," << r.height_m << ","
          << r.azimuth_deg << "," << r.band_mhz << ",";
        if (r.beamwidth_deg) f << *r.beamwidth_deg;
        f << ",";
        if (r.coverage_m) f << *r.coverage_m;
        f << "\n";
    }
}

}  // namespace exposnet
