#include "exposnet/dataset.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "exposnet/io.hpp"

namespace exposnet {

namespace fs = std::filesystem;
using nlohmann::json;

std::string NormStats::to_json() const {
    json j;
    j["channel_min"] = channel_min;
    j["channel_max"] = channel_max;
    j["bsa_min"] = bsa_min;
    j["bsa_max"] = bsa_max;
    return j.dump(2);
}

NormStats NormStats::from_json(const std::string& text) {
    NormStats s;
    json j = json::parse(text);
    const auto mins = j.at("channel_min").get<std::vector<float>>();
    const auto maxs = j.at("channel_max").get<std::vector<float>>();
    if (mins.size() != kInputChannels || maxs.size() != kInputChannels)
        throw DataError("NormStats: wrong channel count");
    std::copy(mins.begin(), mins.end(), s.channel_min.begin());
    std::copy(maxs.begin(), maxs.end(), s.channel_max.begin());
    s.bsa_min = j.at("bsa_min").get<float>();
    s.bsa_max = j.at("bsa_max").get<float>();
    for (int c = 0; c < kInputChannels; ++c)
        if (s.channel_max[c] < s.channel_min[c])
            throw DataError("NormStats: max < min for channel " + std::to_string(c));
    return s;
}

std::vector<GeoOrigin> select_area_centers(const std::vector<GeoOrigin>& route,
                                           double spacing_m) {
    std::vector<GeoOrigin> centers;
    if (route.empty()) return centers;
    centers.push_back(route.front());
    double walked = 0.0;
    for (std::size_t i = 1; i < route.size(); ++i) {
        const LocalXY d =
            project_to_local(route[i].lat, route[i].lon, route[i - 1]);
        walked += std::hypot(d.x, d.y);
        if (walked >= spacing_m) {
            centers.push_back(route[i]);
            walked = 0.0;
        }
    }
    return centers;
}

AreaSample build_inputs(const Tile& tile, const GeoSources& sources) {
    AreaSample sample;
    sample.tile = tile;
    const Tensor ir = sources.infrared
                          ? resample_raster(*sources.infrared, tile, 0.0f)
                          : constant_raster(0.0f);
    const Tensor lc = sources.landcover
                          ? resample_raster(*sources.landcover, tile, 255.0f)
                          : constant_raster(255.0f);
    const Tensor building = rasterize_buildings(sources.buildings, tile);
    const Tensor bsa = rasterize_bsa_heights(sources.bsas, tile);
    std::vector<Tensor> radiation;
    radiation.reserve(kNumBands);
    for (int b = 0; b < kNumBands; ++b)
        radiation.push_back(rasterize_radiation(sources.bsas, kBandsMhz[b], tile));
    sample.input = compose_input_tensor(ir, lc, building, bsa, radiation);
    for (float v : bsa.data)
        if (v != 0.0f) sample.bsa_heights.push_back(v);
    return sample;
}

std::vector<AreaSample> build_samples(const std::vector<GeoOrigin>& centers,
                                      const GeoSources& sources,
                                      const std::vector<MeasurementPoint>& points) {
    std::vector<AreaSample> samples;
    for (const GeoOrigin& center : centers) {
        Tile tile{center};
        std::vector<MeasurementPoint> inside;
        for (const MeasurementPoint& p : points) {
            const LocalXY q = project_to_local(p.lat, p.lon, center);
            if (tile.contains_local(q)) inside.push_back(p);
        }
        if (inside.size() < static_cast<std::size_t>(kMinPointsPerTile)) continue;
        AreaSample sample = build_inputs(tile, sources);
        const AreaStats stats = aggregate_area(inside);
        for (int b = 0; b < kNumBands; ++b) {
            sample.targets[2 * b] = static_cast<float>(stats.rms[b]);
            sample.targets[2 * b + 1] = static_cast<float>(stats.std[b]);
        }
        sample.targets[14] = static_cast<float>(stats.total_rms);
        sample.targets[15] = static_cast<float>(stats.total_std);
        samples.push_back(std::move(sample));
    }
    return samples;
}

void split_train_test(const std::vector<AreaSample>& samples, int n_test,
                      std::vector<const AreaSample*>& train,
                      std::vector<const AreaSample*>& test) {
    if (n_test < 0 || n_test > static_cast<int>(samples.size()))
        throw std::invalid_argument("split_train_test: n_test out of range");
    train.clear();
    test.clear();
    const std::size_t n_train = samples.size() - n_test;
    for (std::size_t i = 0; i < samples.size(); ++i)
        (i < n_train ? train : test).push_back(&samples[i]);
}

NormStats fit_norm(const std::vector<const AreaSample*>& train) {
    if (train.empty()) throw std::invalid_argument("fit_norm: empty training set");
    NormStats s;
    s.channel_min.fill(std::numeric_limits<float>::max());
    s.channel_max.fill(std::numeric_limits<float>::lowest());
    s.bsa_min = std::numeric_limits<float>::max();
    s.bsa_max = std::numeric_limits<float>::lowest();
    const std::size_t plane = static_cast<std::size_t>(kTileGrid) * kTileGrid;
    bool any_bsa = false;
    for (const AreaSample* sample : train) {
        for (int c = 0; c < kInputChannels; ++c) {
            const float* p = &sample->input.data[c * plane];
            for (std::size_t i = 0; i < plane; ++i) {
                s.channel_min[c] = std::min(s.channel_min[c], p[i]);
                s.channel_max[c] = std::max(s.channel_max[c], p[i]);
            }
        }
        for (float h : sample->bsa_heights) {
            s.bsa_min = std::min(s.bsa_min, h);
            s.bsa_max = std::max(s.bsa_max, h);
            any_bsa = true;
        }
    }
    if (!any_bsa) {
        s.bsa_min = 0.0f;
        s.bsa_max = 0.0f;
    }
    return s;
}

namespace {
float norm_value(float x, float lo, float hi) {
    if (hi <= lo) return 0.0f;  // degenerate channel
    const float v = (x - lo) / (hi - lo);
    return std::clamp(v, 0.0f, 1.0f);
}
}  // namespace

AreaSample apply_norm(const AreaSample& sample, const NormStats& stats) {
    AreaSample out = sample;
    const std::size_t plane = static_cast<std::size_t>(kTileGrid) * kTileGrid;
    for (int c = 0; c < kInputChannels; ++c) {
        float* p = &out.input.data[c * plane];
        for (std::size_t i = 0; i < plane; ++i)
            p[i] = norm_value(p[i], stats.channel_min[c], stats.channel_max[c]);
    }
    for (float& h : out.bsa_heights)
        h = norm_value(h, stats.bsa_min, stats.bsa_max);
    return out;
}

namespace {

constexpr char kSampleMagic[4] = {'E', 'X', 'P', 'N'};
constexpr uint16_t kSampleVersion = 1;

template <typename T>
void put(std::ostream& f, T v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& f) {
    T v;
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

}  // namespace

void write_sample(const std::string& path, const AreaSample& sample) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path);
    f.write(kSampleMagic, 4);
    put<uint16_t>(f, kSampleVersion);
    put<uint8_t>(f, 0);  // flags
    put<uint8_t>(f, kInputChannels);
    put<uint16_t>(f, kTileGrid);
    put<uint16_t>(f, kTileGrid);
    put<uint8_t>(f, kNumBands);
    put<uint16_t>(f, static_cast<uint16_t>(sample.bsa_heights.size()));
    f.write(reinterpret_cast<const char*>(sample.input.data.data()),
            static_cast<std::streamsize>(sample.input.numel() * sizeof(float)));
    f.write(reinterpret_cast<const char*>(sample.bsa_heights.data()),
            static_cast<std::streamsize>(sample.bsa_heights.size() * sizeof(float)));
    f.write(reinterpret_cast<const char*>(sample.targets.data()),
            kNumTargets * sizeof(float));
    put<double>(f, sample.tile.center.lat);
    put<double>(f, sample.tile.center.lon);
    if (!f) throw DataError("write failed: " + path);
}

AreaSample read_sample(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kSampleMagic, 4) != 0)
        throw DataError("bad magic in " + path);
    const uint16_t version = get<uint16_t>(f);
    if (version != kSampleVersion)
        throw DataError("unsupported sample version " + std::to_string(version) +
                        " in " + path);
    get<uint8_t>(f);  // flags
    const uint8_t c = get<uint8_t>(f);
    const uint16_t h = get<uint16_t>(f);
    const uint16_t w = get<uint16_t>(f);
    const uint8_t n_bands = get<uint8_t>(f);
    const uint16_t n_bsa = get<uint16_t>(f);
    if (c != kInputChannels || h != kTileGrid || w != kTileGrid ||
        n_bands != kNumBands)
        throw DataError("unexpected geometry in " + path);
    AreaSample sample;
    sample.input = Tensor({kInputChannels, kTileGrid, kTileGrid});
    f.read(reinterpret_cast<char*>(sample.input.data.data()),
           static_cast<std::streamsize>(sample.input.numel() * sizeof(float)));
    sample.bsa_heights.resize(n_bsa);
    f.read(reinterpret_cast<char*>(sample.bsa_heights.data()),
           static_cast<std::streamsize>(n_bsa * sizeof(float)));
    f.read(reinterpret_cast<char*>(sample.targets.data()),
           kNumTargets * sizeof(float));
    sample.tile.center.lat = get<double>(f);
    sample.tile.center.lon = get<double>(f);
    if (!f) throw DataError("truncated sample file " + path);
    return sample;
}

void save_dataset(const std::string& dir, const Dataset& ds) {
    fs::create_directories(fs::path(dir) / "samples");
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        std::ostringstream name;
        name << std::setw(4) << std::setfill('0') << i << ".expn";
        write_sample((fs::path(dir) / "samples" / name.str()).string(),
                     ds.samples[i]);
    }
    std::ofstream stats(fs::path(dir) / "norm_stats.json");
    stats << ds.stats.to_json() << "\n";
    json split;
    split["n_total"] = ds.samples.size();
    split["n_test"] = ds.n_test;
    std::ofstream sf(fs::path(dir) / "split.json");
    sf << split.dump(2) << "\n";
}

Dataset load_dataset(const std::string& dir) {
    Dataset ds;
    std::ifstream sf(fs::path(dir) / "split.json");
    if (!sf) throw DataError("missing split.json in " + dir);
    json split = json::parse(sf);
    const std::size_t n_total = split.at("n_total").get<std::size_t>();
    ds.n_test = split.at("n_test").get<int>();
    for (std::size_t i = 0; i < n_total; ++i) {
        std::ostringstream name;
        name << std::setw(4) << std::setfill('0') << i << ".expn";
        ds.samples.push_back(
            read_sample((fs::path(dir) / "samples" / name.str()).string()));
    }
    std::ifstream stats(fs::path(dir) / "norm_stats.json");
    if (!stats) throw DataError("missing norm_stats.json in " + dir);
    std::stringstream buf;
    buf << stats.rdbuf();
    ds.stats = NormStats::from_json(buf.str());
    return ds;
}

}  // namespace exposnet
