// Batch front end for the exposure-prediction pipeline.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "exposnet/dataset.hpp"
#include "exposnet/io.hpp"
#include "exposnet/measurements.hpp"
#include "exposnet/model.hpp"
#include "exposnet/synth.hpp"
#include "exposnet/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace exposnet;

namespace {

constexpr const char* kToolVersion = "0.1.0";

void write_manifest(const std::string& out_dir, const std::string& subcommand,
                    const json& config, const json& inputs, uint64_t seed) {
    json m;
    m["subcommand"] = subcommand;
    m["config"] = config;
    m["inputs"] = inputs;
    m["output"] = out_dir;
    m["seed"] = seed;
    m["tool_version"] = kToolVersion;
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / "manifest.json");
    f << m.dump(2) << "\n";
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

ModelConfig::Option parse_option(const std::string& s) {
    if (s == "per_frequency") return ModelConfig::Option::kPerFrequency;
    if (s == "total") return ModelConfig::Option::kTotal;
    throw CLI::ValidationError("--option must be per_frequency or total");
}

int cmd_synth_gen(const std::string& config_path, uint64_t seed,
                  bool seed_given, const std::string& out) {
    ScenarioConfig cfg;
    if (!config_path.empty())
        cfg = ScenarioConfig::from_json(slurp(config_path));
    if (seed_given) cfg.seed = seed;
    const Scenario sc = generate_scenario(cfg);
    write_scenario_files(sc, out);
    write_manifest(out, "synth-gen", json::parse(cfg.to_json()),
                   config_path.empty() ? json(nullptr) : json(config_path),
                   cfg.seed);
    return 0;
}

int cmd_build_dataset(const std::string& buildings, const std::string& bsa,
                      const std::string& ir, const std::string& landcover,
                      const std::string& measurements, const std::string& gps,
                      int n_test, const std::string& out) {
    GeoSources sources;
    sources.buildings = read_buildings_csv(buildings);
    sources.bsas = read_bsa_csv(bsa);
    if (!ir.empty()) sources.infrared = load_geo_raster(ir);
    if (!landcover.empty()) sources.landcover = load_geo_raster(landcover);
    const std::vector<RawRecord> records = read_measurements_csv(measurements);
    const std::vector<GpsFix> track = read_gps_csv(gps);
    const SyncResult sync = sync_gps(records, track);
    if (sync.dropped > 0)
        std::cerr << "dropped " << sync.dropped
                  << " records outside the GPS track\n";
    std::vector<GeoOrigin> route;
    route.reserve(track.size());
    for (const GpsFix& f : track) route.push_back({f.lat, f.lon});
    const std::vector<GeoOrigin> centers = select_area_centers(route);
    Dataset ds;
    ds.samples = build_samples(centers, sources, sync.points);
    if (ds.samples.empty()) throw DataError("no samples: no area center has enough measurement points");
    if (n_test < 0) n_test = std::max<int>(1, static_cast<int>(ds.samples.size()) / 6);
    ds.n_test = std::min<int>(n_test, static_cast<int>(ds.samples.size()) - 1);
    std::vector<const AreaSample*> train, test;
    split_train_test(ds.samples, ds.n_test, train, test);
    ds.stats = fit_norm(train);
    save_dataset(out, ds);
    json inputs;
    inputs["buildings"] = buildings;
    inputs["bsa"] = bsa;
    if (!ir.empty()) inputs["ir"] = ir;
    if (!landcover.empty()) inputs["landcover"] = landcover;
    inputs["measurements"] = measurements;
    inputs["gps"] = gps;
    json cfg;
    cfg["n_test"] = ds.n_test;
    cfg["n_samples"] = ds.samples.size();
    write_manifest(out, "build-dataset", cfg, inputs, 0);
    std::cerr << "wrote " << ds.samples.size() << " samples (" << ds.n_test
              << " test) to " << out << "\n";
    return 0;
}

int cmd_train(const std::string& data, const std::string& option_str,
              const std::string& out, int epochs, uint64_t seed, float lr,
              int batch) {
    const Dataset ds = load_dataset(data);
    std::vector<const AreaSample*> train_set, test_set;
    split_train_test(ds.samples, ds.n_test, train_set, test_set);
    std::vector<AreaSample> normed;
    normed.reserve(train_set.size());
    for (const AreaSample* s : train_set)
        normed.push_back(apply_norm(*s, ds.stats));
    std::vector<const AreaSample*> train_ptrs;
    for (const AreaSample& s : normed) train_ptrs.push_back(&s);

    ModelConfig mcfg;
    mcfg.option = parse_option(option_str);
    mcfg.seed = seed;
    TrainConfig tcfg;
    tcfg.epochs = epochs;
    tcfg.seed = seed;
    tcfg.lr = lr;
    tcfg.batch_size = batch;
    tcfg.weight_decay =
        mcfg.option == ModelConfig::Option::kPerFrequency ? 1e-4f : 1e-5f;

    ExposNet model(mcfg);
    const std::vector<double> history =
        exposnet::train(model, train_ptrs, tcfg, &std::cerr);
    fs::create_directories(out);
    save_checkpoint((fs::path(out) / "model.expm").string(), model, ds.stats);
    write_loss_history_csv((fs::path(out) / "loss_history.csv").string(),
                           history);
    json cfg;
    cfg["option"] = option_str;
    cfg["epochs"] = tcfg.epochs;
    cfg["batch"] = tcfg.batch_size;
    cfg["lr"] = tcfg.lr;
    cfg["weight_decay"] = tcfg.weight_decay;
    cfg["lambda"] = tcfg.lambda_c;
    write_manifest(out, "train", cfg, json(data), seed);
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data,
             const std::string& out) {
    NormStats stats;
    ExposNet model = load_checkpoint(model_path, stats);
    const Dataset ds = load_dataset(data);
    std::vector<const AreaSample*> train_set, test_set;
    split_train_test(ds.samples, ds.n_test, train_set, test_set);
    if (test_set.empty()) throw DataError("dataset has no test samples");
    std::vector<AreaSample> normed;
    normed.reserve(test_set.size());
    for (const AreaSample* s : test_set) normed.push_back(apply_norm(*s, stats));
    std::vector<const AreaSample*> test_ptrs;
    for (const AreaSample& s : normed) test_ptrs.push_back(&s);
    const EvalReport report = evaluate(model, test_ptrs);
    fs::create_directories(out);
    std::ofstream rf(fs::path(out) / "report.json");
    rf << report.to_json() << "\n";
    export_maps(test_ptrs, report.pred_total, report.true_total,
                (fs::path(out) / "maps").string());
    json cfg;
    cfg["model"] = model_path;
    cfg["n_test"] = test_ptrs.size();
    write_manifest(out, "eval", cfg, json(data), 0);
    std::cerr << "total-field RMSE "
              << report.table.back()[0].rmse << " V/m over "
              << report.n_samples << " samples\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& tile_str,
                const std::string& buildings, const std::string& bsa,
                const std::string& ir, const std::string& landcover) {
    const std::size_t comma = tile_str.find(',');
    if (comma == std::string::npos)
        throw CLI::ValidationError("--tile must be lat,lon");
    Tile tile;
    tile.center.lat = std::stod(tile_str.substr(0, comma));
    tile.center.lon = std::stod(tile_str.substr(comma + 1));
    GeoSources sources;
    sources.buildings = read_buildings_csv(buildings);
    sources.bsas = read_bsa_csv(bsa);
    if (!ir.empty()) sources.infrared = load_geo_raster(ir);
    if (!landcover.empty()) sources.landcover = load_geo_raster(landcover);
    NormStats stats;
    ExposNet model = load_checkpoint(model_path, stats);
    const AreaSample raw = build_inputs(tile, sources);
    const AreaSample sample = apply_norm(raw, stats);
    Tensor x({1, kInputChannels, kTileGrid, kTileGrid});
    x.data = sample.input.data;
    const Tensor pred = clamp_predictions(
        model.forward(x, {sample.bsa_heights}, Mode::kEval));
    json j;
    j["lat"] = tile.center.lat;
    j["lon"] = tile.center.lon;
    if (model.config().option == ModelConfig::Option::kPerFrequency) {
        json bands = json::array();
        double total_sq = 0.0;
        for (int b = 0; b < kNumBands; ++b) {
            json bj;
            bj["band_mhz"] = kBandsMhz[b];
            bj["rms"] = pred.data[2 * b];
            bj["std"] = pred.data[2 * b + 1];
            bands.push_back(bj);
            total_sq += static_cast<double>(pred.data[2 * b]) * pred.data[2 * b];
        }
        j["bands"] = bands;
        j["total_rms"] = std::sqrt(total_sq);
    } else {
        j["total_rms"] = pred.data[0];
        j["total_std"] = pred.data[1];
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_stats(const std::string& measurements) {
    const std::vector<RawRecord> records = read_measurements_csv(measurements);
    if (records.empty()) throw DataError("no measurement records in " + measurements);
    std::cout << "band_mhz,median,q1,q3,whisker_low,whisker_high,outliers\n";
    std::vector<double> total(records.size());
    for (int b = 0; b < kNumBands; ++b) {
        std::vector<double> series(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            series[i] = combine_triaxis(records[i].e_xyz[b][0],
                                        records[i].e_xyz[b][1],
                                        records[i].e_xyz[b][2]);
            total[i] += series[i] * series[i];
        }
        const BoxStats s = summary_stats(series);
        std::cout << kBandsMhz[b] << "," << s.median << "," << s.q1 << ","
                  << s.q3 << "," << s.whisker_low << "," << s.whisker_high
                  << "," << s.outliers.size() << "\n";
    }
    for (double& t : total) t = std::sqrt(t);
    const BoxStats s = summary_stats(total);
    std::cout << "total," << s.median << "," << s.q1 << "," << s.q3 << ","
              << s.whisker_low << "," << s.whisker_high << ","
              << s.outliers.size() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EMF exposure prediction pipeline"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    // synth-gen
    auto* sg = app.add_subcommand("synth-gen",
                                  "Generate a synthetic scenario's input files");
    std::string sg_config, sg_out;
    uint64_t sg_seed = 0;
    sg->add_option("--config", sg_config, "Scenario config JSON");
    auto* sg_seed_opt = sg->add_option("--seed", sg_seed, "Seed override");
    sg->add_option("--out", sg_out, "Output directory")->required();

    // build-dataset
    auto* bd = app.add_subcommand("build-dataset",
                                  "Assemble tensors and targets from raw inputs");
    std::string bd_buildings, bd_bsa, bd_ir, bd_lc, bd_meas, bd_gps, bd_out;
    int bd_n_test = -1;
    bd->add_option("--buildings", bd_buildings)->required();
    bd->add_option("--bsa", bd_bsa)->required();
    bd->add_option("--ir", bd_ir, "Infrared raster (.ppm with .wld)");
    bd->add_option("--landcover", bd_lc, "Land-cover raster (.ppm with .wld)");
    bd->add_option("--measurements", bd_meas)->required();
    bd->add_option("--gps", bd_gps)->required();
    bd->add_option("--n-test", bd_n_test, "Test sample count (default: 1/6)");
    bd->add_option("--out", bd_out)->required();

    // train
    auto* tr = app.add_subcommand("train", "Train a model on a dataset");
    std::string tr_data, tr_option = "total", tr_out;
    int tr_epochs = 40, tr_batch = 8;
    uint64_t tr_seed = 0;
    float tr_lr = 1e-4f;
    tr->add_option("--data", tr_data)->required();
    tr->add_option("--option", tr_option, "per_frequency or total");
    tr->add_option("--epochs", tr_epochs);
    tr->add_option("--batch", tr_batch);
    tr->add_option("--lr", tr_lr);
    tr->add_option("--seed", tr_seed);
    tr->add_option("--out", tr_out)->required();

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a model on the test split");
    std::string ev_model, ev_data, ev_out;
    ev->add_option("--model", ev_model, "Checkpoint file")->required();
    ev->add_option("--data", ev_data)->required();
    ev->add_option("--out", ev_out)->required();

    // predict
    auto* pr = app.add_subcommand("predict", "Predict one tile, JSON to stdout");
    std::string pr_model, pr_tile, pr_buildings, pr_bsa, pr_ir, pr_lc;
    pr->add_option("--model", pr_model)->required();
    pr->add_option("--tile", pr_tile, "lat,lon of the tile center")->required();
    pr->add_option("--buildings", pr_buildings)->required();
    pr->add_option("--bsa", pr_bsa)->required();
    pr->add_option("--ir", pr_ir);
    pr->add_option("--landcover", pr_lc);

    // stats
    auto* st = app.add_subcommand("stats", "Box-plot statistics per band");
    std::string st_meas;
    st->add_option("--measurements", st_meas)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (sg->parsed())
            return cmd_synth_gen(sg_config, sg_seed, sg_seed_opt->count() > 0,
                                 sg_out);
        if (bd->parsed())
            return cmd_build_dataset(bd_buildings, bd_bsa, bd_ir, bd_lc,
                                     bd_meas, bd_gps, bd_n_test, bd_out);
        if (tr->parsed())
            return cmd_train(tr_data, tr_option, tr_out, tr_epochs, tr_seed,
                             tr_lr, tr_batch);
        if (ev->parsed()) return cmd_eval(ev_model, ev_data, ev_out);
        if (pr->parsed())
            return cmd_predict(pr_model, pr_tile, pr_buildings, pr_bsa, pr_ir,
                               pr_lc);
        if (st->parsed()) return cmd_stats(st_meas);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
