// Acceptance gate: prints one pass/fail line per criterion and exits
// nonzero if any of them fail. Run via ctest ("acceptance") or directly.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "exposnet/dataset.hpp"
#include "exposnet/geo.hpp"
#include "exposnet/measurements.hpp"
#include "exposnet/model.hpp"
#include "exposnet/synth.hpp"
#include "exposnet/training.hpp"
#include "fd_check.hpp"

using namespace exposnet;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool ok,
            const std::string& detail = "") {
    std::cout << "criterion " << id << " (" << name << "): "
              << (ok ? "PASS" : "FAIL");
    if (!detail.empty()) std::cout << "  [" << detail << "]";
    std::cout << "\n" << std::flush;
    if (!ok) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

float px(const Tensor& t, int row, int col) {
    return t.data[static_cast<std::size_t>(row) * kTileGrid + col];
}

// ---------------------------------------------------------------------------
// 1. Rasterizer equivalence against an independent per-pixel brute force.

bool point_in_polygon(double x, double y, const std::vector<LocalXY>& poly) {
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        if ((poly[i].y > y) != (poly[j].y > y)) {
            const double xhit = poly[j].x + (y - poly[j].y) /
                                                (poly[i].y - poly[j].y) *
                                                (poly[i].x - poly[j].x);
            if (x < xhit) inside = !inside;
        }
    }
    return inside;
}

void criterion_1() {
    const auto t0 = Clock::now();
    std::mt19937 rng(20240817);
    std::uniform_real_distribution<double> upos(-250.0, 250.0);
    std::uniform_real_distribution<double> uside(6.0, 70.0);
    std::uniform_real_distribution<double> uh(4.0, 45.0);
    std::uniform_real_distribution<double> uaz(0.0, 360.0);
    std::uniform_int_distribution<int> unfp(1, 10);
    std::uniform_int_distribution<int> unant(1, 5);
    std::uniform_int_distribution<int> uband(0, kNumBands - 1);

    const GeoOrigin center{45.0, 7.0};
    Tile tile;
    tile.center = center;

    bool ok = true;
    std::string detail;
    for (int scene = 0; scene < 50 && ok; ++scene) {
        std::vector<BuildingFootprint> fps;
        const int nfp = unfp(rng);
        for (int i = 0; i < nfp; ++i) {
            BuildingFootprint fp;
            fp.id = "b" + std::to_string(i);
            fp.height_m = uh(rng);
            const double cx = upos(rng), cy = upos(rng);
            const double hx = uside(rng) / 2.0, hy = uside(rng) / 2.0;
            for (auto [dx, dy] :
                 {std::pair{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}}) {
                double lat = 0.0, lon = 0.0;
                local_to_geo({cx + dx, cy + dy}, center, lat, lon);
                fp.vertices.push_back({lat, lon});
            }
            fps.push_back(std::move(fp));
        }
        std::vector<BsaRecord> ants;
        const int nant = unant(rng);
        const int band = kBandsMhz[uband(rng)];
        double site_lat = 0.0, site_lon = 0.0;
        for (int i = 0; i < nant; ++i) {
            // Antennas sharing a site id share the site's coordinates.
            if (i % 2 == 0)
                local_to_geo({upos(rng), upos(rng)}, center, site_lat,
                             site_lon);
            // Mix in-band and out-of-band antennas.
            const int b = (i % 2 == 0) ? band : kBandsMhz[uband(rng)];
            ants.push_back({"s" + std::to_string(i / 2), site_lat, site_lon,
                            uh(rng), uaz(rng), b});
        }

        const Tensor bmap = rasterize_buildings(fps, tile);
        const Tensor smap = rasterize_bsa_heights(ants, tile);
        const Tensor rmap = rasterize_radiation(ants, band, tile);

        std::vector<std::vector<LocalXY>> polys;
        std::vector<double> heights;
        for (const auto& fp : fps) {
            std::vector<LocalXY> poly;
            for (const auto& v : fp.vertices)
                poly.push_back(project_to_local(v.lat, v.lon, center));
            polys.push_back(std::move(poly));
            heights.push_back(*fp.height_m);
        }
        std::vector<LocalXY> apos;
        for (const auto& a : ants)
            apos.push_back(project_to_local(a.lat, a.lon, center));

        // Brute-force site map: mean height per site, dropped into the pixel
        // containing the site center (row 0 is the north edge).
        std::vector<float> site_map(
            static_cast<std::size_t>(kTileGrid) * kTileGrid, 0.0f);
        for (std::size_t i = 0; i < ants.size(); ++i) {
            double sum = 0.0;
            int n = 0;
            for (std::size_t j = 0; j < ants.size(); ++j)
                if (ants[j].site_id == ants[i].site_id) {
                    sum += ants[j].height_m;
                    ++n;
                }
            // floor, not int-cast: a site just outside the tile gives a
            // slightly negative coordinate that must not truncate to pixel 0.
            const int col = static_cast<int>(
                std::floor((apos[i].x + kTileSideM / 2) / kTileResM));
            const int row = static_cast<int>(
                std::floor((kTileSideM / 2 - apos[i].y) / kTileResM));
            if (col >= 0 && col < kTileGrid && row >= 0 && row < kTileGrid) {
                float& px_ref =
                    site_map[static_cast<std::size_t>(row) * kTileGrid + col];
                px_ref = std::max(px_ref, static_cast<float>(sum / n));
            }
        }

        for (int row = 0; row < kTileGrid && ok; ++row)
            for (int col = 0; col < kTileGrid && ok; ++col) {
                const LocalXY p = tile.pixel_center(row, col);
                double want_h = 0.0;
                for (std::size_t i = 0; i < polys.size(); ++i)
                    if (point_in_polygon(p.x, p.y, polys[i]))
                        want_h = std::max(want_h, heights[i]);
                if (px(bmap, row, col) != static_cast<float>(want_h)) {
                    ok = false;
                    detail = "building mismatch, scene " + std::to_string(scene);
                    break;
                }
                const float want_s =
                    site_map[static_cast<std::size_t>(row) * kTileGrid + col];
                if (std::abs(px(smap, row, col) - want_s) >
                    1e-6f * std::max(1.0f, want_s)) {
                    ok = false;
                    detail = "site-height mismatch, scene " +
                             std::to_string(scene);
                    break;
                }
                double want_g = 0.0;
                for (std::size_t i = 0; i < ants.size(); ++i) {
                    if (ants[i].band_mhz != band) continue;
                    const double dx = p.x - apos[i].x;
                    const double dy = p.y - apos[i].y;
                    if (std::hypot(dx, dy) > kDefaultCoverageM) continue;
                    const double bearing = std::atan2(dx, dy) * 180.0 / M_PI;
                    want_g += antenna_gain(bearing - ants[i].azimuth_deg);
                }
                const double got = px(rmap, row, col);
                if (std::abs(got - want_g) >
                    1e-6 * std::max(1.0, std::abs(want_g))) {
                    ok = false;
                    detail = "radiation mismatch, scene " +
                             std::to_string(scene);
                    break;
                }
            }
    }
    const double dt = seconds_since(t0);
    if (ok && dt >= 30.0) {
        ok = false;
        detail = "too slow";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "50 scenes, %.1f s", dt);
    report(1, "rasterizer matches per-pixel brute force", ok,
           detail.empty() ? buf : detail);
}

// ---------------------------------------------------------------------------
// 2. Sector gain model.

void criterion_2() {
    bool ok = antenna_gain(0.0) == 1.0 && antenna_gain(90.0) == 0.0 &&
              std::abs(antenna_gain(45.0) - 0.0625) < 1e-15;
    double prev = antenna_gain(0.0);
    for (int d = 1; d <= 90 && ok; ++d) {
        const double g = antenna_gain(static_cast<double>(d));
        if (g > prev) ok = false;
        prev = g;
    }
    report(2, "antenna gain values and monotonicity", ok);
}

// ---------------------------------------------------------------------------
// 3. Formula fidelity.

void criterion_3() {
    bool ok = true;
    std::string detail;

    if (std::abs(total_field({3.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0}) - 5.0) >
        1e-12) {
        ok = false;
        detail = "total_field";
    }

    // Alternating 3/4 series: same RMS/STD as the {3,4} pair, and enough
    // points to clear the aggregation minimum.
    std::vector<MeasurementPoint> pts;
    for (int i = 0; i < 6; ++i) {
        MeasurementPoint p;
        p.timestamp_s = i;
        p.lat = 45.0;
        p.lon = 7.0;
        for (int b = 0; b < kNumBands; ++b) p.e_band[b] = (i % 2 == 0) ? 3.0 : 4.0;
        p.e_total = total_field(p.e_band);
        pts.push_back(p);
    }
    const AreaStats st = aggregate_area(pts);
    if (std::abs(st.rms[0] - 3.535534) > 1e-6 || std::abs(st.std[0] - 0.5) > 1e-6) {
        ok = false;
        detail = "aggregate_area";
    }

    // L1 hand case: truth all zero, prediction all one. D = 1 over the 14
    // entries; C = (sqrt(7) - 0)^2 = 7; with lambda = 0.1 the loss is 1.7.
    Tensor pred({1, kNumBands, 2}, 1.0f);
    Tensor truth({1, kNumBands, 2}, 0.0f);
    if (std::abs(loss_per_frequency(pred, truth, 0.1f).value - 1.7) > 1e-6) {
        ok = false;
        detail = "per-frequency loss";
    }
    report(3, "formula fidelity", ok, detail);
}

// ---------------------------------------------------------------------------
// 4. Finite-difference gradient suite.

void criterion_4() {
    const auto t0 = Clock::now();
    constexpr double kTol = 1e-3;
    constexpr int kProbes = 12;
    bool ok = true;
    std::string detail;
    auto run = [&](const char* name, Layer& layer, Tensor x, uint64_t seed) {
        const fdtest::FdReport r = fdtest::check_layer(layer, std::move(x),
                                                       kProbes, seed);
        if (r.max_rel >= kTol || r.probes < 10) {
            ok = false;
            detail = std::string(name) + " max rel " + std::to_string(r.max_rel);
        }
    };

    {
        Conv2d conv(2, 3);
        std::mt19937 rng(1);
        he_uniform_init(conv.weight, 2 * 9, rng);
        run("conv2d", conv, fdtest::random_tensor({2, 2, 6, 6}, 1), 100);
    }
    {
        BatchNorm2d bn(3);
        run("batchnorm", bn, fdtest::random_tensor({3, 3, 4, 4}, 2), 101);
    }
    {
        ReLU relu;
        run("relu", relu, fdtest::random_tensor({2, 2, 5, 5}, 3), 102);
    }
    {
        Sigmoid sig;
        run("sigmoid", sig, fdtest::random_tensor({2, 2, 5, 5}, 4), 103);
    }
    {
        MaxPool2 pool;
        run("maxpool", pool, fdtest::random_tensor({2, 2, 6, 6}, 5), 104);
    }
    {
        BilinearResize rs(5, 7);
        run("bilinear", rs, fdtest::random_tensor({2, 2, 8, 8}, 6), 105);
    }
    {
        GlobalAvgPool gap;
        run("gap", gap, fdtest::random_tensor({2, 3, 4, 4}, 7), 106);
    }
    {
        Linear fc(6, 4);
        std::mt19937 rng(8);
        he_uniform_init(fc.weight, 6, rng);
        run("linear", fc, fdtest::random_tensor({3, 6}, 8), 107);
    }
    {
        ConvBlock block(2, 4);
        std::mt19937 rng(9);
        he_uniform_init(block.conv.weight, 2 * 9, rng);
        block.bn.beta.fill(2.0f);  // keep ReLU inputs away from the kink
        run("conv block", block, fdtest::random_tensor({2, 2, 6, 6}, 9), 108);
    }

    // Both losses against finite differences of their scalar value.
    auto check_loss = [&](const char* name, auto&& loss_fn, Tensor pred,
                          const Tensor& truth, uint64_t seed) {
        const LossGrad lg = loss_fn(pred, truth);
        std::mt19937 rng(static_cast<uint32_t>(seed));
        std::uniform_int_distribution<std::size_t> pick(0, pred.numel() - 1);
        double max_rel = 0.0;
        for (int i = 0; i < 12; ++i) {
            const std::size_t j = pick(rng);
            const double fd = fdtest::central_diff(
                [&] { return loss_fn(pred, truth).value; }, &pred.data[j],
                1e-3f);
            max_rel = std::max(max_rel, fdtest::rel_err(lg.dpred[j], fd));
        }
        if (max_rel >= kTol) {
            ok = false;
            detail = std::string(name) + " max rel " + std::to_string(max_rel);
        }
    };
    check_loss(
        "per-frequency loss",
        [](const Tensor& p, const Tensor& t) {
            return loss_per_frequency(p, t, 0.1f);
        },
        fdtest::random_tensor({3, 7, 2}, 10, 0.1f, 1.5f),
        fdtest::random_tensor({3, 7, 2}, 11, 0.1f, 1.5f), 110);
    check_loss(
        "total loss",
        [](const Tensor& p, const Tensor& t) { return loss_total(p, t); },
        fdtest::random_tensor({4, 2}, 12, 0.1f, 1.5f),
        fdtest::random_tensor({4, 2}, 13, 0.1f, 1.5f), 111);

    const double dt = seconds_since(t0);
    if (dt >= 120.0) {
        ok = false;
        detail = "too slow";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "max rel < 1e-3, %.1f s", dt);
    report(4, "finite-difference gradient suite", ok,
           detail.empty() ? buf : detail);
}

// ---------------------------------------------------------------------------
// 5. Shape contract.

Tensor random_input(int n, uint32_t seed) {
    Tensor x({n, kInputChannels, kTileGrid, kTileGrid});
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (float& v : x.data) v = u(rng);
    return x;
}

void criterion_5() {
    bool ok = true;
    {
        ModelConfig cfg;
        cfg.option = ModelConfig::Option::kPerFrequency;
        ExposNet model(cfg);
        const Tensor y = model.forward(random_input(1, 1), {{0.5f}},
                                       Mode::kEval);
        ok = ok && y.shape == std::vector<int>{1, kNumBands, 2};
    }
    {
        ModelConfig cfg;
        cfg.option = ModelConfig::Option::kTotal;
        ExposNet model(cfg);
        const Tensor y = model.forward(random_input(1, 2), {{0.5f}},
                                       Mode::kEval);
        ok = ok && y.shape == std::vector<int>{1, 2};
    }
    {
        SpatialFusion fusion;
        const Tensor y = fusion.forward(
            fdtest::random_tensor({1, 128, 64, 64}, 3), Mode::kEval);
        ok = ok && y.shape == std::vector<int>{1, 1024, 4, 4};
    }
    report(5, "output and fusion shape contract", ok);
}

// ---------------------------------------------------------------------------
// 6. Empty-BSA rule.

void criterion_6() {
    ModelConfig cfg;
    BaseStationBranch branch(cfg.n_bs_max, cfg.h_bs, cfg.n_bs_out);
    const Tensor y = branch.forward({{}}, Mode::kEval);
    bool ok = y.shape == std::vector<int>{1, cfg.n_bs_out};
    for (float v : y.data) ok = ok && v == 0.0f;
    report(6, "empty base-station list maps to the zero vector", ok);
}

// ---------------------------------------------------------------------------
// 7. End-to-end synthetic learning. The per-frequency eval report is kept
// for criterion 10.

EvalReport g_pf_report;
bool g_pf_report_valid = false;

bool learning_run(ModelConfig::Option option, double budget_s,
                  std::string& detail) {
    const auto t0 = Clock::now();
    ScenarioConfig scfg;
    scfg.seed = 1;
    Dataset ds = generate_dataset(scfg, 56);
    if (static_cast<int>(ds.samples.size()) < 200) {
        detail = "only " + std::to_string(ds.samples.size()) + " samples";
        return false;
    }

    std::vector<const AreaSample*> train_raw, test_raw;
    split_train_test(ds.samples, ds.n_test, train_raw, test_raw);
    std::vector<AreaSample> train_n, test_n;
    for (const AreaSample* s : train_raw) train_n.push_back(apply_norm(*s, ds.stats));
    for (const AreaSample* s : test_raw) test_n.push_back(apply_norm(*s, ds.stats));
    std::vector<const AreaSample*> train_p, test_p;
    for (const AreaSample& s : train_n) train_p.push_back(&s);
    for (const AreaSample& s : test_n) test_p.push_back(&s);

    ModelConfig mcfg;
    mcfg.option = option;
    mcfg.seed = 0;
    TrainConfig tcfg;
    tcfg.epochs = 10;
    tcfg.batch_size = 8;
    tcfg.lr = 1e-4f;
    tcfg.weight_decay =
        option == ModelConfig::Option::kPerFrequency ? 1e-4f : 1e-5f;
    tcfg.seed = 0;

    ExposNet model(mcfg);
    const std::vector<double> hist = train(model, train_p, tcfg);
    if (hist.size() != 10 || !(hist.back() < 0.5 * hist.front())) {
        detail = "no loss halving: " + std::to_string(hist.front()) + " -> " +
                 std::to_string(hist.back());
        return false;
    }

    const EvalReport rep = evaluate(model, test_p);
    if (option == ModelConfig::Option::kPerFrequency) {
        g_pf_report = rep;
        g_pf_report_valid = true;
    }
    double mean = 0.0;
    for (const AreaSample* s : train_p) mean += s->targets[2 * kNumBands];
    mean /= static_cast<double>(train_p.size());
    const std::vector<double> constant(rep.true_total.size(), mean);
    const double model_rmse = rmse(rep.pred_total, rep.true_total);
    const double base_rmse = rmse(constant, rep.true_total);
    const double dt = seconds_since(t0);
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "loss %.4f -> %.4f, RMSE %.4f vs baseline %.4f, %.0f s",
                  hist.front(), hist.back(), model_rmse, base_rmse, dt);
    detail = buf;
    if (!(model_rmse < base_rmse)) return false;
    if (dt >= budget_s) return false;
    return true;
}

void criterion_7() {
    std::string d_total, d_pf;
    const bool ok_total = learning_run(ModelConfig::Option::kTotal, 600.0,
                                       d_total);
    const bool ok_pf = learning_run(ModelConfig::Option::kPerFrequency, 1200.0,
                                    d_pf);
    report(7, "end-to-end synthetic learning", ok_total && ok_pf,
           "total: " + d_total + " | per-frequency: " + d_pf);
}

// ---------------------------------------------------------------------------
// 8. Pipeline determinism via two identical command-line runs.

int run_cli(const std::string& args) {
    const std::string cmd = std::string(EXPOSNET_CLI_PATH) + " " + args +
                            " > /dev/null 2> /dev/null";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void criterion_8() {
    const fs::path tmp = "acceptance_determinism";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    const fs::path cfg = tmp / "scenario.json";
    std::ofstream(cfg) << "{\"seed\": 7, \"extent_m\": 1000, "
                          "\"n_buildings\": 10, \"n_bsas\": 7, "
                          "\"route_pitch_m\": 300}\n";

    bool ok = true;
    std::string detail;
    auto pipeline = [&](const std::string& tag) {
        const fs::path scn = tmp / ("scn_" + tag);
        const fs::path data = tmp / ("data_" + tag);
        const fs::path model = tmp / ("model_" + tag);
        const fs::path rep = tmp / ("report_" + tag);
        if (run_cli("synth-gen --config " + cfg.string() + " --out " +
                    scn.string()) != 0 ||
            run_cli("build-dataset --buildings " +
                    (scn / "buildings.csv").string() + " --bsa " +
                    (scn / "bsa.csv").string() + " --ir " +
                    (scn / "ir.ppm").string() + " --landcover " +
                    (scn / "landcover.ppm").string() + " --measurements " +
                    (scn / "measurements.csv").string() + " --gps " +
                    (scn / "gps.csv").string() + " --n-test 3 --out " +
                    data.string()) != 0 ||
            run_cli("train --data " + data.string() +
                    " --option total --epochs 2 --batch 4 --seed 0 --out " +
                    model.string()) != 0 ||
            run_cli("eval --model " + (model / "model.expm").string() +
                    " --data " + data.string() + " --out " + rep.string()) != 0) {
            ok = false;
            detail = "pipeline command failed";
        }
    };
    pipeline("a");
    if (ok) pipeline("b");

    if (ok) {
        std::vector<fs::path> rel = {"data/norm_stats.json", "data/split.json",
                                     "model/loss_history.csv",
                                     "report/report.json"};
        for (const auto& e :
             fs::directory_iterator(tmp / "data_a" / "samples"))
            rel.push_back(fs::path("data/samples") / e.path().filename());
        for (const auto& r : rel) {
            auto swap_tag = [&](const std::string& tag) {
                std::string s = r.string();
                const auto slash = s.find('/');
                return tmp / (s.substr(0, slash) + "_" + tag + s.substr(slash));
            };
            if (slurp(swap_tag("a")) != slurp(swap_tag("b"))) {
                ok = false;
                detail = "differs: " + r.string();
                break;
            }
        }
    }
    fs::remove_all(tmp);
    report(8, "identical seeds give byte-identical pipeline outputs", ok,
           detail);
}

// ---------------------------------------------------------------------------
// 9. Normalization range and split scheme.

void criterion_9() {
    bool ok = true;
    std::vector<AreaSample> samples;
    std::mt19937 rng(77);
    std::uniform_real_distribution<float> u(-5.0f, 25.0f);
    for (int i = 0; i < 12; ++i) {
        AreaSample s;
        s.tile.center = {45.0, 7.0};
        s.input = Tensor({kInputChannels, kTileGrid, kTileGrid});
        for (float& v : s.input.data) v = u(rng);
        s.bsa_heights = {u(rng) + 10.0f, u(rng) + 10.0f};
        for (int t = 0; t < kNumTargets; ++t) s.targets[t] = 0.1f * t;
        samples.push_back(std::move(s));
    }
    std::vector<const AreaSample*> train, test;
    split_train_test(samples, 4, train, test);
    ok = ok && train.size() == 8 && test.size() == 4;
    for (int i = 0; i < 8 && ok; ++i) ok = train[i] == &samples[i];
    for (int i = 0; i < 4 && ok; ++i) ok = test[i] == &samples[8 + i];

    const NormStats stats = fit_norm(train);
    for (const AreaSample* s : train) {
        const AreaSample n = apply_norm(*s, stats);
        for (float v : n.input.data) ok = ok && v >= 0.0f && v <= 1.0f;
        for (float h : n.bsa_heights) ok = ok && h >= 0.0f && h <= 1.0f;
    }
    report(9, "normalization in [0,1] and last-n test split", ok);
}

// ---------------------------------------------------------------------------
// 10. Report structure, checked on the per-frequency report of criterion 7.

void criterion_10() {
    if (!g_pf_report_valid) {
        report(10, "evaluation report structure", false,
               "no per-frequency report available");
        return;
    }
    const EvalReport& rep = g_pf_report;
    bool ok = static_cast<int>(rep.bins.size()) == kEvalBins;
    std::string detail;

    if (ok) {
        const double width0 = rep.bins[0].hi - rep.bins[0].lo;
        int total = 0;
        for (const EvalBin& b : rep.bins) {
            total += b.count;
            if (std::abs((b.hi - b.lo) - width0) > 1e-9 * std::max(1.0, width0))
                ok = false;
            if (b.count > 0 && (b.median < b.lo - 1e-12 || b.median > b.hi + 1e-12))
                ok = false;
        }
        if (total != rep.n_samples) {
            ok = false;
            detail = "bin counts sum to " + std::to_string(total);
        }
    }

    // RMSE/MAPE present for every (band j, statistic k) pair: 7 bands plus
    // the derived total row, RMS and STD columns each.
    if (rep.rows.size() != static_cast<std::size_t>(kNumBands) + 1 ||
        rep.table.size() != rep.rows.size()) {
        ok = false;
        detail = "table rows";
    } else {
        for (std::size_t r = 0; r < rep.table.size(); ++r)
            for (int k = 0; k < 2; ++k) {
                const MetricCell& c = rep.table[r][k];
                const bool derived_std = r + 1 == rep.table.size() && k == 1;
                if (!derived_std &&
                    (c.n <= 0 || !std::isfinite(c.rmse) ||
                     !std::isfinite(c.mape_percent)))
                    ok = false;
            }
    }
    report(10, "evaluation report structure", ok, detail);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    if (g_failures == 0) {
        std::cout << "all criteria passed\n";
        return 0;
    }
    std::cout << g_failures << " criteria failed\n";
    return 1;
}
