#include "exposnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "exposnet/io.hpp"

namespace exposnet {

namespace fs = std::filesystem;
using nlohmann::json;

void TrainConfig::validate() const {
    if (epochs <= 0 || batch_size <= 0 || lr <= 0.0f || lr_factor <= 0.0f ||
        lr_step_epochs <= 0 || weight_decay < 0.0f || lambda_c < 0.0f)
        throw std::invalid_argument("TrainConfig: non-positive field");
}

float lr_at_epoch(const TrainConfig& cfg, int epoch) {
    return cfg.lr * std::pow(cfg.lr_factor, epoch / cfg.lr_step_epochs);
}

LossGrad loss_per_frequency(const Tensor& pred, const Tensor& truth,
                            float lambda) {
    if (pred.ndim() != 3 || pred.dim(1) != kNumBands || pred.dim(2) != 2 ||
        !truth.same_shape(pred))
        throw std::invalid_argument("loss_per_frequency: expected matching N x 7 x 2");
    if (!all_finite(pred) || !all_finite(truth))
        throw std::invalid_argument("loss_per_frequency: non-finite input");
    const int n = pred.dim(0);
    if (n == 0) throw std::invalid_argument("loss_per_frequency: empty batch");
    LossGrad out;
    out.dpred = Tensor(pred.shape);
    const double inv_d = 1.0 / (static_cast<double>(n) * kNumBands * 2);
    double d_sum = 0.0, c_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        double tp = 0.0, tt = 0.0;  // squared totals from the RMS entries
        for (int b = 0; b < kNumBands; ++b) {
            for (int k = 0; k < 2; ++k) {
                const std::size_t idx =
                    (static_cast<std::size_t>(i) * kNumBands + b) * 2 + k;
                const double diff = static_cast<double>(pred.data[idx]) -
                                    truth.data[idx];
                d_sum += diff * diff;
                out.dpred.data[idx] = static_cast<float>(2.0 * diff * inv_d);
            }
            const std::size_t ri = (static_cast<std::size_t>(i) * kNumBands + b) * 2;
            tp += static_cast<double>(pred.data[ri]) * pred.data[ri];
            tt += static_cast<double>(truth.data[ri]) * truth.data[ri];
        }
        const double total_p = std::sqrt(tp);
        const double total_t = std::sqrt(tt);
        const double c_diff = total_p - total_t;
        c_sum += c_diff * c_diff;
        if (total_p > 0.0) {
            const double scale = 2.0 * lambda * c_diff / (n * total_p);
            for (int b = 0; b < kNumBands; ++b) {
                const std::size_t ri =
                    (static_cast<std::size_t>(i) * kNumBands + b) * 2;
                out.dpred.data[ri] +=
                    static_cast<float>(scale * pred.data[ri]);
            }
        }
    }
    out.value = d_sum * inv_d + lambda * c_sum / n;
    return out;
}

LossGrad loss_total(const Tensor& pred, const Tensor& truth) {
    if (pred.ndim() != 2 || pred.dim(1) != 2 || !truth.same_shape(pred))
        throw std::invalid_argument("loss_total: expected matching N x 2");
    if (!all_finite(pred) || !all_finite(truth))
        throw std::invalid_argument("loss_total: non-finite input");
    const int n = pred.dim(0);
    if (n == 0) throw std::invalid_argument("loss_total: empty batch");
    LossGrad out;
    out.dpred = Tensor(pred.shape);
    const double inv = 1.0 / (2.0 * n);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        const double diff = static_cast<double>(pred.data[i]) - truth.data[i];
        sum += diff * diff;
        out.dpred.data[i] = static_cast<float>(2.0 * diff * inv);
    }
    out.value = sum * inv;
    return out;
}

double rmse(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size() || pred.empty())
        throw std::invalid_argument("rmse: empty or mismatched series");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(pred.size()));
}

MapeResult mape(const std::vector<double>& pred,
                const std::vector<double>& truth) {
    if (pred.size() != truth.size() || pred.empty())
        throw std::invalid_argument("mape: empty or mismatched series");
    MapeResult r;
    double sum = 0.0;
    int used = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (truth[i] == 0.0) {
            ++r.excluded;
            continue;
        }
        sum += std::abs(pred[i] - truth[i]) / std::abs(truth[i]);
        ++used;
    }
    r.percent = used > 0 ? 100.0 * sum / used : 0.0;
    return r;
}

void make_batch(const std::vector<const AreaSample*>& samples,
                const std::vector<int>& indices, ModelConfig::Option option,
                Tensor& x, std::vector<std::vector<float>>& heights,
                Tensor& truth) {
    const int n = static_cast<int>(indices.size());
    x = Tensor({n, kInputChannels, kTileGrid, kTileGrid});
    heights.assign(n, {});
    const bool per_freq = option == ModelConfig::Option::kPerFrequency;
    truth = Tensor(per_freq ? std::vector<int>{n, kNumBands, 2}
                            : std::vector<int>{n, 2});
    const std::size_t plane = static_cast<std::size_t>(kInputChannels) *
                              kTileGrid * kTileGrid;
    for (int i = 0; i < n; ++i) {
        const AreaSample& s = *samples.at(static_cast<std::size_t>(indices[i]));
        std::copy_n(s.input.data.data(), plane,
                    &x.data[static_cast<std::size_t>(i) * plane]);
        heights[i] = s.bsa_heights;
        if (per_freq) {
            for (int b = 0; b < kNumBands; ++b)
                for (int k = 0; k < 2; ++k)
                    truth.data[(static_cast<std::size_t>(i) * kNumBands + b) * 2 +
                               k] = s.targets[2 * b + k];
        } else {
            truth.at2(i, 0) = s.targets[14];
            truth.at2(i, 1) = s.targets[15];
        }
    }
}

std::vector<double> train(ExposNet& model,
                          const std::vector<const AreaSample*>& train_set,
                          const TrainConfig& cfg, std::ostream* log) {
    cfg.validate();
    if (train_set.empty())
        throw std::invalid_argument("train: empty training set");
    const ModelConfig::Option option = model.config().option;
    AdamConfig acfg;
    acfg.lr = cfg.lr;
    acfg.weight_decay = cfg.weight_decay;
    Adam opt(model.params(), acfg);
    std::mt19937_64 shuffle_rng(cfg.seed);

    std::vector<int> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> history;
    Tensor x, truth;
    std::vector<std::vector<float>> heights;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        opt.set_lr(lr_at_epoch(cfg, epoch));
        double loss_sum = 0.0;
        int n_seen = 0;
        for (std::size_t start = 0; start < order.size();
             start += cfg.batch_size) {
            const std::size_t end =
                std::min(order.size(), start + cfg.batch_size);
            if (end - start < 2) continue;  // batch norm needs >= 2 samples
            const std::vector<int> batch(order.begin() + start,
                                         order.begin() + end);
            make_batch(train_set, batch, option, x, heights, truth);
            const Tensor pred = model.forward(x, heights, Mode::kTrain);
            const LossGrad lg =
                option == ModelConfig::Option::kPerFrequency
                    ? loss_per_frequency(pred, truth, cfg.lambda_c)
                    : loss_total(pred, truth);
            if (!std::isfinite(lg.value))
                throw std::runtime_error(
                    "train: non-finite loss at epoch " + std::to_string(epoch) +
                    ", aborting");
            model.zero_grad();
            model.backward(lg.dpred);
            opt.step();
            loss_sum += lg.value * static_cast<double>(batch.size());
            n_seen += static_cast<int>(batch.size());
        }
        if (n_seen == 0)
            throw std::runtime_error(
                "train: no usable batch (need at least 2 samples)");
        history.push_back(loss_sum / n_seen);
        if (log)
            *log << "epoch " << epoch << " lr " << opt.lr() << " loss "
                 << history.back() << "\n";
    }

    // Re-estimate the batch-norm running statistics with one forward sweep
    // at the final weights. The exponential averages kept during training
    // lag behind the weight updates; with short schedules the stale
    // estimates shrink eval-mode activations enough to bias predictions
    // badly. The sweep replaces them with the exact mean of the batch
    // statistics over the train set.
    std::vector<BatchNorm2d*> bns = model.batchnorms();
    for (BatchNorm2d* bn : bns) bn->begin_stats_refresh();
    for (std::size_t start = 0; start + 2 <= train_set.size();
         start += cfg.batch_size) {
        const std::size_t end =
            std::min(train_set.size(), start + cfg.batch_size);
        if (end - start < 2) break;
        std::vector<int> batch(end - start);
        std::iota(batch.begin(), batch.end(), static_cast<int>(start));
        make_batch(train_set, batch, option, x, heights, truth);
        model.forward(x, heights, Mode::kTrain);
    }
    for (BatchNorm2d* bn : bns) bn->end_stats_refresh();
    return history;
}

void write_loss_history_csv(const std::string& path,
                            const std::vector<double>& history) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write " + path);
    f.precision(12);
    f << "epoch,train_loss\n";
    for (std::size_t i = 0; i < history.size(); ++i)
        f << i << "," << history[i] << "\n";
}

std::vector<double> read_loss_history_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open " + path);
    std::vector<double> out;
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2) throw DataError("bad loss history line: " + line);
        out.push_back(std::stod(fields[1]));
    }
    return out;
}

namespace {

MetricCell metric_cell(const std::vector<double>& pred,
                       const std::vector<double>& truth) {
    MetricCell c;
    c.n = static_cast<int>(pred.size());
    c.rmse = rmse(pred, truth);
    const MapeResult m = mape(pred, truth);
    c.mape_percent = m.percent;
    c.mape_excluded = m.excluded;
    return c;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

EvalReport evaluate(ExposNet& model,
                    const std::vector<const AreaSample*>& test) {
    if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
    const ModelConfig::Option option = model.config().option;
    const bool per_freq = option == ModelConfig::Option::kPerFrequency;
    const int n = static_cast<int>(test.size());

    EvalReport rep;
    rep.option = option;
    rep.n_samples = n;

    // Per-sample eval-mode predictions (batch norm running stats, dropout off).
    std::vector<int> all(test.size());
    std::iota(all.begin(), all.end(), 0);
    Tensor x, truth;
    std::vector<std::vector<float>> heights;
    make_batch(test, all, option, x, heights, truth);
    const Tensor pred = clamp_predictions(model.forward(x, heights, Mode::kEval));

    if (per_freq) {
        for (int b = 0; b < kNumBands; ++b)
            rep.rows.push_back(std::to_string(kBandsMhz[b]));
        rep.rows.push_back("total");
        for (int b = 0; b < kNumBands; ++b) {
            std::array<MetricCell, 2> cells;
            for (int k = 0; k < 2; ++k) {
                std::vector<double> p(n), t(n);
                for (int i = 0; i < n; ++i) {
                    p[i] = pred.data[(static_cast<std::size_t>(i) * kNumBands + b) * 2 + k];
                    t[i] = test[i]->targets[2 * b + k];
                }
                cells[k] = metric_cell(p, t);
            }
            rep.table.push_back(cells);
        }
        rep.pred_total.resize(n);
        for (int i = 0; i < n; ++i) {
            double sq = 0.0;
            for (int b = 0; b < kNumBands; ++b) {
                const double v =
                    pred.data[(static_cast<std::size_t>(i) * kNumBands + b) * 2];
                sq += v * v;
            }
            rep.pred_total[i] = std::sqrt(sq);
        }
    } else {
        rep.rows.push_back("total");
        rep.pred_total.resize(n);
        for (int i = 0; i < n; ++i) rep.pred_total[i] = pred.at2(i, 0);
    }
    rep.true_total.resize(n);
    for (int i = 0; i < n; ++i) rep.true_total[i] = test[i]->targets[14];

    // Total row: per-frequency derives the total from the band RMS values and
    // has no STD prediction for it.
    {
        std::array<MetricCell, 2> cells;
        cells[0] = metric_cell(rep.pred_total, rep.true_total);
        if (per_freq) {
            cells[1] = MetricCell{};
        } else {
            std::vector<double> p(n), t(n);
            for (int i = 0; i < n; ++i) {
                p[i] = pred.at2(i, 1);
                t[i] = test[i]->targets[15];
            }
            cells[1] = metric_cell(p, t);
        }
        rep.table.push_back(cells);
    }

    // Six equal-width bins over the true total field; the top edge is
    // inclusive so the maximum lands in the last bin.
    const double lo = *std::min_element(rep.true_total.begin(), rep.true_total.end());
    const double hi = *std::max_element(rep.true_total.begin(), rep.true_total.end());
    const double width = (hi - lo) / kEvalBins;
    for (int b = 0; b < kEvalBins; ++b) {
        EvalBin bin;
        bin.lo = lo + b * width;
        bin.hi = lo + (b + 1) * width;
        std::vector<double> p, t;
        for (int i = 0; i < n; ++i) {
            const double v = rep.true_total[i];
            const bool inside = width > 0.0
                                    ? (v >= bin.lo &&
                                       (v < bin.hi || (b == kEvalBins - 1 && v <= hi)))
                                    : b == 0;
            if (!inside) continue;
            p.push_back(rep.pred_total[i]);
            t.push_back(v);
        }
        bin.count = static_cast<int>(t.size());
        if (bin.count > 0) {
            bin.median = median_of(t);
            bin.rmse = rmse(p, t);
            const MapeResult m = mape(p, t);
            bin.mape_percent = m.percent;
            bin.mape_excluded = m.excluded;
        }
        rep.bins.push_back(bin);
    }
    return rep;
}

std::string EvalReport::to_json() const {
    json j;
    j["option"] = option == ModelConfig::Option::kPerFrequency ? "per_frequency"
                                                               : "total";
    j["n_samples"] = n_samples;
    json table_j = json::array();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        json row;
        row["name"] = rows[r];
        const char* kind[2] = {"rms", "std"};
        for (int k = 0; k < 2; ++k) {
            json cell;
            cell["rmse"] = table[r][k].rmse;
            cell["mape_percent"] = table[r][k].mape_percent;
            cell["mape_excluded"] = table[r][k].mape_excluded;
            cell["n"] = table[r][k].n;
            row[kind[k]] = cell;
        }
        table_j.push_back(row);
    }
    j["table"] = table_j;
    json bins_j = json::array();
    for (const EvalBin& b : bins) {
        json bj;
        bj["lo"] = b.lo;
        bj["hi"] = b.hi;
        bj["median"] = b.median;
        bj["count"] = b.count;
        bj["rmse"] = b.rmse;
        bj["mape_percent"] = b.mape_percent;
        bj["mape_excluded"] = b.mape_excluded;
        bins_j.push_back(bj);
    }
    j["bins"] = bins_j;
    j["true_total"] = true_total;
    j["pred_total"] = pred_total;
    return j.dump(2);
}

void export_maps(const std::vector<const AreaSample*>& samples,
                 const std::vector<double>& pred_total,
                 const std::vector<double>& true_total, const std::string& dir) {
    if (samples.empty() || samples.size() != pred_total.size() ||
        samples.size() != true_total.size())
        throw std::invalid_argument("export_maps: empty or mismatched inputs");
    fs::create_directories(dir);

    // Common local frame anchored at the first tile center; each tile is a
    // uniform 400 m block at 10 m per pixel.
    const GeoOrigin anchor = samples.front()->tile.center;
    const double res = 10.0;
    const double half = kTileSideM / 2.0;
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    std::vector<LocalXY> centers(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        centers[i] = project_to_local(samples[i]->tile.center.lat,
                                      samples[i]->tile.center.lon, anchor);
        min_x = std::min(min_x, centers[i].x - half);
        max_x = std::max(max_x, centers[i].x + half);
        min_y = std::min(min_y, centers[i].y - half);
        max_y = std::max(max_y, centers[i].y + half);
    }
    const int w = std::max(1, static_cast<int>(std::ceil((max_x - min_x) / res)));
    const int h = std::max(1, static_cast<int>(std::ceil((max_y - min_y) / res)));

    std::vector<double> abs_err(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        abs_err[i] = std::abs(pred_total[i] - true_total[i]);

    struct MapSpec {
        const char* name;
        const std::vector<double>* values;
        double lo, hi;
    };
    const double value_lo = std::min(*std::min_element(true_total.begin(), true_total.end()),
                                     *std::min_element(pred_total.begin(), pred_total.end()));
    const double value_hi = std::max(*std::max_element(true_total.begin(), true_total.end()),
                                     *std::max_element(pred_total.begin(), pred_total.end()));
    const double err_hi = *std::max_element(abs_err.begin(), abs_err.end());
    const MapSpec specs[3] = {
        {"truth", &true_total, value_lo, value_hi},
        {"prediction", &pred_total, value_lo, value_hi},
        {"error", &abs_err, 0.0, err_hi},
    };
    for (const MapSpec& spec : specs) {
        std::vector<uint8_t> gray(static_cast<std::size_t>(w) * h, 0);
        const double span = spec.hi - spec.lo;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double v = (*spec.values)[i];
            const uint8_t g = span > 0.0
                                  ? static_cast<uint8_t>(std::clamp(
                                        255.0 * (v - spec.lo) / span, 0.0, 255.0))
                                  : 0;
            const int c0 = static_cast<int>((centers[i].x - half - min_x) / res);
            const int r0 = static_cast<int>((max_y - (centers[i].y + half)) / res);
            const int side = static_cast<int>(kTileSideM / res);
            for (int r = std::max(0, r0); r < std::min(h, r0 + side); ++r)
                for (int c = std::max(0, c0); c < std::min(w, c0 + side); ++c)
                    gray[static_cast<std::size_t>(r) * w + c] = g;
        }
        write_pgm((fs::path(dir) / (std::string(spec.name) + ".pgm")).string(),
                  w, h, gray);
    }

    json meta;
    meta["anchor_lat"] = anchor.lat;
    meta["anchor_lon"] = anchor.lon;
    meta["meters_per_pixel"] = res;
    meta["width"] = w;
    meta["height"] = h;
    meta["value_min"] = value_lo;
    meta["value_max"] = value_hi;
    meta["error_max"] = err_hi;
    std::ofstream mf(fs::path(dir) / "maps.json");
    mf << meta.dump(2) << "\n";

    std::ofstream cf(fs::path(dir) / "samples.csv");
    cf.precision(10);
    cf << "index,lat,lon,true_total,pred_total,abs_error\n";
    for (std::size_t i = 0; i < samples.size(); ++i)
        cf << i << "," << samples[i]->tile.center.lat << ","
           << samples[i]->tile.center.lon << "," << true_total[i] << ","
           << pred_total[i] << "," << abs_err[i] << "\n";
}

}  // namespace exposnet
