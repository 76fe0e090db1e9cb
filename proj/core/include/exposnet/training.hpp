#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "exposnet/dataset.hpp"
#include "exposnet/model.hpp"

namespace exposnet {

struct TrainConfig {
    int epochs = 40;
    int batch_size = 8;
    float lr = 1e-4f;
    float lr_factor = 0.5f;
    int lr_step_epochs = 5;
    float weight_decay = 1e-4f;  // use 1e-5 for the total option
    float lambda_c = 0.1f;
    uint64_t seed = 0;

    void validate() const;
};

/// lr * lr_factor^floor(epoch / lr_step_epochs)
float lr_at_epoch(const TrainConfig& cfg, int epoch);

struct LossGrad {
    double value = 0.0;
    Tensor dpred;
};

/// L1 = D + lambda * C. D is the MSE over all N x 7 x 2 entries; C is the
/// mean over samples of the squared difference between the total fields
/// obtained from the predicted and true per-band RMS values via
/// sqrt(sum of squares). The constraint ignores the STD entries.
LossGrad loss_per_frequency(const Tensor& pred, const Tensor& truth,
                            float lambda);

/// L2: MSE over all N x 2 entries.
LossGrad loss_total(const Tensor& pred, const Tensor& truth);

double rmse(const std::vector<double>& pred, const std::vector<double>& truth);

struct MapeResult {
    double percent = 0.0;
    int excluded = 0;  // zero-truth samples left out of the mean
};
MapeResult mape(const std::vector<double>& pred,
                const std::vector<double>& truth);

/// Stack normalized samples into the model inputs. Targets are selected per
/// option: per-frequency uses the 14 per-band entries, total the last two.
void make_batch(const std::vector<const AreaSample*>& samples,
                const std::vector<int>& indices, ModelConfig::Option option,
                Tensor& x, std::vector<std::vector<float>>& heights,
                Tensor& truth);

/// Full training loop on already-normalized samples. Returns the per-epoch
/// mean train loss. Shuffles within the train set each epoch (seeded); skips
/// a trailing batch of size 1 (batch norm needs two samples). Throws on an
/// empty train set and aborts with a diagnostic on non-finite loss.
std::vector<double> train(ExposNet& model,
                          const std::vector<const AreaSample*>& train_set,
                          const TrainConfig& cfg, std::ostream* log = nullptr);

void write_loss_history_csv(const std::string& path,
                            const std::vector<double>& history);
std::vector<double> read_loss_history_csv(const std::string& path);

struct MetricCell {
    double rmse = 0.0;
    double mape_percent = 0.0;
    int mape_excluded = 0;
    int n = 0;
};

struct EvalBin {
    double lo = 0.0, hi = 0.0;
    double median = 0.0;
    int count = 0;
    double rmse = 0.0;
    double mape_percent = 0.0;
    int mape_excluded = 0;
};

inline constexpr int kEvalBins = 6;

struct EvalReport {
    ModelConfig::Option option = ModelConfig::Option::kTotal;
    int n_samples = 0;
    /// Row labels: band names plus "total" (per-frequency), or just "total".
    std::vector<std::string> rows;
    /// One (RMS, STD) cell pair per row. The derived total row of the
    /// per-frequency option has no STD prediction; its STD cell has n = 0.
    std::vector<std::array<MetricCell, 2>> table;
    /// Six equal-width bins over the true total E-field.
    std::vector<EvalBin> bins;
    /// Per-sample total-field pairs, in test order.
    std::vector<double> true_total, pred_total;

    std::string to_json() const;
};

/// Eval-mode predictions (clamped at zero) over the test set.
EvalReport evaluate(ExposNet& model,
                    const std::vector<const AreaSample*>& test);

/// Tile-block maps of true/predicted/absolute-error total field. Writes
/// truth.pgm, prediction.pgm, error.pgm, maps.json (geometry and gray
/// scaling), and samples.csv into `dir`.
void export_maps(const std::vector<const AreaSample*>& samples,
                 const std::vector<double>& pred_total,
                 const std::vector<double>& true_total, const std::string& dir);

}  // namespace exposnet
