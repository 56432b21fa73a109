#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lgan/critic.hpp"
#include "lgan/generator.hpp"
#include "lgan/manifest.hpp"
#include "lgan/metrics.hpp"
#include "lgan/nn/network.hpp"

namespace lgan::trainer {

struct TrainConfig {
    // nullopt trains the generator alone with BCE (the U-Net benchmark).
    std::optional<critic::CriticVariant> variant = critic::CriticVariant::Regression;
    int batch_size = 32;
    double lr = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double weight_decay = 5e-4;
    int n_critic = 5;
    double clip_c = 0.01;
    int epochs = 10;
    std::uint64_t seed = 0;
    int image_size = 64;
    int depth = 2;
    std::vector<int> generator_channels{16, 32};
    std::vector<int> critic_channels{16, 32, 64};
    int critic_fc_width = 256;
    double init_std = 0.02;
    // Generator steps between held-out evaluations; 0 evaluates only at the end.
    int eval_every = 0;
    // Stop after this many generator steps; 0 means run every epoch.
    int max_steps = 0;
    double threshold = 0.5;

    void validate() const;
    [[nodiscard]] std::string model_name() const;
    [[nodiscard]] generator::GeneratorSpec generator_spec() const;
    [[nodiscard]] critic::CriticSpec critic_spec() const;

    // Flat `key = value` form, one key per line, in a fixed order.
    [[nodiscard]] std::string to_text() const;
    // Applies `key = value` lines on top of the current values.
    void apply_text(const std::string& text);
    void set(const std::string& key, const std::string& value);
    // Run header echo, e.g. "lr=1e-05 batch=32 beta1=0.9 wd=0.0005 ...".
    [[nodiscard]] std::string header() const;
};

std::string variant_option_list();
// "baseline-unet" or a critic short name.
std::optional<critic::CriticVariant> parse_model(const std::string& name);

struct EvalSummary {
    double iou = 0.0;
    double dice = 0.0;
    std::optional<double> hausdorff;
};

struct TrainLogRecord {
    long step = 0;
    double g_total = 0.0;
    double g_bce = 0.0;
    double g_adv = 0.0;
    double d_loss = 0.0;
    double wall_seconds = 0.0;
    std::optional<EvalSummary> eval;
};

std::string format_log_line(const TrainLogRecord& r);

struct TrainHooks {
    std::function<void(const nn::NetworkState& critic)> after_critic_step;
    std::function<void(const TrainLogRecord&)> on_record;
};

struct TrainResult {
    nn::NetworkState generator;
    std::optional<nn::NetworkState> critic;
    std::vector<TrainLogRecord> log;
    long generator_updates = 0;
    long critic_updates = 0;
    std::optional<metrics::MetricReport> final_report;
};

// In-memory training on already-loaded slices.
TrainResult train(const TrainConfig& cfg, const std::vector<LabeledSlice>& train_set,
                  const std::vector<LabeledSlice>& test_set, const TrainHooks& hooks = {});

// Full run: loads the manifest splits, trains, and writes the run directory
// (config.echo, train.log, checkpoints/, report.tsv, table.txt).
TrainResult train(const TrainConfig& cfg, const DatasetManifest& data, const std::filesystem::path& out_dir,
                  const TrainHooks& hooks = {});

// Segments every slice with the generator and scores it.
std::vector<BinaryMask> predict(const nn::NetworkState& generator, const std::vector<LabeledSlice>& slices,
                                double threshold = kDefaultThreshold);

metrics::MetricReport evaluate_predictions(const std::string& model, const std::vector<LabeledSlice>& slices,
                                           const std::vector<BinaryMask>& predictions);

metrics::MetricReport evaluate_checkpoint(const nn::NetworkState& generator, const DatasetManifest& data,
                                          const std::string& model, double threshold = kDefaultThreshold);

}  // namespace lgan::trainer
