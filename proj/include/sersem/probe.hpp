#pragma once

// Membership probes over pooled transformer activations: one small MLP per
// layer, trained with binary cross-entropy, plus the top-layer ensemble.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace sersem {

struct TrainConfig {
  std::size_t hidden_dim = 128;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  double validation_fraction = 0.2;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

/// Per-dimension standardization fitted on a training split. Dimensions with
/// standard deviation below kStdGuard map to 0.
struct Standardizer {
  static constexpr double kStdGuard = 1e-8;

  std::vector<double> mean;
  std::vector<double> scale;  // population std, or 0 for constant dimensions

  static Standardizer fit(std::span<const std::vector<double>> rows);
  std::vector<double> apply(std::span<const double> x) const;
};

/// Feature rows for one layer with their sample ids and 0/1 labels.
struct LabeledSet {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> features;
  std::vector<int> labels;

  std::size_t size() const { return features.size(); }
  LabeledSet subset(std::span<const std::size_t> rows) const;
};

/// sigmoid(w2 . relu(x W1 + b1) + b2) on standardized input x.
struct ProbeParams {
  std::size_t layer = 0;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Standardizer standardizer;
  std::vector<double> w1;  // input_dim x hidden_dim, row-major
  std::vector<double> b1;  // hidden_dim
  std::vector<double> w2;  // hidden_dim
  double b2 = 0.0;
  bool trained = false;

  friend bool operator==(const ProbeParams& a, const ProbeParams& b) {
    return a.layer == b.layer && a.input_dim == b.input_dim && a.hidden_dim == b.hidden_dim &&
           a.standardizer.mean == b.standardizer.mean &&
           a.standardizer.scale == b.standardizer.scale && a.w1 == b.w1 && a.b1 == b.b1 &&
           a.w2 == b.w2 && a.b2 == b.b2 && a.trained == b.trained;
  }
};

/// He-uniform first layer, Glorot-uniform output layer, zero biases and an
/// identity standardizer.
ProbeParams init_probe(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed);

struct ProbeGradient {
  std::vector<double> w1, b1, w2;
  double b2 = 0.0;
};

/// Mean binary cross-entropy of the probe over already standardized rows;
/// fills `grad` with the analytic gradient when non-null.
double bce_loss(const ProbeParams& probe, std::span<const std::vector<double>> standardized,
                std::span<const int> labels, ProbeGradient* grad = nullptr);

struct TrainLog {
  std::vector<double> epoch_loss;  // training BCE before epoch 1, then after each epoch
};

/// Mini-batch gradient descent with momentum, seeded from config.seed and
/// `layer`. Throws InvalidArgument for single-class input, fewer than two
/// samples per class, ragged rows or a non-finite feature (naming the sample).
ProbeParams train_probe(const LabeledSet& data, const TrainConfig& config, std::size_t layer = 0,
                        TrainLog* log = nullptr);

double probe_logit(const ProbeParams& probe, std::span<const double> features);

/// Membership probability in (0, 1) for raw (unstandardized) features.
double probe_infer(const ProbeParams& probe, std::span<const double> features);

// ---------------------------------------------------------------------------
// Layer selection and ensembling

inline constexpr std::size_t kEnsembleSize = 5;

using ProbeSet = std::map<std::size_t, ProbeParams>;

struct LayerScore {
  std::size_t layer = 0;
  double auc = 0.0;
  friend bool operator==(const LayerScore&, const LayerScore&) = default;
};

struct LayerSelection {
  std::vector<LayerScore> ranked;   // validation AUC descending, ties by lower layer
  std::vector<std::size_t> chosen;  // first min(top_k, layers) of ranked
  friend bool operator==(const LayerSelection&, const LayerSelection&) = default;
};

/// Ranks per-layer validation AUCs directly.
LayerSelection rank_layers(std::map<std::size_t, double> auc_by_layer,
                           std::size_t top_k = kEnsembleSize);

LayerSelection select_layers(const ProbeSet& probes,
                             const std::map<std::size_t, LabeledSet>& validation,
                             std::size_t top_k = kEnsembleSize);

/// Mean probe output over the chosen layers. `features` maps layer to that
/// layer's feature vector for one sample.
double ensemble_infer(const LayerSelection& selection, const ProbeSet& probes,
                      const std::map<std::size_t, std::vector<double>>& features);

struct ProbeBundle {
  TrainConfig config;
  ProbeSet probes;
  LayerSelection selection;
};

/// Seeded stratified split of row indices into (train, validation).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    std::span<const int> labels, double validation_fraction, std::uint64_t seed);

/// Splits every layer's rows the same way (the sets must list the same ids
/// in the same order), trains one probe per layer on up to `workers` threads,
/// and selects the top layers on the held-out rows.
ProbeBundle train_probe_bundle(const std::map<std::size_t, LabeledSet>& layers,
                               const TrainConfig& config, std::size_t workers = 1);

void write_bundle(const ProbeBundle& bundle, const std::filesystem::path& path);
ProbeBundle read_bundle(const std::filesystem::path& path);

}  // namespace sersem
