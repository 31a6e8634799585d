#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "uca/core.hpp"
#include "uca/dataset.hpp"

namespace uca {

// Standardization constants for the V(S) input feature and the V* target.
struct Normalization {
  double value_mean = 0.0;
  double value_std = 1.0;
  double target_mean = 0.0;
  double target_std = 1.0;

  double standardize_value(double x) const { return (x - value_mean) / value_std; }
  double standardize_target(double x) const { return (x - target_mean) / target_std; }
  double destandardize_target(double z) const { return z * target_std + target_mean; }

  // Mean and standard deviation of the training pairs; a zero spread maps to 1.
  static Normalization fit(std::span<const LabeledPair> pairs);
};

struct LayerShape {
  int inputs = 0;
  int outputs = 0;
  std::size_t weight_offset = 0;  // row-major outputs x inputs
  std::size_t bias_offset = 0;
};

// Fully connected network: affine layers with ReLU between them and an affine
// scalar output. All parameters live in one flat vector so gradients and
// optimizer moments share its layout.
class MlpModel {
 public:
  // widths = {input, hidden..., 1}; parameters start at zero.
  MlpModel(int n, int m, std::vector<int> widths);

  // The heuristic network for an n x m problem: input mn+1, three hidden
  // layers of width mn+1, He-initialized weights and zero biases.
  static MlpModel for_problem(int n, int m, std::uint64_t seed);

  int n() const { return n_; }
  int m() const { return m_; }
  int input_size() const { return layers_.front().inputs; }
  const std::vector<LayerShape>& layers() const { return layers_; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  double& weight(std::size_t layer, int out, int in) {
    const auto& l = layers_[layer];
    return params_[l.weight_offset + static_cast<std::size_t>(out) * l.inputs + in];
  }
  double& bias(std::size_t layer, int out) { return params_[layers_[layer].bias_offset + out]; }
  double weight(std::size_t layer, int out, int in) const {
    const auto& l = layers_[layer];
    return params_[l.weight_offset + static_cast<std::size_t>(out) * l.inputs + in];
  }
  double bias(std::size_t layer, int out) const { return params_[layers_[layer].bias_offset + out]; }

  Normalization norm;

  void save(const std::filesystem::path& path) const;
  static MlpModel load(const std::filesystem::path& path);

 private:
  int n_;
  int m_;
  std::vector<LayerShape> layers_;
  std::vector<double> params_;
};

// m x n binary assignment matrix (row i, column j set iff element j has
// alternative i), row-major, followed by the standardized V(S).
std::vector<double> encode_input(const PartialAssignment& s, double current_value,
                                 const Normalization& norm);

// Network output in standardized target units.
double forward_standardized(const MlpModel& model, std::span<const double> input);

// Network output mapped back to value units.
double forward(const MlpModel& model, std::span<const double> input);

// A pre-encoded batch: row-major inputs and standardized targets.
struct EncodedBatch {
  int input_size = 0;
  std::vector<double> inputs;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
  std::span<const double> row(std::size_t k) const {
    return std::span<const double>(inputs).subspan(k * input_size, input_size);
  }
};

EncodedBatch encode_batch(const MlpModel& model, std::span<const LabeledPair> pairs);

// Mean squared error between standardized targets and standardized outputs.
double loss(const MlpModel& model, const EncodedBatch& batch);
double loss(const MlpModel& model, std::span<const LabeledPair> pairs);

// Exact gradient of `loss` over the rows [begin, end) of the batch; the ReLU
// derivative at 0 is 0.
std::vector<double> backward(const MlpModel& model, const EncodedBatch& batch,
                             std::size_t begin, std::size_t end);
std::vector<double> backward(const MlpModel& model, const EncodedBatch& batch);
std::vector<double> backward(const MlpModel& model, std::span<const LabeledPair> pairs);

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 64;
  int epochs = 200;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AdamState {
  std::vector<double> first;
  std::vector<double> second;
  std::int64_t step = 0;

  explicit AdamState(std::size_t params = 0) : first(params, 0.0), second(params, 0.0) {}
};

void adam_step(std::span<double> params, std::span<const double> gradient, AdamState& state,
               const TrainConfig& cfg);
void adam_step(MlpModel& model, std::span<const double> gradient, AdamState& state,
               const TrainConfig& cfg);

struct EpochLoss {
  int epoch = 0;  // 0 is the untrained model
  double train_loss = 0.0;
  double test_loss = 0.0;
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochLoss> trace;
};

// Fits the normalization on `train`, initializes from cfg.seed, then runs
// cfg.epochs passes of shuffled mini-batch Adam.
TrainResult train(std::span<const LabeledPair> train_set, std::span<const LabeledPair> test_set,
                  int n, int m, const TrainConfig& cfg);

// Same, starting from a given model whose normalization is already set.
TrainResult train_model(MlpModel model, std::span<const LabeledPair> train_set,
                        std::span<const LabeledPair> test_set, const TrainConfig& cfg);

struct GridCell {
  double learning_rate = 0.0;
  int batch_size = 0;
  double test_loss = 0.0;
};

struct GridResult {
  TrainConfig best;
  TrainResult result;
  std::vector<GridCell> cells;
};

// One training run per (learning rate, batch size) cell, selecting the lowest
// final test loss; ties keep the earlier cell (learning rate major).
GridResult grid_search(std::span<const LabeledPair> train_set,
                       std::span<const LabeledPair> test_set, int n, int m,
                       std::span<const double> lr_grid, std::span<const int> batch_grid,
                       const TrainConfig& base);

double predict_value_to_go(const MlpModel& model, const PartialAssignment& s,
                           const ValueTable& v);

}  // namespace uca
