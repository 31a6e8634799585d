#include "uca/neural.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>

#include "binary_io.hpp"
#include "uca/rng.hpp"

namespace uca {

namespace {

constexpr std::string_view kModelMagic = "UCAM";
constexpr std::uint8_t kModelVersion = 1;

double relu(double x) { return x > 0.0 ? x : 0.0; }

// Activations of every layer for one input; acts[0] is the input itself and
// acts.back() holds the scalar output.
void forward_pass(const MlpModel& model, std::span<const double> input,
                  std::vector<std::vector<double>>& acts) {
  const auto& layers = model.layers();
  const auto params = model.params();
  acts.resize(layers.size() + 1);
  acts[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& shape = layers[l];
    const bool hidden = l + 1 < layers.size();
    auto& out = acts[l + 1];
    out.resize(shape.outputs);
    const double* w = params.data() + shape.weight_offset;
    const double* b = params.data() + shape.bias_offset;
    const auto& in = acts[l];
    for (int o = 0; o < shape.outputs; ++o) {
      const double* row = w + static_cast<std::size_t>(o) * shape.inputs;
      double z = b[o];
      for (int i = 0; i < shape.inputs; ++i) z += row[i] * in[i];
      out[o] = hidden ? relu(z) : z;
    }
  }
}

}  // namespace

Normalization Normalization::fit(std::span<const LabeledPair> pairs) {
  Normalization norm;
  if (pairs.empty()) return norm;
  const auto count = static_cast<double>(pairs.size());
  double value_sum = 0.0, target_sum = 0.0;
  for (const auto& p : pairs) {
    value_sum += p.current_value;
    target_sum += p.target;
  }
  norm.value_mean = value_sum / count;
  norm.target_mean = target_sum / count;
  double value_sq = 0.0, target_sq = 0.0;
  for (const auto& p : pairs) {
    value_sq += (p.current_value - norm.value_mean) * (p.current_value - norm.value_mean);
    target_sq += (p.target - norm.target_mean) * (p.target - norm.target_mean);
  }
  norm.value_std = std::sqrt(value_sq / count);
  norm.target_std = std::sqrt(target_sq / count);
  if (!(norm.value_std > 1e-12)) norm.value_std = 1.0;
  if (!(norm.target_std > 1e-12)) norm.target_std = 1.0;
  return norm;
}

MlpModel::MlpModel(int n, int m, std::vector<int> widths) : n_(n), m_(m) {
  if (widths.size() < 2 || widths.back() != 1) {
    throw UsageError("network widths must end in a single output");
  }
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    if (widths[l] < 1 || widths[l + 1] < 1) throw UsageError("layer widths must be positive");
    LayerShape shape{widths[l], widths[l + 1], offset, 0};
    offset += static_cast<std::size_t>(shape.inputs) * shape.outputs;
    shape.bias_offset = offset;
    offset += shape.outputs;
    layers_.push_back(shape);
  }
  params_.assign(offset, 0.0);
}

MlpModel MlpModel::for_problem(int n, int m, std::uint64_t seed) {
  ProblemSpec{n, m, seed}.validate();
  const int width = m * n + 1;
  MlpModel model(n, m, {width, width, width, width, 1});
  Rng rng = make_rng(seed);
  for (std::size_t l = 0; l < model.layers_.size(); ++l) {
    const auto& shape = model.layers_[l];
    std::normal_distribution<double> he(0.0, std::sqrt(2.0 / shape.inputs));
    for (int o = 0; o < shape.outputs; ++o) {
      for (int i = 0; i < shape.inputs; ++i) model.weight(l, o, i) = he(rng);
    }
  }
  return model;
}

void MlpModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  io::put_magic(out, kModelMagic, kModelVersion);
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(n_));
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(m_));
  for (double c : {norm.value_mean, norm.value_std, norm.target_mean, norm.target_std}) {
    io::put<double>(out, c);
  }
  for (const auto& shape : layers_) {
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(shape.outputs));
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(shape.inputs));
    const auto weights = static_cast<std::size_t>(shape.outputs) * shape.inputs;
    out.write(reinterpret_cast<const char*>(params_.data() + shape.weight_offset),
              static_cast<std::streamsize>(weights * sizeof(double)));
    out.write(reinterpret_cast<const char*>(params_.data() + shape.bias_offset),
              static_cast<std::streamsize>(shape.outputs * sizeof(double)));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

MlpModel MlpModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  io::expect_magic(in, kModelMagic, kModelVersion);
  const auto n = static_cast<int>(io::get<std::uint32_t>(in, "n"));
  const auto m = static_cast<int>(io::get<std::uint32_t>(in, "m"));
  Normalization norm;
  norm.value_mean = io::get<double>(in, "norm");
  norm.value_std = io::get<double>(in, "norm");
  norm.target_mean = io::get<double>(in, "norm");
  norm.target_std = io::get<double>(in, "norm");

  std::vector<int> widths;
  std::vector<std::vector<double>> blocks;
  while (in.peek() != std::char_traits<char>::eof()) {
    const auto rows = io::get<std::uint32_t>(in, "layer rows");
    const auto cols = io::get<std::uint32_t>(in, "layer cols");
    if (rows == 0 || cols == 0 || rows > 1'000'000 || cols > 1'000'000) {
      throw FormatError("implausible layer shape");
    }
    if (widths.empty()) {
      widths.push_back(static_cast<int>(cols));
    } else if (widths.back() != static_cast<int>(cols)) {
      throw FormatError("layer shapes do not chain");
    }
    widths.push_back(static_cast<int>(rows));
    std::vector<double> block(static_cast<std::size_t>(rows) * cols + rows);
    if (!in.read(reinterpret_cast<char*>(block.data()),
                 static_cast<std::streamsize>(block.size() * sizeof(double)))) {
      throw FormatError("truncated layer parameters");
    }
    blocks.push_back(std::move(block));
  }
  if (widths.empty() || widths.back() != 1) throw FormatError("model must end in one output");
  if (widths.front() != m * n + 1) throw FormatError("model input width is not mn+1");

  MlpModel model(n, m, widths);
  model.norm = norm;
  std::size_t offset = 0;
  for (const auto& block : blocks) {
    std::copy(block.begin(), block.end(), model.params_.begin() + offset);
    offset += block.size();
  }
  for (double p : model.params_) {
    if (!std::isfinite(p)) throw FormatError("model parameters must be finite");
  }
  return model;
}

std::vector<double> encode_input(const PartialAssignment& s, double current_value,
                                 const Normalization& norm) {
  const int n = s.n();
  std::vector<double> x(static_cast<std::size_t>(s.m()) * n + 1, 0.0);
  for (int j = 0; j < n; ++j) {
    const auto label = s.label(j);
    if (label != kUnassigned) x[static_cast<std::size_t>(label) * n + j] = 1.0;
  }
  x.back() = norm.standardize_value(current_value);
  return x;
}

double forward_standardized(const MlpModel& model, std::span<const double> input) {
  if (static_cast<int>(input.size()) != model.input_size()) {
    throw UsageError("input length " + std::to_string(input.size()) + " does not match network input " +
                     std::to_string(model.input_size()));
  }
  thread_local std::vector<std::vector<double>> acts;
  forward_pass(model, input, acts);
  return acts.back()[0];
}

double forward(const MlpModel& model, std::span<const double> input) {
  return model.norm.destandardize_target(forward_standardized(model, input));
}

EncodedBatch encode_batch(const MlpModel& model, std::span<const LabeledPair> pairs) {
  EncodedBatch batch;
  batch.input_size = model.input_size();
  batch.inputs.reserve(pairs.size() * batch.input_size);
  batch.targets.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (p.assignment.n() != model.n() || p.assignment.m() != model.m()) {
      throw UsageError("pair dimensions do not match the model");
    }
    const auto x = encode_input(p.assignment, p.current_value, model.norm);
    batch.inputs.insert(batch.inputs.end(), x.begin(), x.end());
    batch.targets.push_back(model.norm.standardize_target(p.target));
  }
  return batch;
}

double loss(const MlpModel& model, const EncodedBatch& batch) {
  if (batch.size() == 0) throw UsageError("loss of an empty batch");
  double total = 0.0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const double err = batch.targets[k] - forward_standardized(model, batch.row(k));
    total += err * err;
  }
  return total / static_cast<double>(batch.size());
}

double loss(const MlpModel& model, std::span<const LabeledPair> pairs) {
  return loss(model, encode_batch(model, pairs));
}

std::vector<double> backward(const MlpModel& model, const EncodedBatch& batch,
                             std::size_t begin, std::size_t end) {
  if (begin >= end || end > batch.size()) throw UsageError("backward of an empty batch");
  const auto& layers = model.layers();
  const auto params = model.params();
  std::vector<double> grad(params.size(), 0.0);
  std::vector<std::vector<double>> acts;
  std::vector<double> delta, prev_delta;
  const double scale = 2.0 / static_cast<double>(end - begin);

  for (std::size_t k = begin; k < end; ++k) {
    forward_pass(model, batch.row(k), acts);
    // d loss / d output for this sample.
    delta.assign(1, -scale * (batch.targets[k] - acts.back()[0]));
    for (std::size_t l = layers.size(); l-- > 0;) {
      const auto& shape = layers[l];
      const auto& in = acts[l];
      double* gw = grad.data() + shape.weight_offset;
      double* gb = grad.data() + shape.bias_offset;
      for (int o = 0; o < shape.outputs; ++o) {
        const double d = delta[o];
        gb[o] += d;
        if (d == 0.0) continue;
        double* row = gw + static_cast<std::size_t>(o) * shape.inputs;
        for (int i = 0; i < shape.inputs; ++i) row[i] += d * in[i];
      }
      if (l == 0) break;
      // Propagate through the weights, then through the ReLU of layer l-1;
      // in[i] > 0 exactly when that unit was active.
      prev_delta.assign(shape.inputs, 0.0);
      const double* w = params.data() + shape.weight_offset;
      for (int o = 0; o < shape.outputs; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        const double* row = w + static_cast<std::size_t>(o) * shape.inputs;
        for (int i = 0; i < shape.inputs; ++i) prev_delta[i] += d * row[i];
      }
      for (int i = 0; i < shape.inputs; ++i) {
        if (!(in[i] > 0.0)) prev_delta[i] = 0.0;
      }
      delta.swap(prev_delta);
    }
  }
  return grad;
}

std::vector<double> backward(const MlpModel& model, const EncodedBatch& batch) {
  return backward(model, batch, 0, batch.size());
}

std::vector<double> backward(const MlpModel& model, std::span<const LabeledPair> pairs) {
  return backward(model, encode_batch(model, pairs));
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw UsageError("learning rate must be non-negative");
  if (batch_size < 1) throw UsageError("batch size must be positive");
  if (epochs < 0) throw UsageError("epochs must be non-negative");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw UsageError("Adam betas must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw UsageError("Adam epsilon must be positive");
}

void adam_step(std::span<double> params, std::span<const double> gradient, AdamState& state,
               const TrainConfig& cfg) {
  if (gradient.size() != params.size() || state.first.size() != params.size() ||
      state.second.size() != params.size()) {
    throw UsageError("optimizer state does not match the parameter count");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(cfg.beta1, t);
  const double correct2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = gradient[k];
    state.first[k] = cfg.beta1 * state.first[k] + (1.0 - cfg.beta1) * g;
    state.second[k] = cfg.beta2 * state.second[k] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.first[k] / correct1;
    const double v_hat = state.second[k] / correct2;
    params[k] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

void adam_step(MlpModel& model, std::span<const double> gradient, AdamState& state,
               const TrainConfig& cfg) {
  adam_step(model.params(), gradient, state, cfg);
}

TrainResult train_model(MlpModel model, std::span<const LabeledPair> train_set,
                        std::span<const LabeledPair> test_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty() || test_set.empty()) {
    throw UsageError("training needs non-empty train and test sets");
  }
  const EncodedBatch train_batch = encode_batch(model, train_set);
  const EncodedBatch test_batch = encode_batch(model, test_set);

  // Mini-batches are contiguous ranges of a shuffled copy.
  EncodedBatch shuffled = train_batch;
  std::vector<std::size_t> order(train_batch.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_substream(cfg.seed, 1);
  AdamState state(model.params().size());

  TrainResult result{model, {}};
  result.trace.push_back({0, loss(model, train_batch), loss(model, test_batch)});
  const auto width = static_cast<std::size_t>(train_batch.input_size);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k < order.size(); ++k) {
      std::copy_n(train_batch.inputs.begin() + order[k] * width, width,
                  shuffled.inputs.begin() + k * width);
      shuffled.targets[k] = train_batch.targets[order[k]];
    }
    for (std::size_t begin = 0; begin < shuffled.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const auto end = std::min(shuffled.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      const auto grad = backward(model, shuffled, begin, end);
      adam_step(model, grad, state, cfg);
    }
    result.trace.push_back({epoch, loss(model, train_batch), loss(model, test_batch)});
  }
  result.model = std::move(model);
  return result;
}

TrainResult train(std::span<const LabeledPair> train_set, std::span<const LabeledPair> test_set,
                  int n, int m, const TrainConfig& cfg) {
  MlpModel model = MlpModel::for_problem(n, m, substream_seed(cfg.seed, 0));
  model.norm = Normalization::fit(train_set);
  return train_model(std::move(model), train_set, test_set, cfg);
}

GridResult grid_search(std::span<const LabeledPair> train_set,
                       std::span<const LabeledPair> test_set, int n, int m,
                       std::span<const double> lr_grid, std::span<const int> batch_grid,
                       const TrainConfig& base) {
  if (lr_grid.empty() || batch_grid.empty()) throw UsageError("grid search needs non-empty grids");
  std::optional<GridResult> best;
  std::vector<GridCell> cells;
  for (double lr : lr_grid) {
    for (int batch : batch_grid) {
      TrainConfig cfg = base;
      cfg.learning_rate = lr;
      cfg.batch_size = batch;
      auto result = train(train_set, test_set, n, m, cfg);
      const double test_loss = result.trace.back().test_loss;
      cells.push_back({lr, batch, test_loss});
      if (!best || test_loss < best->result.trace.back().test_loss) {
        best = GridResult{cfg, std::move(result), {}};
      }
    }
  }
  best->cells = std::move(cells);
  return std::move(*best);
}

double predict_value_to_go(const MlpModel& model, const PartialAssignment& s,
                           const ValueTable& v) {
  if (s.n() != model.n() || s.m() != model.m()) {
    throw UsageError("assignment dimensions do not match the model");
  }
  return forward(model, encode_input(s, value_of(s, v), model.norm));
}

}  // namespace uca
