#pragma once

// Model graphs, the portable weight store, the two attitude network
// builders, inference on a window and the finite-difference toy trainer.

#include "attikit/dataset.hpp"
#include "attikit/losses.hpp"
#include "attikit/nn/layers.hpp"
#include "attikit/sched.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace attikit::nn {

enum class LayerKind {
  Conv1d,
  MaxPool1d,
  Dense,
  Lstm,
  BiLstm,
  Concat,
  Activation,
  Dropout,
  UnitScale,
  GaussianNoise,
};

std::string_view layer_kind_name(LayerKind kind);

enum class ConcatAxis {
  Channels,  // inputs share T, stacked along channels
  Flat,      // each input flattened time-major into one column
};

struct LayerSpec {
  LayerKind kind{LayerKind::Dense};
  int filters{0};  // conv output channels
  int kernel{1};
  int stride{1};
  Padding padding{Padding::Causal};
  int units{0};  // dense / lstm width
  int pool{1};
  double rate{0.0};  // dropout rate or gaussian-noise stddev; identity at inference
  Activation act{Activation::Linear};
  ActivationParams act_params{};
  bool return_sequences{true};  // lstm / bilstm; false keeps the final state only
  ConcatAxis concat_axis{ConcatAxis::Channels};
};

struct Shape {
  int channels;
  int time;
  friend bool operator==(const Shape&, const Shape&) = default;
};

struct ParamInfo {
  std::string name;
  std::vector<std::int64_t> shape;
  std::int64_t size() const;
};

struct Node {
  std::string name;
  LayerSpec spec;
  std::vector<std::string> inputs;
  Shape shape{0, 0};  // inferred output shape
};

/// Directed acyclic layer graph. Nodes may only consume graph inputs or
/// earlier nodes, so insertion order is a topological order and every shape
/// is checked when the node is added.
class ModelGraph {
 public:
  ModelGraph() = default;

  void add_input(const std::string& name, Shape shape);
  const Node& add(const std::string& name, const LayerSpec& spec, const std::vector<std::string>& inputs);
  void set_output(const std::string& name);

  const std::vector<std::pair<std::string, Shape>>& inputs() const { return inputs_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::string& output() const { return output_; }
  Shape shape_of(const std::string& name) const;

  /// Trainable tensors in graph order.
  std::vector<ParamInfo> parameters() const;
  std::int64_t parameter_count() const;

 private:
  std::vector<std::pair<std::string, Shape>> inputs_;
  std::vector<Node> nodes_;
  std::map<std::string, Shape> shapes_;
  std::string output_;
};

// ---------------------------------------------------------------------------
// Weight store: {"format_version": 1, "tensors": {name: {"shape": [...],
// "data_b64_le_f32": "..."}}}

struct StoredTensor {
  std::vector<std::int64_t> shape;
  std::vector<float> data;
};

class weight_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct WeightStore {
  static constexpr int kFormatVersion = 1;
  std::map<std::string, StoredTensor> tensors;

  std::string to_json() const;
  static WeightStore from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static WeightStore load(const std::filesystem::path& path);
};

/// Every graph parameter must be present with the right shape; extra tensors
/// are an error unless allow_extra.
void check_weights(const ModelGraph& graph, const WeightStore& weights, bool allow_extra = false);

/// Glorot-uniform kernels, zero biases, from a fixed mt19937_64 stream.
WeightStore init_weights(const ModelGraph& graph, std::uint64_t seed, double gain = 1.0);
WeightStore zero_weights(const ModelGraph& graph);

// ---------------------------------------------------------------------------
// Architectures

struct ModelAOptions {
  int filters{128};
  int kernel{11};
  int pool{3};
  int dense_units{512};
  int lstm_units{128};
  int rate_units{512};
  double dropout{0.2};
  double input_noise{0.01};
  Activation act{Activation::Mish};
};

struct ModelBOptions {
  int lstm_units{50};
  int dense_units{256};
  int rate_units{256};
  double dropout{0.25};
  double input_noise{0.01};
};

/// Per-axis causal conv + pooling, fusion conv, dense, BiLSTM, sampling-rate branch, 4-unit head.
ModelGraph build_model_a(int window, const ModelAOptions& options = {});
/// Stacked LSTMs, dense, sampling-rate branch, 4-unit head.
ModelGraph build_model_b(int window, const ModelBOptions& options = {});

inline constexpr const char* kAxisInputs[6] = {"gx", "gy", "gz", "ax", "ay", "az"};
inline constexpr const char* kRateInput = "rate";
/// Sampling rate is fed as rate_hz / kRateScale.
inline constexpr double kRateScale = 1000.0;

// ---------------------------------------------------------------------------
// Inference

/// Flat double parameters keyed by name (row-major, stored shapes).
using ParameterSet = std::map<std::string, std::vector<double>>;

ParameterSet to_parameters(const WeightStore& weights);

struct ForwardResult {
  Quaterniond q;
  bool degenerate{false};  // head norm < 1e-8, identity returned
};

/// Evaluates the graph on named input tensors and returns every node output.
std::map<std::string, Tensor<double>> evaluate_graph(const ModelGraph& graph, const ParameterSet& params,
                                                     const std::map<std::string, Tensor<double>>& inputs);

std::map<std::string, Tensor<double>> window_inputs(const data::Window& window);

ForwardResult forward(const ModelGraph& graph, const ParameterSet& params, const data::Window& window);
/// Validates weights against the graph first.
ForwardResult forward(const ModelGraph& graph, const WeightStore& weights, const data::Window& window);

// ---------------------------------------------------------------------------
// Toy training

class unsupported_scale : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TrainOptions {
  std::int64_t parameter_cap{2000};
  double fd_step{1e-5};  // central-difference step
};

struct TrainResult {
  WeightStore weights;
  std::vector<double> loss_trace;  // loss before step k, then the final loss (steps + 1 entries)
};

/// Mean per-pair loss of the network outputs against the window targets.
double batch_loss(const ModelGraph& graph, const ParameterSet& params, std::span<const data::Window> batch,
                  loss::LossKind kind);

/// Plain gradient descent with central-difference gradients, lr from the schedule.
TrainResult toy_train(const ModelGraph& graph, const WeightStore& initial, std::span<const data::Window> batch,
                      loss::LossKind kind, int steps, const sched::ScheduleSpec& schedule,
                      const TrainOptions& options = {});

/// Loss after `probe_steps` of constant-lr toy training from `initial`; for sched::lr_find.
sched::LrProbe make_lr_probe(const ModelGraph& graph, const WeightStore& initial, std::vector<data::Window> batch,
                             loss::LossKind kind, int probe_steps, const TrainOptions& options = {});

}  // namespace attikit::nn
