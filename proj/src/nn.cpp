#include "attikit/nn/model.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

namespace attikit::nn {

namespace {

using json = nlohmann::json;

std::string shape_str(const std::vector<std::int64_t>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "]";
}

std::string shape_str(Shape s) { return "[" + std::to_string(s.channels) + "x" + std::to_string(s.time) + "]"; }

std::int64_t product(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

// --- base64 of little-endian f32 -------------------------------------------

std::string encode_f32(const std::vector<float>& values) {
  std::vector<unsigned char> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t u = std::bit_cast<std::uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<unsigned char>((u >> (8 * b)) & 0xffu);
  }
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<float> decode_f32(const std::string& text, const std::string& name) {
  if (text.size() % 4 != 0) throw weight_error("tensor '" + name + "': malformed base64 payload");
  std::vector<unsigned char> bytes(text.size() / 4 * 3);
  const int n = text.empty() ? 0
                             : EVP_DecodeBlock(bytes.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                               static_cast<int>(text.size()));
  if (n < 0) throw weight_error("tensor '" + name + "': malformed base64 payload");
  std::size_t len = static_cast<std::size_t>(n);
  if (!text.empty() && text.back() == '=') --len;
  if (text.size() >= 2 && text[text.size() - 2] == '=') --len;
  if (len % 4 != 0) throw weight_error("tensor '" + name + "': payload is not a whole number of f32 values");
  std::vector<float> out(len / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
    out[i] = std::bit_cast<float>(u);
  }
  return out;
}

// --- graph helpers -----------------------------------------------------------

LayerSpec make(LayerKind kind) {
  LayerSpec s;
  s.kind = kind;
  return s;
}

LayerSpec conv(int filters, int kernel, Activation act) {
  LayerSpec s = make(LayerKind::Conv1d);
  s.filters = filters;
  s.kernel = kernel;
  s.padding = Padding::Causal;
  s.act = act;
  return s;
}

LayerSpec dense(int units, Activation act) {
  LayerSpec s = make(LayerKind::Dense);
  s.units = units;
  s.act = act;
  return s;
}

LayerSpec with_rate(LayerKind kind, double rate) {
  LayerSpec s = make(kind);
  s.rate = rate;
  return s;
}

LayerSpec concat(ConcatAxis axis) {
  LayerSpec s = make(LayerKind::Concat);
  s.concat_axis = axis;
  return s;
}

void check_window(int window) {
  if (window < 12 || window % 2 != 0) {
    throw std::invalid_argument("window length must be even and >= 12, got " + std::to_string(window));
  }
}

void add_inputs(ModelGraph& g, int window) {
  for (const char* name : kAxisInputs) g.add_input(name, {1, window});
  g.add_input(kRateInput, {1, 1});
}

// --- evaluation --------------------------------------------------------------

std::span<const double> param(const ParameterSet& params, const std::string& name, std::int64_t size) {
  const auto it = params.find(name);
  if (it == params.end()) throw weight_error("missing tensor '" + name + "'");
  if (static_cast<std::int64_t>(it->second.size()) != size) {
    throw weight_error("tensor '" + name + "' has " + std::to_string(it->second.size()) + " values, expected " +
                       std::to_string(size));
  }
  return it->second;
}

LstmWeights<double> lstm_params(const ParameterSet& params, const std::string& prefix, int d, int u) {
  return {param(params, prefix + "/W", 4LL * u * d), param(params, prefix + "/U", 4LL * u * u),
          param(params, prefix + "/b", 4LL * u)};
}

Tensor<double> flatten(const Tensor<double>& x) {
  // column-major storage is time-major: all channels of step 0, then step 1, ...
  return Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::Linear: return "linear";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::LeakyRelu: return "leaky_relu";
    case Activation::Elu: return "elu";
    case Activation::Swish: return "swish";
    case Activation::RRelu: return "rrelu";
    case Activation::Mish: return "mish";
  }
  return "?";
}

std::optional<Activation> parse_activation(std::string_view name) {
  std::string n;
  for (char c : name) n.push_back(c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (auto a : {Activation::Linear, Activation::Sigmoid, Activation::Relu, Activation::Tanh, Activation::LeakyRelu,
                 Activation::Elu, Activation::Swish, Activation::RRelu, Activation::Mish}) {
    if (activation_name(a) == n) return a;
  }
  return std::nullopt;
}

std::string_view layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv1d: return "conv1d";
    case LayerKind::MaxPool1d: return "maxpool1d";
    case LayerKind::Dense: return "dense";
    case LayerKind::Lstm: return "lstm";
    case LayerKind::BiLstm: return "bilstm";
    case LayerKind::Concat: return "concat";
    case LayerKind::Activation: return "activation";
    case LayerKind::Dropout: return "dropout";
    case LayerKind::UnitScale: return "unit_scale";
    case LayerKind::GaussianNoise: return "gaussian_noise";
  }
  return "?";
}

std::int64_t ParamInfo::size() const { return product(shape); }

// ---------------------------------------------------------------------------
// ModelGraph

void ModelGraph::add_input(const std::string& name, Shape shape) {
  if (shapes_.count(name)) throw shape_error("duplicate graph name '" + name + "'");
  if (shape.channels < 1 || shape.time < 1) throw shape_error("input '" + name + "' has an empty shape");
  inputs_.emplace_back(name, shape);
  shapes_[name] = shape;
}

Shape ModelGraph::shape_of(const std::string& name) const {
  const auto it = shapes_.find(name);
  if (it == shapes_.end()) throw shape_error("unknown graph node '" + name + "'");
  return it->second;
}

const Node& ModelGraph::add(const std::string& name, const LayerSpec& spec, const std::vector<std::string>& inputs) {
  if (shapes_.count(name)) throw shape_error("duplicate graph name '" + name + "'");
  if (inputs.empty()) throw shape_error(name + ": no inputs");
  std::vector<Shape> in;
  for (const auto& i : inputs) in.push_back(shape_of(i));
  const auto fail = [&](const std::string& what) -> void {
    throw shape_error(name + " (" + std::string(layer_kind_name(spec.kind)) + "): " + what);
  };
  if (spec.kind != LayerKind::Concat && in.size() != 1) fail("expects exactly one input");
  const Shape x = in.front();

  Shape out = x;
  switch (spec.kind) {
    case LayerKind::Conv1d:
      if (spec.filters < 1 || spec.kernel < 1 || spec.stride < 1) fail("filters, kernel and stride must be >= 1");
      out = {spec.filters, static_cast<int>(conv1d_output_length(x.time, spec.stride))};
      break;
    case LayerKind::MaxPool1d:
      if (spec.pool < 1) fail("pool size must be >= 1");
      out = {x.channels, x.time / spec.pool};
      if (out.time < 1) fail("input length " + std::to_string(x.time) + " is shorter than the pool");
      break;
    case LayerKind::Dense:
      if (spec.units < 1) fail("units must be >= 1");
      out = {spec.units, x.time};
      break;
    case LayerKind::Lstm:
    case LayerKind::BiLstm: {
      if (spec.units < 1) fail("units must be >= 1");
      const int width = spec.kind == LayerKind::Lstm ? spec.units : 2 * spec.units;
      out = {width, spec.return_sequences ? x.time : 1};
      break;
    }
    case LayerKind::Concat:
      if (spec.concat_axis == ConcatAxis::Channels) {
        out = {0, x.time};
        for (const auto& s : in) {
          if (s.time != x.time) fail("channel concat needs equal lengths, got " + shape_str(s) + " and " + shape_str(x));
          out.channels += s.channels;
        }
      } else {
        out = {0, 1};
        for (const auto& s : in) out.channels += s.channels * s.time;
      }
      break;
    case LayerKind::Activation:
      break;
    case LayerKind::Dropout:
      if (!(spec.rate >= 0.0 && spec.rate < 1.0)) fail("dropout rate must lie in [0, 1)");
      break;
    case LayerKind::GaussianNoise:
      if (!(spec.rate >= 0.0)) fail("noise stddev must be >= 0");
      break;
    case LayerKind::UnitScale:
      if (!(x == Shape{4, 1})) fail("expects a 4x1 input, got " + shape_str(x));
      break;
  }
  nodes_.push_back(Node{name, spec, inputs, out});
  shapes_[name] = out;
  return nodes_.back();
}

void ModelGraph::set_output(const std::string& name) {
  if (!(shape_of(name) == Shape{4, 1})) throw shape_error("graph output '" + name + "' must be 4x1");
  output_ = name;
}

std::vector<ParamInfo> ModelGraph::parameters() const {
  std::vector<ParamInfo> out;
  for (const auto& n : nodes_) {
    const Shape x = shape_of(n.inputs.front());
    const auto& s = n.spec;
    switch (s.kind) {
      case LayerKind::Conv1d:
        out.push_back({n.name + "/kernel", {s.filters, x.channels, s.kernel}});
        out.push_back({n.name + "/bias", {s.filters}});
        break;
      case LayerKind::Dense:
        out.push_back({n.name + "/kernel", {s.units, x.channels}});
        out.push_back({n.name + "/bias", {s.units}});
        break;
      case LayerKind::Lstm:
      case LayerKind::BiLstm: {
        const std::int64_t u = s.units;
        const std::vector<std::string> prefixes =
            s.kind == LayerKind::Lstm ? std::vector<std::string>{n.name}
                                      : std::vector<std::string>{n.name + "/fwd", n.name + "/bwd"};
        for (const auto& p : prefixes) {
          out.push_back({p + "/W", {4 * u, x.channels}});
          out.push_back({p + "/U", {4 * u, u}});
          out.push_back({p + "/b", {4 * u}});
        }
        break;
      }
      default:
        break;
    }
  }
  return out;
}

std::int64_t ModelGraph::parameter_count() const {
  std::int64_t n = 0;
  for (const auto& p : parameters()) n += p.size();
  return n;
}

// ---------------------------------------------------------------------------
// WeightStore

std::string WeightStore::to_json() const {
  json tensors_j = json::object();
  for (const auto& [name, t] : tensors) {
    tensors_j[name] = {{"shape", t.shape}, {"data_b64_le_f32", encode_f32(t.data)}};
  }
  json j = {{"format_version", kFormatVersion}, {"tensors", tensors_j}};
  return j.dump(1) + "\n";
}

WeightStore WeightStore::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw weight_error(std::string("weights: ") + e.what());
  }
  if (!j.is_object() || !j.contains("format_version") || !j.contains("tensors") || !j["tensors"].is_object()) {
    throw weight_error("weights: expected {format_version, tensors}");
  }
  if (j["format_version"] != kFormatVersion) {
    throw weight_error("weights: unsupported format_version " + j["format_version"].dump());
  }
  WeightStore store;
  for (const auto& [name, t] : j["tensors"].items()) {
    if (!t.contains("shape") || !t.contains("data_b64_le_f32")) {
      throw weight_error("tensor '" + name + "': missing shape or data_b64_le_f32");
    }
    StoredTensor st;
    try {
      st.shape = t["shape"].get<std::vector<std::int64_t>>();
    } catch (const json::exception&) {
      throw weight_error("tensor '" + name + "': shape must be an integer array");
    }
    if (st.shape.size() > 3) throw weight_error("tensor '" + name + "': rank above 3");
    for (auto d : st.shape) {
      if (d < 0) throw weight_error("tensor '" + name + "': negative dimension");
    }
    st.data = decode_f32(t["data_b64_le_f32"].get<std::string>(), name);
    if (static_cast<std::int64_t>(st.data.size()) != product(st.shape)) {
      throw weight_error("tensor '" + name + "': " + std::to_string(st.data.size()) + " values for shape " +
                         shape_str(st.shape));
    }
    for (float v : st.data) {
      if (!std::isfinite(v)) throw weight_error("tensor '" + name + "': non-finite value");
    }
    store.tensors.emplace(name, std::move(st));
  }
  return store;
}

void WeightStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw weight_error("cannot write " + path.string());
  out << to_json();
}

WeightStore WeightStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw weight_error("cannot open weights " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_json(ss.str());
  } catch (const weight_error& e) {
    throw weight_error(path.string() + ": " + e.what());
  }
}

void check_weights(const ModelGraph& graph, const WeightStore& weights, bool allow_extra) {
  std::size_t matched = 0;
  for (const auto& p : graph.parameters()) {
    const auto it = weights.tensors.find(p.name);
    if (it == weights.tensors.end()) throw weight_error("missing tensor '" + p.name + "'");
    if (it->second.shape != p.shape) {
      throw weight_error("tensor '" + p.name + "' has shape " + shape_str(it->second.shape) + ", expected " +
                         shape_str(p.shape));
    }
    ++matched;
  }
  if (!allow_extra && matched != weights.tensors.size()) {
    const auto params = graph.parameters();
    for (const auto& [name, t] : weights.tensors) {
      const bool known = std::any_of(params.begin(), params.end(), [&](const ParamInfo& p) { return p.name == name; });
      if (!known) throw weight_error("unexpected tensor '" + name + "'");
    }
  }
}

WeightStore zero_weights(const ModelGraph& graph) {
  WeightStore w;
  for (const auto& p : graph.parameters()) {
    w.tensors[p.name] = StoredTensor{p.shape, std::vector<float>(static_cast<std::size_t>(p.size()), 0.0f)};
  }
  return w;
}

WeightStore init_weights(const ModelGraph& graph, std::uint64_t seed, double gain) {
  std::mt19937_64 rng(seed);
  const auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  WeightStore w = zero_weights(graph);
  for (const auto& p : graph.parameters()) {
    auto& data = w.tensors[p.name].data;
    const std::string suffix = p.name.substr(p.name.rfind('/') + 1);
    if (suffix == "bias") continue;
    if (suffix == "b") {
      // unit forget-gate bias
      const std::size_t u = data.size() / 4;
      std::fill(data.begin() + static_cast<std::ptrdiff_t>(u), data.begin() + static_cast<std::ptrdiff_t>(2 * u), 1.0f);
      continue;
    }
    double fan_in = 0.0;
    double fan_out = 0.0;
    if (p.shape.size() == 3) {
      fan_in = static_cast<double>(p.shape[1] * p.shape[2]);
      fan_out = static_cast<double>(p.shape[0] * p.shape[2]);
    } else {
      fan_in = static_cast<double>(p.shape[1]);
      fan_out = static_cast<double>(p.shape[0]);
    }
    const double limit = gain * std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : data) v = static_cast<float>(limit * (2.0 * uniform() - 1.0));
  }
  return w;
}

// ---------------------------------------------------------------------------
// Architectures

ModelGraph build_model_a(int window, const ModelAOptions& o) {
  check_window(window);
  ModelGraph g;
  add_inputs(g, window);

  std::vector<std::string> branches;
  for (const char* axis : kAxisInputs) {
    const std::string a(axis);
    g.add(a + "_noise", with_rate(LayerKind::GaussianNoise, o.input_noise), {a});
    g.add(a + "_conv", conv(o.filters, o.kernel, o.act), {a + "_noise"});
    LayerSpec pool = make(LayerKind::MaxPool1d);
    pool.pool = o.pool;
    g.add(a + "_pool", pool, {a + "_conv"});
    g.add(a + "_drop", with_rate(LayerKind::Dropout, o.dropout), {a + "_pool"});
    branches.push_back(a + "_drop");
  }
  g.add("axes", concat(ConcatAxis::Channels), branches);
  g.add("fusion_conv", conv(o.filters, o.kernel, o.act), {"axes"});
  g.add("fusion_drop", with_rate(LayerKind::Dropout, o.dropout), {"fusion_conv"});
  g.add("fusion_dense", dense(o.dense_units, o.act), {"fusion_drop"});
  LayerSpec bi = make(LayerKind::BiLstm);
  bi.units = o.lstm_units;
  bi.return_sequences = false;
  g.add("bilstm", bi, {"fusion_dense"});
  g.add("bilstm_drop", with_rate(LayerKind::Dropout, o.dropout), {"bilstm"});

  g.add("rate_dense", dense(o.rate_units, o.act), {kRateInput});

  g.add("merge", concat(ConcatAxis::Flat), {"bilstm_drop", "fusion_conv", "rate_dense"});
  g.add("head", dense(4, Activation::Linear), {"merge"});
  g.add("unit", make(LayerKind::UnitScale), {"head"});
  g.set_output("unit");
  return g;
}

ModelGraph build_model_b(int window, const ModelBOptions& o) {
  check_window(window);
  ModelGraph g;
  add_inputs(g, window);

  std::vector<std::string> axes(std::begin(kAxisInputs), std::end(kAxisInputs));
  g.add("imu", concat(ConcatAxis::Channels), axes);
  g.add("imu_noise", with_rate(LayerKind::GaussianNoise, o.input_noise), {"imu"});
  LayerSpec l1 = make(LayerKind::Lstm);
  l1.units = o.lstm_units;
  l1.return_sequences = true;
  g.add("lstm1", l1, {"imu_noise"});
  g.add("lstm1_drop", with_rate(LayerKind::Dropout, o.dropout), {"lstm1"});
  LayerSpec l2 = l1;
  l2.return_sequences = false;
  g.add("lstm2", l2, {"lstm1_drop"});
  g.add("lstm2_drop", with_rate(LayerKind::Dropout, o.dropout), {"lstm2"});
  g.add("imu_dense", dense(o.dense_units, Activation::Relu), {"lstm2_drop"});

  g.add("rate_dense", dense(o.rate_units, Activation::Relu), {kRateInput});

  g.add("merge", concat(ConcatAxis::Flat), {"imu_dense", "rate_dense"});
  g.add("head", dense(4, Activation::Linear), {"merge"});
  g.add("unit", make(LayerKind::UnitScale), {"head"});
  g.set_output("unit");
  return g;
}

// ---------------------------------------------------------------------------
// Inference

ParameterSet to_parameters(const WeightStore& weights) {
  ParameterSet p;
  for (const auto& [name, t] : weights.tensors) p[name] = std::vector<double>(t.data.begin(), t.data.end());
  return p;
}

std::map<std::string, Tensor<double>> evaluate_graph(const ModelGraph& graph, const ParameterSet& params,
                                                     const std::map<std::string, Tensor<double>>& inputs) {
  std::map<std::string, Tensor<double>> values;
  for (const auto& [name, shape] : graph.inputs()) {
    const auto it = inputs.find(name);
    if (it == inputs.end()) throw shape_error("missing graph input '" + name + "'");
    if (it->second.rows() != shape.channels || it->second.cols() != shape.time) {
      throw shape_error("graph input '" + name + "' expected " + shape_str(shape));
    }
    values[name] = it->second;
  }
  for (const auto& n : graph.nodes()) {
    const Tensor<double>& x = values.at(n.inputs.front());
    const auto& s = n.spec;
    Tensor<double> y;
    switch (s.kind) {
      case LayerKind::Conv1d: {
        const auto k = param(params, n.name + "/kernel", std::int64_t{s.filters} * x.rows() * s.kernel);
        const auto b = param(params, n.name + "/bias", s.filters);
        y = activation(conv1d_forward<double>(x, k, b, s.filters, s.kernel, s.stride, s.padding), s.act, s.act_params);
        break;
      }
      case LayerKind::MaxPool1d:
        y = maxpool1d(x, s.pool);
        break;
      case LayerKind::Dense: {
        const auto k = param(params, n.name + "/kernel", std::int64_t{s.units} * x.rows());
        const auto b = param(params, n.name + "/bias", s.units);
        y = activation(dense_forward<double>(x, k, b, s.units), s.act, s.act_params);
        break;
      }
      case LayerKind::Lstm: {
        const auto d = static_cast<int>(x.rows());
        const Tensor<double> h = lstm_forward(x, lstm_params(params, n.name, d, s.units), s.units);
        y = s.return_sequences ? h : Tensor<double>(h.rightCols(1));
        break;
      }
      case LayerKind::BiLstm: {
        const auto d = static_cast<int>(x.rows());
        const Tensor<double> h = bilstm_forward(x, lstm_params(params, n.name + "/fwd", d, s.units),
                                                lstm_params(params, n.name + "/bwd", d, s.units), s.units);
        if (s.return_sequences) {
          y = h;
        } else {
          // final state of each direction: forward at T-1, backward at 0
          y.resize(2 * s.units, 1);
          y.topRows(s.units) = h.topRows(s.units).rightCols(1);
          y.bottomRows(s.units) = h.bottomRows(s.units).leftCols(1);
        }
        break;
      }
      case LayerKind::Concat: {
        y.resize(n.shape.channels, n.shape.time);
        Eigen::Index row = 0;
        for (const auto& in : n.inputs) {
          const Tensor<double>& v = values.at(in);
          const Tensor<double> part = s.concat_axis == ConcatAxis::Flat ? flatten(v) : v;
          y.middleRows(row, part.rows()) = part;
          row += part.rows();
        }
        break;
      }
      case LayerKind::Activation:
        y = activation(x, s.act, s.act_params);
        break;
      case LayerKind::Dropout:
      case LayerKind::GaussianNoise:
        y = x;
        break;
      case LayerKind::UnitScale: {
        const double norm = x.norm();
        if (norm < 1e-8) {
          y = Tensor<double>::Zero(4, 1);
          y(0, 0) = 1.0;
        } else {
          y = x / norm;
        }
        break;
      }
    }
    values[n.name] = std::move(y);
  }
  return values;
}

std::map<std::string, Tensor<double>> window_inputs(const data::Window& window) {
  std::map<std::string, Tensor<double>> in;
  for (int i = 0; i < 6; ++i) in[kAxisInputs[i]] = window.data.row(i);
  in[kRateInput] = Tensor<double>::Constant(1, 1, window.rate_hz / kRateScale);
  return in;
}

ForwardResult forward(const ModelGraph& graph, const ParameterSet& params, const data::Window& window) {
  if (graph.output().empty()) throw shape_error("graph has no output");
  const auto values = evaluate_graph(graph, params, window_inputs(window));
  ForwardResult r;
  const Tensor<double>& out = values.at(graph.output());
  r.q = Quaterniond(out(0, 0), out(1, 0), out(2, 0), out(3, 0));
  const auto& nodes = graph.nodes();
  const auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.name == graph.output(); });
  if (it != nodes.end() && it->spec.kind == LayerKind::UnitScale) {
    r.degenerate = values.at(it->inputs.front()).norm() < 1e-8;
  }
  return r;
}

ForwardResult forward(const ModelGraph& graph, const WeightStore& weights, const data::Window& window) {
  check_weights(graph, weights);
  return forward(graph, to_parameters(weights), window);
}

// ---------------------------------------------------------------------------
// Toy training

double batch_loss(const ModelGraph& graph, const ParameterSet& params, std::span<const data::Window> batch,
                  loss::LossKind kind) {
  std::vector<loss::QuatPair> pairs;
  pairs.reserve(batch.size());
  for (const auto& w : batch) {
    if (!w.target) throw std::invalid_argument("training window without a target");
    pairs.emplace_back(*w.target, forward(graph, params, w).q);
  }
  return loss::batch_loss(kind, pairs);
}

TrainResult toy_train(const ModelGraph& graph, const WeightStore& initial, std::span<const data::Window> batch,
                      loss::LossKind kind, int steps, const sched::ScheduleSpec& schedule,
                      const TrainOptions& options) {
  const std::int64_t count = graph.parameter_count();
  if (count > options.parameter_cap) {
    throw unsupported_scale("toy_train: " + std::to_string(count) + " parameters exceed the cap of " +
                            std::to_string(options.parameter_cap));
  }
  if (steps < 0) throw std::invalid_argument("toy_train: steps must be >= 0");
  if (batch.empty()) throw std::invalid_argument("toy_train: empty batch");
  if (!(options.fd_step > 0.0)) throw std::invalid_argument("toy_train: fd_step must be positive");
  schedule.validate();
  check_weights(graph, initial);

  ParameterSet params = to_parameters(initial);
  TrainResult r;
  r.loss_trace.reserve(static_cast<std::size_t>(steps) + 1);
  ParameterSet grad = params;
  for (int step = 0; step < steps; ++step) {
    r.loss_trace.push_back(batch_loss(graph, params, batch, kind));
    const double lr = sched::lr_at(schedule, step);
    if (lr == 0.0) continue;
    for (auto& [name, values] : params) {
      auto& g = grad[name];
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        values[i] = v + options.fd_step;
        const double up = batch_loss(graph, params, batch, kind);
        values[i] = v - options.fd_step;
        const double down = batch_loss(graph, params, batch, kind);
        values[i] = v;
        g[i] = (up - down) / (2.0 * options.fd_step);
      }
    }
    for (auto& [name, values] : params) {
      const auto& g = grad[name];
      for (std::size_t i = 0; i < values.size(); ++i) values[i] -= lr * g[i];
    }
  }
  r.loss_trace.push_back(batch_loss(graph, params, batch, kind));

  r.weights = initial;
  for (auto& [name, t] : r.weights.tensors) {
    const auto& v = params.at(name);
    for (std::size_t i = 0; i < v.size(); ++i) t.data[i] = static_cast<float>(v[i]);
  }
  return r;
}

sched::LrProbe make_lr_probe(const ModelGraph& graph, const WeightStore& initial, std::vector<data::Window> batch,
                             loss::LossKind kind, int probe_steps, const TrainOptions& options) {
  return [graph, initial, batch = std::move(batch), kind, probe_steps, options](double lr) {
    return toy_train(graph, initial, batch, kind, probe_steps, sched::ScheduleSpec::constant(lr), options)
        .loss_trace.back();
  };
}

}  // namespace attikit::nn
