#pragma once

// Layer kernels used by the attitude networks.
//
// Tensors are Eigen matrices laid out channels x time: row c is one feature
// channel, column t one time step. Parameters arrive as row-major flat
// buffers matching the stored tensor shapes:
//   conv kernel  [C_out, C_in, K]     dense kernel [out, in]
//   lstm W       [4u, D]  U [4u, u]   b [4u]       gate order i, f, g, o
// Kernels are templated on the accumulation scalar; weights stored as f32
// are evaluated in double.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace attikit::nn {

template <typename Scalar>
using Tensor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMajorMap = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename Scalar>
using VectorMap = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>;

class shape_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Padding { Same, Causal };

enum class Activation { Linear, Sigmoid, Relu, Tanh, LeakyRelu, Elu, Swish, RRelu, Mish };

struct ActivationParams {
  double leak{0.01};
  double elu_alpha{1.0};
  double swish_beta{1.0};
  // RReLU is evaluated deterministically with the midpoint slope.
  double rrelu_lower{1.0 / 8.0};
  double rrelu_upper{1.0 / 3.0};
};

std::string_view activation_name(Activation a);
std::optional<Activation> parse_activation(std::string_view name);

// ---------------------------------------------------------------------------
// Scalar activations

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  using std::exp;
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-x));
  const Scalar e = exp(x);
  return e / (Scalar(1) + e);
}

/// ln(1 + e^x) without overflow or cancellation.
template <typename Scalar>
Scalar softplus(Scalar x) {
  using std::abs;
  using std::exp;
  using std::log1p;
  using std::max;
  return max(x, Scalar(0)) + log1p(exp(-abs(x)));
}

template <typename Scalar>
Scalar mish(Scalar x) {
  using std::tanh;
  return x * tanh(softplus(x));
}

template <typename Scalar>
Scalar activate(Scalar x, Activation a, const ActivationParams& p = {}) {
  using std::exp;
  using std::max;
  using std::min;
  using std::tanh;
  switch (a) {
    case Activation::Linear: return x;
    case Activation::Sigmoid: return sigmoid(x);
    case Activation::Relu: return max(x, Scalar(0));
    case Activation::Tanh: return tanh(x);
    case Activation::LeakyRelu: return max(x, Scalar(0)) + Scalar(p.leak) * min(x, Scalar(0));
    case Activation::Elu: return x >= Scalar(0) ? x : Scalar(p.elu_alpha) * (exp(x) - Scalar(1));
    case Activation::Swish: return x * sigmoid(Scalar(p.swish_beta) * x);
    case Activation::RRelu: return x >= Scalar(0) ? x : Scalar(0.5 * (p.rrelu_lower + p.rrelu_upper)) * x;
    case Activation::Mish: return mish(x);
  }
  return x;
}

template <typename Scalar>
Tensor<Scalar> activation(const Tensor<Scalar>& x, Activation a, const ActivationParams& p = {}) {
  return x.unaryExpr([a, &p](Scalar v) { return activate(v, a, p); });
}

// ---------------------------------------------------------------------------
// Convolution and pooling

/// Both paddings keep T before striding.
inline Eigen::Index conv1d_output_length(Eigen::Index t, int stride) { return (t + stride - 1) / stride; }

/// Cross-correlation y[o, t] = b[o] + sum_{c,k} w[o, c, k] * x_pad[c, t*stride + k].
/// Causal pads K-1 zeros on the left; same pads floor((K-1)/2) left and the rest right.
template <typename Scalar>
Tensor<Scalar> conv1d_forward(const Tensor<Scalar>& x, std::span<const Scalar> kernel, std::span<const Scalar> bias,
                              int out_channels, int kernel_size, int stride = 1, Padding padding = Padding::Causal) {
  const Eigen::Index c_in = x.rows();
  const Eigen::Index t_in = x.cols();
  if (kernel_size < 1 || stride < 1 || out_channels < 1) throw shape_error("conv1d: non-positive size");
  if (static_cast<Eigen::Index>(kernel.size()) != out_channels * c_in * kernel_size ||
      static_cast<Eigen::Index>(bias.size()) != out_channels) {
    throw shape_error("conv1d: weight shape does not match input channels");
  }
  const int pad_left = padding == Padding::Causal ? kernel_size - 1 : (kernel_size - 1) / 2;
  const Eigen::Index t_out = conv1d_output_length(t_in, stride);

  // im2col: rows (c, k), columns output steps.
  Tensor<Scalar> patches = Tensor<Scalar>::Zero(c_in * kernel_size, t_out);
  for (Eigen::Index t = 0; t < t_out; ++t) {
    for (int k = 0; k < kernel_size; ++k) {
      const Eigen::Index src = t * stride + k - pad_left;
      if (src < 0 || src >= t_in) continue;
      for (Eigen::Index c = 0; c < c_in; ++c) patches(c * kernel_size + k, t) = x(c, src);
    }
  }
  const RowMajorMap<Scalar> w(kernel.data(), out_channels, c_in * kernel_size);
  const VectorMap<Scalar> b(bias.data(), out_channels);
  Tensor<Scalar> y = w * patches;
  y.colwise() += b;
  return y;
}

/// Non-overlapping max pooling, stride = size, remainder dropped.
template <typename Scalar>
Tensor<Scalar> maxpool1d(const Tensor<Scalar>& x, int size) {
  if (size < 1) throw shape_error("maxpool1d: size must be >= 1");
  const Eigen::Index t_out = x.cols() / size;
  Tensor<Scalar> y(x.rows(), t_out);
  for (Eigen::Index t = 0; t < t_out; ++t) {
    y.col(t) = x.middleCols(t * size, size).rowwise().maxCoeff();
  }
  return y;
}

/// Time-distributed dense layer: y[:, t] = W x[:, t] + b.
template <typename Scalar>
Tensor<Scalar> dense_forward(const Tensor<Scalar>& x, std::span<const Scalar> kernel, std::span<const Scalar> bias,
                             int units) {
  if (static_cast<Eigen::Index>(kernel.size()) != units * x.rows() || static_cast<int>(bias.size()) != units) {
    throw shape_error("dense: weight shape does not match input width");
  }
  const RowMajorMap<Scalar> w(kernel.data(), units, x.rows());
  Tensor<Scalar> y = w * x;
  y.colwise() += VectorMap<Scalar>(bias.data(), units);
  return y;
}

// ---------------------------------------------------------------------------
// Recurrent layers

template <typename Scalar>
struct LstmWeights {
  std::span<const Scalar> input;      // W [4u, D]
  std::span<const Scalar> recurrent;  // U [4u, u]
  std::span<const Scalar> bias;       // b [4u]
};

/// i = sigma(W_i x + U_i h + b_i), f, o likewise, g = tanh(W_g x + U_g h + b_g),
/// c = f*c + i*g, h = o*tanh(c); zero initial state; returns every h (u x T).
template <typename Scalar>
Tensor<Scalar> lstm_forward(const Tensor<Scalar>& x, const LstmWeights<Scalar>& w, int units) {
  using std::tanh;
  const Eigen::Index d = x.rows();
  if (static_cast<Eigen::Index>(w.input.size()) != 4 * units * d ||
      static_cast<Eigen::Index>(w.recurrent.size()) != 4 * units * units ||
      static_cast<Eigen::Index>(w.bias.size()) != 4 * units) {
    throw shape_error("lstm: weight shape does not match input width");
  }
  const RowMajorMap<Scalar> wx(w.input.data(), 4 * units, d);
  const RowMajorMap<Scalar> wh(w.recurrent.data(), 4 * units, units);
  const VectorMap<Scalar> b(w.bias.data(), 4 * units);

  Tensor<Scalar> pre = wx * x;
  pre.colwise() += b;
  Tensor<Scalar> out(units, x.cols());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> h = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(units);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(units);
  for (Eigen::Index t = 0; t < x.cols(); ++t) {
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z = pre.col(t) + wh * h;
    for (int j = 0; j < units; ++j) {
      const Scalar i = sigmoid(z[j]);
      const Scalar f = sigmoid(z[units + j]);
      const Scalar g = tanh(z[2 * units + j]);
      const Scalar o = sigmoid(z[3 * units + j]);
      c[j] = f * c[j] + i * g;
      h[j] = o * tanh(c[j]);
    }
    out.col(t) = h;
  }
  return out;
}

/// [forward h_t ; backward h_t] per step, the backward pass run on the time-reversed input.
template <typename Scalar>
Tensor<Scalar> bilstm_forward(const Tensor<Scalar>& x, const LstmWeights<Scalar>& fwd, const LstmWeights<Scalar>& bwd,
                              int units) {
  const Tensor<Scalar> reversed = x.rowwise().reverse();
  const Tensor<Scalar> back = lstm_forward(reversed, bwd, units).rowwise().reverse();
  Tensor<Scalar> out(2 * units, x.cols());
  out.topRows(units) = lstm_forward(x, fwd, units);
  out.bottomRows(units) = back;
  return out;
}

}  // namespace attikit::nn
