#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pushpred/rng.hpp"

namespace pushpred {

// One fully connected layer; weights are row-major (out_dim x in_dim).
struct LayerParams {
  int in_dim = 0;
  int out_dim = 0;
  std::vector<double> w;
  std::vector<double> b;

  static LayerParams zeros(int in_dim, int out_dim) {
    LayerParams l;
    l.in_dim = in_dim;
    l.out_dim = out_dim;
    l.w.assign(static_cast<std::size_t>(in_dim) * out_dim, 0.0);
    l.b.assign(out_dim, 0.0);
    return l;
  }
};

// Feedforward network: ReLU on every layer except the last, which stays
// linear so outputs are sign-unrestricted.
struct MlpParams {
  std::vector<LayerParams> layers;

  int input_dim() const { return layers.empty() ? 0 : layers.front().in_dim; }
  int output_dim() const {
    return layers.empty() ? 0 : layers.back().out_dim;
  }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
  }

  static MlpParams zeros(const std::vector<int>& dims) {
    if (dims.size() < 2) {
      throw std::invalid_argument("MlpParams: need at least two dims");
    }
    MlpParams p;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
      p.layers.push_back(LayerParams::zeros(dims[i], dims[i + 1]));
    }
    return p;
  }
};

// layer dims of the contact-prediction network: (p_r^o corrected, u_r^o) ->
// (c, u_c), three hidden ReLU layers of 16 units
inline std::vector<int> combined_mlp_dims() { return {4, 16, 16, 16, 4}; }

// pure-NN baseline: (p_r^o, u_r^o) -> (dp_o, dw_o), in normalized space
inline std::vector<int> baseline_mlp_dims() { return {4, 16, 16, 16, 3}; }

// Glorot-style uniform init, biases zero, deterministic per seed.
inline MlpParams mlp_init(const std::vector<int>& dims, std::uint64_t seed) {
  MlpParams p = MlpParams::zeros(dims);
  Rng rng(seed);
  for (auto& l : p.layers) {
    const double a = std::sqrt(6.0 / (l.in_dim + l.out_dim));
    for (auto& w : l.w) w = rng.uniform(-a, a);
  }
  return p;
}

// Cached intermediates of one forward pass: the input fed to each layer and
// each layer's pre-activation.
struct MlpTape {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> preact;
};

inline std::vector<double> mlp_forward(const MlpParams& params,
                                       std::span<const double> input,
                                       MlpTape* tape = nullptr) {
  if (static_cast<int>(input.size()) != params.input_dim()) {
    throw std::invalid_argument("mlp_forward: input size mismatch");
  }
  std::vector<double> x(input.begin(), input.end());
  if (tape) {
    tape->inputs.clear();
    tape->preact.clear();
  }
  const std::size_t last = params.layers.size() - 1;
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    const auto& l = params.layers[li];
    std::vector<double> z(l.out_dim);
    for (int i = 0; i < l.out_dim; ++i) {
      double acc = l.b[i];
      const double* row = &l.w[static_cast<std::size_t>(i) * l.in_dim];
      for (int j = 0; j < l.in_dim; ++j) acc += row[j] * x[j];
      z[i] = acc;
    }
    if (tape) {
      tape->inputs.push_back(std::move(x));
      tape->preact.push_back(z);
    }
    if (li != last) {
      for (auto& v : z) v = v > 0.0 ? v : 0.0;  // ReLU; derivative at 0 is 0
    }
    x = std::move(z);
  }
  return x;
}

struct MlpBackwardResult {
  MlpParams param_grads;
  std::vector<double> input_grad;
};

// Exact reverse-mode gradients of output_grad . output with respect to all
// parameters and the input. The tape must come from a matching forward pass.
inline MlpBackwardResult mlp_backward(const MlpParams& params,
                                      const MlpTape& tape,
                                      std::span<const double> output_grad) {
  if (tape.inputs.size() != params.layers.size()) {
    throw std::invalid_argument("mlp_backward: tape/params layer mismatch");
  }
  if (static_cast<int>(output_grad.size()) != params.output_dim()) {
    throw std::invalid_argument("mlp_backward: output_grad size mismatch");
  }
  MlpBackwardResult out;
  out.param_grads.layers.reserve(params.layers.size());
  for (const auto& l : params.layers) {
    out.param_grads.layers.push_back(LayerParams::zeros(l.in_dim, l.out_dim));
  }

  std::vector<double> delta(output_grad.begin(), output_grad.end());
  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const auto& l = params.layers[li];
    auto& g = out.param_grads.layers[li];
    const auto& x = tape.inputs[li];
    if (li != params.layers.size() - 1) {
      // gate by the ReLU mask of this layer's pre-activation
      const auto& z = tape.preact[li];
      for (int i = 0; i < l.out_dim; ++i) {
        if (!(z[i] > 0.0)) delta[i] = 0.0;
      }
    }
    std::vector<double> prev(l.in_dim, 0.0);
    for (int i = 0; i < l.out_dim; ++i) {
      g.b[i] += delta[i];
      const double* row = &l.w[static_cast<std::size_t>(i) * l.in_dim];
      double* grow = &g.w[static_cast<std::size_t>(i) * l.in_dim];
      for (int j = 0; j < l.in_dim; ++j) {
        grow[j] += delta[i] * x[j];
        prev[j] += delta[i] * row[j];
      }
    }
    delta = std::move(prev);
  }
  out.input_grad = std::move(delta);
  return out;
}

// Flat views used by the optimizers; ordering is layer-major, weights then
// biases within a layer.
inline std::vector<double> flatten(const MlpParams& p) {
  std::vector<double> out;
  out.reserve(p.param_count());
  for (const auto& l : p.layers) {
    out.insert(out.end(), l.w.begin(), l.w.end());
    out.insert(out.end(), l.b.begin(), l.b.end());
  }
  return out;
}

inline void unflatten(std::span<const double> flat, MlpParams& p) {
  if (flat.size() != p.param_count()) {
    throw std::invalid_argument("unflatten: size mismatch");
  }
  std::size_t k = 0;
  for (auto& l : p.layers) {
    for (auto& w : l.w) w = flat[k++];
    for (auto& b : l.b) b = flat[k++];
  }
}

inline void accumulate(MlpParams& acc, const MlpParams& grads,
                       double scale = 1.0) {
  for (std::size_t li = 0; li < acc.layers.size(); ++li) {
    auto& a = acc.layers[li];
    const auto& g = grads.layers[li];
    for (std::size_t i = 0; i < a.w.size(); ++i) a.w[i] += scale * g.w[i];
    for (std::size_t i = 0; i < a.b.size(); ++i) a.b[i] += scale * g.b[i];
  }
}

}  // namespace pushpred
