#include "lstm_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace wortsense::detail {

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

double forward_into(const ModelParams& params, const FeatureMatrix& window, ForwardCache& cache) {
  const auto& cfg = params.config();
  const std::size_t steps = cfg.windowsize;
  const std::size_t nf = cfg.features;
  const std::size_t d = cfg.lstm_dim;
  const std::size_t g4 = 4 * d;
  const double* W = params.lstm_input_weights().data();
  const double* U = params.lstm_recurrent_weights().data();
  const double* b = params.lstm_bias().data();

  cache.gates.resize(steps * g4);
  cache.cells.resize((steps + 1) * d);
  cache.cell_tanh.resize(steps * d);
  cache.hidden.resize((steps + 1) * d);
  std::fill_n(cache.cells.begin(), d, 0.0);
  std::fill_n(cache.hidden.begin(), d, 0.0);

  for (std::size_t t = 0; t < steps; ++t) {
    const double* x = window.row(t).data();
    const double* h_prev = cache.hidden.data() + t * d;
    const double* c_prev = cache.cells.data() + t * d;
    double* z = cache.gates.data() + t * g4;
    for (std::size_t r = 0; r < g4; ++r) {
      double s = b[r];
      const double* wr = W + r * nf;
      for (std::size_t k = 0; k < nf; ++k) s += wr[k] * x[k];
      const double* ur = U + r * d;
      for (std::size_t k = 0; k < d; ++k) s += ur[k] * h_prev[k];
      z[r] = s;
    }
    double* c = cache.cells.data() + (t + 1) * d;
    double* h = cache.hidden.data() + (t + 1) * d;
    double* tc = cache.cell_tanh.data() + t * d;
    for (std::size_t j = 0; j < d; ++j) {
      const double i_gate = sigmoid(z[j]);
      const double f_gate = sigmoid(z[d + j]);
      const double g_gate = std::tanh(z[2 * d + j]);
      const double o_gate = sigmoid(z[3 * d + j]);
      z[j] = i_gate;
      z[d + j] = f_gate;
      z[2 * d + j] = g_gate;
      z[3 * d + j] = o_gate;
      c[j] = f_gate * c_prev[j] + i_gate * g_gate;
      tc[j] = std::tanh(c[j]);
      h[j] = o_gate * tc[j];
    }
  }

  const std::size_t layers = params.dense_layer_count();
  cache.activations.resize(layers);
  const double* input = cache.hidden.data() + steps * d;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto layer = params.dense_layer(l);
    auto& a = cache.activations[l];
    a.resize(layer.out);
    const bool hidden_layer = l + 1 < layers;
    for (std::size_t o = 0; o < layer.out; ++o) {
      double s = layer.bias[o];
      const double* wr = layer.weights.data() + o * layer.in;
      for (std::size_t k = 0; k < layer.in; ++k) s += wr[k] * input[k];
      a[o] = hidden_layer ? std::max(s, 0.0) : s;
    }
    input = a.data();
  }
  return cache.activations.back()[0];
}

void backward_into(const ModelParams& params, const FeatureMatrix& window,
                   const ForwardCache& cache, double output_grad, ModelParams& grads,
                   BackwardScratch& scratch) {
  const auto& cfg = params.config();
  const std::size_t steps = cfg.windowsize;
  const std::size_t nf = cfg.features;
  const std::size_t d = cfg.lstm_dim;
  const std::size_t g4 = 4 * d;
  const std::size_t layers = params.dense_layer_count();

  auto& delta = scratch.delta;
  auto& delta_prev = scratch.delta_prev;
  delta.assign(1, output_grad);
  for (std::size_t l = layers; l-- > 0;) {
    const auto layer = params.dense_layer(l);
    auto gw = grads.block(3 + 2 * l);
    auto gb = grads.block(4 + 2 * l);
    const double* input =
        l == 0 ? cache.hidden.data() + steps * d : cache.activations[l - 1].data();
    delta_prev.assign(layer.in, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double dv = delta[o];
      if (dv == 0.0) continue;
      gb[o] += dv;
      double* gwr = gw.data() + o * layer.in;
      const double* wr = layer.weights.data() + o * layer.in;
      for (std::size_t k = 0; k < layer.in; ++k) {
        gwr[k] += dv * input[k];
        delta_prev[k] += wr[k] * dv;
      }
    }
    if (l > 0) {
      // ReLU derivative of the layer below
      for (std::size_t k = 0; k < layer.in; ++k) {
        if (!(input[k] > 0.0)) delta_prev[k] = 0.0;
      }
    }
    std::swap(delta, delta_prev);
  }

  auto& dh = scratch.dh;
  auto& dh_prev = scratch.dh_prev;
  auto& dc = scratch.dc;
  auto& dz = scratch.dz;
  dh.assign(delta.begin(), delta.end());
  dc.assign(d, 0.0);
  dz.resize(g4);
  double* gW = grads.block(0).data();
  double* gU = grads.block(1).data();
  double* gb = grads.block(2).data();
  const double* U = params.lstm_recurrent_weights().data();

  for (std::size_t t = steps; t-- > 0;) {
    const double* gate = cache.gates.data() + t * g4;
    const double* tc = cache.cell_tanh.data() + t * d;
    const double* c_prev = cache.cells.data() + t * d;
    const double* h_prev = cache.hidden.data() + t * d;
    const double* x = window.row(t).data();
    for (std::size_t j = 0; j < d; ++j) {
      const double i_gate = gate[j];
      const double f_gate = gate[d + j];
      const double g_gate = gate[2 * d + j];
      const double o_gate = gate[3 * d + j];
      const double dcell = dc[j] + dh[j] * o_gate * (1.0 - tc[j] * tc[j]);
      dz[j] = dcell * g_gate * i_gate * (1.0 - i_gate);
      dz[d + j] = dcell * c_prev[j] * f_gate * (1.0 - f_gate);
      dz[2 * d + j] = dcell * i_gate * (1.0 - g_gate * g_gate);
      dz[3 * d + j] = dh[j] * tc[j] * o_gate * (1.0 - o_gate);
      dc[j] = dcell * f_gate;
    }
    dh_prev.assign(d, 0.0);
    for (std::size_t r = 0; r < g4; ++r) {
      const double dv = dz[r];
      gb[r] += dv;
      double* gwr = gW + r * nf;
      for (std::size_t k = 0; k < nf; ++k) gwr[k] += dv * x[k];
      double* gur = gU + r * d;
      const double* ur = U + r * d;
      for (std::size_t k = 0; k < d; ++k) {
        gur[k] += dv * h_prev[k];
        dh_prev[k] += ur[k] * dv;
      }
    }
    std::swap(dh, dh_prev);
  }
}

GradientAccumulator::GradientAccumulator(const ModelConfig& config) {
  chunks_.reserve(kChunks);
  for (std::size_t i = 0; i < kChunks; ++i) chunks_.push_back({ModelParams(config), {}, {}, 0.0});
}

double GradientAccumulator::accumulate(const ModelParams& params,
                                       std::span<const DataFrameWindow> windows,
                                       std::span<const std::size_t> indices, std::size_t threads,
                                       ModelParams& grads) {
  const std::size_t n = indices.size();
  const std::size_t per_chunk = (n + kChunks - 1) / kChunks;

  auto run_chunk = [&](std::size_t c) {
    auto& chunk = chunks_[c];
    chunk.grads.set_zero();
    chunk.sse = 0.0;
    const std::size_t begin = std::min(n, c * per_chunk);
    const std::size_t end = std::min(n, begin + per_chunk);
    for (std::size_t k = begin; k < end; ++k) {
      const auto& w = windows[indices[k]];
      const double err = forward_into(params, w.features, chunk.cache) - w.target;
      chunk.sse += err * err;
      backward_into(params, w.features, chunk.cache, 2.0 * err, chunk.grads, chunk.scratch);
    }
  };

  threads = std::clamp<std::size_t>(threads, 1, kChunks);
  if (threads == 1) {
    for (std::size_t c = 0; c < kChunks; ++c) run_chunk(c);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t c = t; c < kChunks; c += threads) run_chunk(c);
      });
    }
  }

  grads.set_zero();
  auto out = grads.values();
  double sse = 0.0;
  for (const auto& chunk : chunks_) {
    sse += chunk.sse;
    const auto g = chunk.grads.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += g[i];
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (auto& v : out) v *= inv;
  return sse * inv;
}

}  // namespace wortsense::detail
