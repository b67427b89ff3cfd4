#include "hlscong/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hlscong/common.hpp"
#include "hlscong/rng.hpp"

namespace hlscong {

namespace {

// Per-sample activations, kept for the backward pass.
struct Activations {
  std::vector<std::vector<double>> a;  // a[0] = input, a[L] = output
};

void ForwardInto(const MlpModel& m, std::span<const double> x, Activations& act) {
  const std::size_t layers = m.weights.size();
  act.a.resize(layers + 1);
  act.a[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& w = m.weights[l];
    const auto& in = act.a[l];
    auto& out = act.a[l + 1];
    out.assign(w.rows(), 0.0);
    for (std::size_t o = 0; o < w.rows(); ++o) {
      auto row = w.row(o);
      double s = m.biases[l][o];
      for (std::size_t i = 0; i < row.size(); ++i) s += row[i] * in[i];
      out[o] = (l + 1 < layers) ? std::max(0.0, s) : s;
    }
  }
}

// Accumulates d(loss)/d(params) for one sample into grad_w/grad_b given
// d(loss)/d(output).
void Backward(const MlpModel& m, const Activations& act, double dout,
              std::vector<Matrix>& grad_w,
              std::vector<std::vector<double>>& grad_b,
              std::vector<double>& delta, std::vector<double>& prev) {
  const std::size_t layers = m.weights.size();
  delta.assign(1, dout);
  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& w = m.weights[l];
    const auto& in = act.a[l];
    for (std::size_t o = 0; o < w.rows(); ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      grad_b[l][o] += d;
      auto g = grad_w[l].row(o);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += d * in[i];
    }
    if (l == 0) break;
    prev.assign(w.cols(), 0.0);
    for (std::size_t o = 0; o < w.rows(); ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      auto row = w.row(o);
      for (std::size_t i = 0; i < row.size(); ++i) prev[i] += row[i] * d;
    }
    // ReLU derivative of the layer feeding `l`.
    for (std::size_t i = 0; i < prev.size(); ++i) {
      if (in[i] <= 0.0) prev[i] = 0.0;
    }
    delta.swap(prev);
  }
}

void CheckInputs(const Matrix& x, std::span<const double> y) {
  if (x.rows() != y.size()) throw DataError("mlp: X and y differ in length");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw DataError("mlp: non-finite feature value");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw DataError("mlp: non-finite target value");
  }
}

}  // namespace

double MlpModel::Forward(std::span<const double> x) const {
  Activations act;
  ForwardInto(*this, x, act);
  return act.a.back()[0];
}

std::size_t MlpModel::NumParameters() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += weights[l].data().size() + biases[l].size();
  }
  return n;
}

std::vector<double> MlpModel::Parameters() const {
  std::vector<double> flat;
  flat.reserve(NumParameters());
  for (std::size_t l = 0; l < weights.size(); ++l) {
    flat.insert(flat.end(), weights[l].data().begin(), weights[l].data().end());
    flat.insert(flat.end(), biases[l].begin(), biases[l].end());
  }
  return flat;
}

void MlpModel::SetParameters(std::span<const double> flat) {
  if (flat.size() != NumParameters()) {
    throw std::invalid_argument("mlp: parameter count mismatch");
  }
  std::size_t k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (auto& v : weights[l].data()) v = flat[k++];
    for (auto& v : biases[l]) v = flat[k++];
  }
}

MlpModel InitMlp(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw UsageError("mlp: need input and output layers");
  for (int s : layer_sizes) {
    if (s < 1) throw UsageError("mlp: layer sizes must be positive");
  }
  MlpModel m;
  m.layer_sizes = layer_sizes;
  m.seed = seed;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const auto in = static_cast<std::size_t>(layer_sizes[l]);
    const auto out = static_cast<std::size_t>(layer_sizes[l + 1]);
    Matrix w(out, in);
    const double scale = std::sqrt(2.0 / static_cast<double>(in));
    for (auto& v : w.data()) v = scale * rng.Normal();
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(out, 0.0);
  }
  return m;
}

LossAndGradient MlpLossAndGradient(const MlpModel& m, const Matrix& x,
                                   std::span<const double> y_internal) {
  LossAndGradient out;
  std::vector<Matrix> gw;
  std::vector<std::vector<double>> gb;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    gw.emplace_back(m.weights[l].rows(), m.weights[l].cols());
    gb.emplace_back(m.biases[l].size(), 0.0);
  }
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  Activations act;
  std::vector<double> delta, prev;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    ForwardInto(m, x.row(i), act);
    const double err = act.a.back()[0] - y_internal[i];
    out.loss += err * err * inv_n;
    Backward(m, act, 2.0 * err * inv_n, gw, gb, delta, prev);
  }
  for (std::size_t l = 0; l < gw.size(); ++l) {
    out.gradient.insert(out.gradient.end(), gw[l].data().begin(), gw[l].data().end());
    out.gradient.insert(out.gradient.end(), gb[l].begin(), gb[l].end());
  }
  return out;
}

MlpModel FitMlp(const Matrix& x, std::span<const double> y,
                const MlpParams& params, std::uint64_t seed) {
  CheckInputs(x, y);
  if (x.rows() == 0) throw DataError("mlp: no training samples");
  if (!(params.learning_rate > 0.0) || params.epochs < 0 ||
      params.batch_size < 1) {
    throw UsageError("mlp: invalid hyperparameters");
  }
  std::vector<int> sizes = {static_cast<int>(x.cols())};
  sizes.insert(sizes.end(), params.hidden.begin(), params.hidden.end());
  sizes.push_back(1);
  MlpModel m = InitMlp(sizes, seed);
  m.params = params;

  const std::size_t n = x.rows();
  m.y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double v : y) var += (v - m.y_mean) * (v - m.y_mean);
  var /= static_cast<double>(n);
  m.y_scale = var > 0.0 ? std::sqrt(var) : 1.0;
  std::vector<double> yz(n);
  for (std::size_t i = 0; i < n; ++i) yz[i] = (y[i] - m.y_mean) / m.y_scale;

  std::vector<Matrix> gw;
  std::vector<std::vector<double>> gb;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    gw.emplace_back(m.weights[l].rows(), m.weights[l].cols());
    gb.emplace_back(m.biases[l].size(), 0.0);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Separate stream so shuffling does not disturb initialisation.
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Activations act;
  std::vector<double> delta, prev;
  const auto batch = static_cast<std::size_t>(params.batch_size);

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    rng.Shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      const double inv_b = 1.0 / static_cast<double>(end - start);
      for (auto& g : gw) std::fill(g.data().begin(), g.data().end(), 0.0);
      for (auto& g : gb) std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        ForwardInto(m, x.row(i), act);
        const double err = act.a.back()[0] - yz[i];
        epoch_loss += err * err;
        Backward(m, act, 2.0 * err * inv_b, gw, gb, delta, prev);
      }
      for (std::size_t l = 0; l < m.weights.size(); ++l) {
        auto& w = m.weights[l].data();
        const auto& g = gw[l].data();
        for (std::size_t k = 0; k < w.size(); ++k) w[k] -= params.learning_rate * g[k];
        for (std::size_t k = 0; k < m.biases[l].size(); ++k) {
          m.biases[l][k] -= params.learning_rate * gb[l][k];
        }
      }
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw TrainingError("mlp diverged: loss became non-finite at epoch " +
                          std::to_string(epoch));
    }
  }
  return m;
}

}  // namespace hlscong
