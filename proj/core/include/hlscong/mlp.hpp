#pragma once

// Fully connected regressor: ReLU hidden layers, identity output, trained
// by mini-batch SGD on mean squared error. The target is z-scored
// internally and mapped back on prediction.

#include <cstdint>
#include <span>
#include <vector>

#include "hlscong/matrix.hpp"

namespace hlscong {

struct MlpParams {
  std::vector<int> hidden = {64};
  double learning_rate = 1e-2;
  int epochs = 200;
  int batch_size = 32;
  bool operator==(const MlpParams&) const = default;
};

struct MlpModel {
  std::vector<int> layer_sizes;  // input, hidden..., 1
  std::vector<Matrix> weights;   // weights[l] is (out x in)
  std::vector<std::vector<double>> biases;
  double y_mean = 0.0;
  double y_scale = 1.0;
  MlpParams params;
  std::uint64_t seed = 0;

  // Output in the model's internal (z-scored) target units.
  double Forward(std::span<const double> x) const;
  double Predict(std::span<const double> x) const {
    return y_mean + y_scale * Forward(x);
  }

  std::size_t NumParameters() const;
  // Flattened as weights then bias of layer 0, layer 1, ...
  std::vector<double> Parameters() const;
  void SetParameters(std::span<const double> flat);

  bool operator==(const MlpModel&) const = default;
};

// Seeded He initialisation for the given layer sizes.
MlpModel InitMlp(const std::vector<int>& layer_sizes, std::uint64_t seed);

struct LossAndGradient {
  double loss = 0.0;  // mean over samples of (forward - y)^2
  std::vector<double> gradient;  // same layout as Parameters()
};

// Loss and backpropagated gradient against targets given in the model's
// internal units.
LossAndGradient MlpLossAndGradient(const MlpModel& m, const Matrix& x,
                                   std::span<const double> y_internal);

// Throws TrainingError naming the epoch if the loss becomes non-finite.
MlpModel FitMlp(const Matrix& x, std::span<const double> y,
                const MlpParams& params, std::uint64_t seed);

}  // namespace hlscong
