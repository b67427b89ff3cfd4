#pragma once

// L1-regularised least squares by cyclic coordinate descent.
//
// Minimises (1/2n) * ||y - b - Xw||^2 + alpha * ||w||_1. Columns are
// centred internally, so the intercept is never penalised.

#include <span>
#include <vector>

#include "hlscong/matrix.hpp"

namespace hlscong {

struct LassoParams {
  double alpha = 1e-3;
  double tol = 1e-6;
  int max_iter = 1000;
  bool operator==(const LassoParams&) const = default;
};

struct LassoModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double alpha = 0.0;

  double Predict(std::span<const double> x) const;
  bool operator==(const LassoModel&) const = default;
};

struct LassoTrace {
  std::vector<double> objective;  // after each full sweep
  int sweeps = 0;
  bool converged = false;
};

LassoModel FitLasso(const Matrix& x, std::span<const double> y,
                    const LassoParams& params, LassoTrace* trace = nullptr);

// Smallest alpha at which every weight is zero: max_j |x_j' (y - ybar)| / n
// over centred columns.
double LassoAlphaMax(const Matrix& x, std::span<const double> y);

// The objective FitLasso minimises, evaluated for an arbitrary model.
double LassoObjective(const Matrix& x, std::span<const double> y,
                      const LassoModel& m);

}  // namespace hlscong
