#include "hlscong/lasso.hpp"

#include <algorithm>
#include <cmath>

#include "hlscong/common.hpp"

namespace hlscong {

namespace {

double SoftThreshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

void CheckFinite(const Matrix& x, std::span<const double> y) {
  if (x.rows() != y.size()) throw DataError("lasso: X and y differ in length");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw DataError("lasso: non-finite feature value");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw DataError("lasso: non-finite target value");
  }
}

}  // namespace

double LassoModel::Predict(std::span<const double> x) const {
  double s = intercept;
  for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * x[j];
  return s;
}

double LassoObjective(const Matrix& x, std::span<const double> y,
                      const LassoModel& m) {
  double sse = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double r = y[i] - m.Predict(x.row(i));
    sse += r * r;
  }
  double l1 = 0.0;
  for (double w : m.weights) l1 += std::abs(w);
  return sse / (2.0 * static_cast<double>(x.rows())) + m.alpha * l1;
}

double LassoAlphaMax(const Matrix& x, std::span<const double> y) {
  const std::size_t n = x.rows(), p = x.cols();
  if (n == 0) return 0.0;
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= static_cast<double>(n);
  double best = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
    mean /= static_cast<double>(n);
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += (x(i, j) - mean) * (y[i] - ybar);
    best = std::max(best, std::abs(dot) / static_cast<double>(n));
  }
  return best;
}

LassoModel FitLasso(const Matrix& x, std::span<const double> y,
                    const LassoParams& params, LassoTrace* trace) {
  CheckFinite(x, y);
  if (x.rows() == 0) throw DataError("lasso: no training samples");
  if (!(params.alpha >= 0.0) || !(params.tol > 0.0) || params.max_iter < 0) {
    throw UsageError("lasso: invalid hyperparameters");
  }
  const std::size_t n = x.rows(), p = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  // Centred copy, column-major for the coordinate sweeps.
  std::vector<double> mean(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) mean[j] += x(i, j);
  }
  for (auto& m : mean) m *= inv_n;
  std::vector<double> cols(n * p);
  std::vector<double> sq(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    double* c = cols.data() + j * n;
    for (std::size_t i = 0; i < n; ++i) {
      c[i] = x(i, j) - mean[j];
      sq[j] += c[i] * c[i];
    }
    sq[j] *= inv_n;
  }
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar *= inv_n;
  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - ybar;

  LassoModel m;
  m.alpha = params.alpha;
  m.weights.assign(p, 0.0);

  auto objective = [&] {
    double sse = 0.0;
    for (double r : resid) sse += r * r;
    double l1 = 0.0;
    for (double w : m.weights) l1 += std::abs(w);
    return 0.5 * sse * inv_n + params.alpha * l1;
  };

  int sweep = 0;
  bool converged = false;
  while (sweep < params.max_iter) {
    ++sweep;
    double max_delta = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      if (sq[j] == 0.0) continue;
      const double* c = cols.data() + j * n;
      double rho = 0.0;
      for (std::size_t i = 0; i < n; ++i) rho += c[i] * resid[i];
      rho = rho * inv_n + sq[j] * m.weights[j];
      const double w_new = SoftThreshold(rho, params.alpha) / sq[j];
      const double delta = w_new - m.weights[j];
      if (delta != 0.0) {
        for (std::size_t i = 0; i < n; ++i) resid[i] -= c[i] * delta;
        m.weights[j] = w_new;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (trace) trace->objective.push_back(objective());
    if (max_delta < params.tol) {
      converged = true;
      break;
    }
  }
  m.intercept = ybar;
  for (std::size_t j = 0; j < p; ++j) m.intercept -= m.weights[j] * mean[j];
  if (trace) {
    trace->sweeps = sweep;
    trace->converged = converged;
  }
  return m;
}

}  // namespace hlscong
