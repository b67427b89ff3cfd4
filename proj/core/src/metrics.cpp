#include "hlscong/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hlscong/stats.hpp"

namespace hlscong {

namespace {

void CheckLengths(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size()) {
    throw std::invalid_argument("metric inputs differ in length");
  }
  if (y.empty()) throw std::invalid_argument("metric inputs are empty");
}

}  // namespace

double Mae(std::span<const double> y, std::span<const double> y_hat) {
  CheckLengths(y, y_hat);
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += std::abs(y[i] - y_hat[i]);
  return sum / static_cast<double>(y.size());
}

double MedAe(std::span<const double> y, std::span<const double> y_hat) {
  CheckLengths(y, y_hat);
  std::vector<double> err(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) err[i] = std::abs(y[i] - y_hat[i]);
  return Median(std::move(err));
}

}  // namespace hlscong
