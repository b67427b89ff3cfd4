#include "hlscong/stats.hpp"

#include <algorithm>
#include <stdexcept>

namespace hlscong {

namespace {

double SortedMedian(const std::vector<double>& v, std::size_t lo,
                    std::size_t hi) {
  const std::size_t n = hi - lo;
  const std::size_t mid = lo + n / 2;
  if (n % 2 == 1) return v[mid];
  return (v[mid - 1] + v[mid]) / 2.0;
}

}  // namespace

double Median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  std::sort(values.begin(), values.end());
  return SortedMedian(values, 0, values.size());
}

std::pair<double, double> Quartiles(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("quartiles of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 1) return {values[0], values[0]};
  const std::size_t half = n / 2;
  return {SortedMedian(values, 0, half),
          SortedMedian(values, n - half, n)};
}

}  // namespace hlscong
