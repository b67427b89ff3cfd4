#pragma once

#include <span>

namespace hlscong {

// Mean absolute error. Throws std::invalid_argument on length mismatch or
// empty input.
double Mae(std::span<const double> y, std::span<const double> y_hat);

// Median absolute error; an even count averages the two central values.
double MedAe(std::span<const double> y, std::span<const double> y_hat);

}  // namespace hlscong
