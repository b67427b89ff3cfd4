#pragma once

#include <utility>
#include <vector>

namespace hlscong {

// Median; an even count averages the two central order statistics.
// Requires a non-empty input.
double Median(std::vector<double> values);

// First and third quartile as the medians of the lower and upper halves
// (the middle element is excluded from both halves for odd counts).
std::pair<double, double> Quartiles(std::vector<double> values);

}  // namespace hlscong
