#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hlscong {

// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorKind { kUsage, kData, kTraining };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Malformed or inconsistent input (bundles, labels, datasets, models).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

// Numerical failure while fitting a model.
class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& what)
      : Error(ErrorKind::kTraining, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what)
      : Error(ErrorKind::kUsage, what) {}
};

enum class Resource : int { kDsp = 0, kBram = 1, kLut = 2, kFf = 3 };

inline constexpr std::array<Resource, 4> kAllResources = {
    Resource::kDsp, Resource::kBram, Resource::kLut, Resource::kFf};

// Keys used in files and feature names.
inline constexpr std::array<std::string_view, 4> kResourceKeys = {"DSP", "BRAM",
                                                                  "LUT", "FF"};

// Usage of the four FPGA resource kinds, indexed by Resource.
struct ResourceUsage {
  std::array<std::int64_t, 4> units{};

  std::int64_t& operator[](Resource r) { return units[static_cast<int>(r)]; }
  std::int64_t operator[](Resource r) const {
    return units[static_cast<int>(r)];
  }
  ResourceUsage& operator+=(const ResourceUsage& o) {
    for (int i = 0; i < 4; ++i) units[i] += o.units[i];
    return *this;
  }
  bool operator==(const ResourceUsage&) const = default;
};

// 64-bit FNV-1a; used for schema fingerprints.
inline std::uint64_t Fnv1a64(std::string_view data,
                             std::uint64_t seed = 14695981039346656037ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string HexU64(std::uint64_t v);

}  // namespace hlscong
