#pragma once

// Synthetic designs and a toy place-and-route oracle.
//
// GenerateDesign emits a random but structured HLS export: per-function
// dataflow DAGs, fully unrolled loops whose replicas share a source line and
// replica group, optional resource sharing, ports and globals. PlaceAndRoute
// fills tiles along a centre-out spiral in schedule order (one slot per RTL
// unit, so shared operations land together), routes each edge as an L
// (horizontal leg along the source row, then vertical leg along the
// destination column) and reports per-tile demand as congestion labels.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hlscong/bundle.hpp"

namespace hlscong {

struct GenConfig {
  std::string name = "design";
  int num_functions = 3;
  int min_ops_per_function = 40;
  int max_ops_per_function = 80;
  // One fully unrolled loop per entry; the value is its replica count.
  std::vector<int> unroll_replicas = {16, 32};
  int loop_body_ops = 4;
  double sharing_probability = 0.15;
  double edge_density = 0.3;
  // Candidate operation bitwidths, drawn uniformly.
  std::vector<int> bitwidths = {8, 16, 32, 32};
  // 0 x 0 sizes the square grid so placement units fill
  // target_utilization of the slots.
  int grid_width = 0;
  int grid_height = 0;
  double target_utilization = 0.95;
  int vertical_capacity = 640;
  int horizontal_capacity = 640;
  int ops_per_tile = 20;
  double perimeter_capacity_scale = 0.7;  // in (0, 1]
  std::uint64_t seed = 1;
};

// Throws UsageError for an infeasible configuration.
void ValidateGenConfig(const GenConfig& cfg);

DesignBundle GenerateDesign(const GenConfig& cfg);

class TileGrid {
 public:
  TileGrid(int width, int height, int vertical_capacity,
           int horizontal_capacity, int ops_per_tile);

  int width() const { return width_; }
  int height() const { return height_; }
  int vertical_capacity() const { return vcap_; }
  int horizontal_capacity() const { return hcap_; }
  int ops_per_tile() const { return ops_per_tile_; }

  double vertical_demand(int x, int y) const { return vdem_[Index(x, y)]; }
  double horizontal_demand(int x, int y) const { return hdem_[Index(x, y)]; }
  double vertical_pct(int x, int y) const {
    return 100.0 * vertical_demand(x, y) / (vcap_ * Derate(x, y));
  }
  double horizontal_pct(int x, int y) const {
    return 100.0 * horizontal_demand(x, y) / (hcap_ * Derate(x, y));
  }

  // Fraction of the nominal capacity left on perimeter tiles (the I/O ring
  // takes the rest). 1 by default.
  double perimeter_scale() const { return perimeter_scale_; }
  void set_perimeter_scale(double s);

  // L-shaped route: horizontal leg on row y0 from x0 to x1, then vertical
  // leg on column x1 from y0 to y1. A leg only exists when its coordinates
  // differ; it covers both end tiles.
  void RouteL(int x0, int y0, int x1, int y1, double wires);

  double total_vertical_demand() const;
  double total_horizontal_demand() const;

 private:
  std::size_t Index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  double Derate(int x, int y) const {
    const bool edge = x == 0 || y == 0 || x == width_ - 1 || y == height_ - 1;
    return edge ? perimeter_scale_ : 1.0;
  }

  int width_, height_, vcap_, hcap_, ops_per_tile_;
  double perimeter_scale_ = 1.0;
  std::vector<double> vdem_, hdem_;
};

struct Placement {
  std::vector<int> x;  // per bundle operation
  std::vector<int> y;
};

// Tiles ordered by distance from the grid centre, then angle.
std::vector<std::pair<int, int>> SpiralOrder(int width, int height);

// One per RTL instance plus one per unbound operation.
int CountPlacementUnits(const DesignBundle& bundle);

// Throws DataError when the grid cannot hold every placement unit.
Placement PlaceDesign(const DesignBundle& bundle, const TileGrid& grid);

// Places, routes into `grid` and returns one label per operation.
std::vector<LabelRecord> PlaceAndRoute(const DesignBundle& bundle,
                                       TileGrid& grid);

// Replica group of every operation, empty when not replicated. Unrolled
// copies are named `<source op>#r<k>`; the group is the `<source op>` part.
std::vector<std::string> ReplicaGroups(const DesignBundle& bundle);

// Grid used for `bundle` under `cfg` (explicit size, or the auto size).
std::pair<int, int> GridFor(const DesignBundle& bundle, const GenConfig& cfg);

struct SynthDesign {
  DesignBundle bundle;
  std::vector<LabelRecord> labels;
  int grid_width = 0;
  int grid_height = 0;
};

// GenerateDesign followed by PlaceAndRoute on the configured grid.
SynthDesign SynthesizeDesign(const GenConfig& cfg);

}  // namespace hlscong
