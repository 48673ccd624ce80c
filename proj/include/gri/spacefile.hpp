#ifndef GRI_SPACEFILE_HPP
#define GRI_SPACEFILE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gri/tensor.hpp"

namespace gri {

/// On-disk description of a space: expression strings plus evaluation
/// points or a seeded sampler.
struct SpaceFile {
  int dimension = 0;
  std::vector<std::string> coords;
  std::vector<std::vector<std::string>> metric;
  std::string psi;  // empty when absent
  std::vector<Point> points;
  bool has_sampler = false;
  int sampler_count = 10;
  uint64_t sampler_seed = 0;
  double box_lo = -0.5, box_hi = 0.5;
};

SpaceFile space_file_from_json(const std::string& text);
std::string space_file_to_json(const SpaceFile& sf);
SpaceFile load_space_file(const std::string& path);
void save_space_file(const SpaceFile& sf, const std::string& path);

/// Parse the expression strings into a metric over the declared coordinates.
MetricField to_metric(ExprPool& pool, const SpaceFile& sf);

/// Explicit points if present, otherwise the seeded sampler; error when
/// neither is available.
std::vector<Point> resolve_points(const SpaceFile& sf);

/// Serialize a metric back to expression strings (round-trips through the
/// parser to interned-equal nodes).
SpaceFile from_metric(const MetricField& m);

}  // namespace gri

#endif
