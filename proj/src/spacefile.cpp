#include "gri/spacefile.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace gri {

using nlohmann::ordered_json;

SpaceFile space_file_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Syntax, std::string("invalid JSON: ") + e.what());
  }
  SpaceFile sf;
  try {
    sf.dimension = j.at("dimension").get<int>();
    sf.coords = j.at("coords").get<std::vector<std::string>>();
    sf.metric = j.at("metric").get<std::vector<std::vector<std::string>>>();
    if (j.contains("psi") && !j["psi"].is_null())
      sf.psi = j["psi"].get<std::string>();
    if (j.contains("points"))
      for (const auto& row : j["points"]) {
        Point p;
        p.x = row.get<std::vector<double>>();
        sf.points.push_back(std::move(p));
      }
    if (j.contains("sampler")) {
      const auto& s = j["sampler"];
      sf.has_sampler = true;
      if (s.contains("count")) sf.sampler_count = s["count"].get<int>();
      if (s.contains("seed")) sf.sampler_seed = s["seed"].get<uint64_t>();
      if (s.contains("box")) {
        auto box = s["box"].get<std::vector<double>>();
        if (box.size() != 2)
          throw Error(ErrorCode::Validation, "sampler box needs [lo, hi]");
        sf.box_lo = box[0];
        sf.box_hi = box[1];
      }
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Validation,
                std::string("invalid space file: ") + e.what());
  }
  if (static_cast<int>(sf.coords.size()) != sf.dimension)
    throw Error(ErrorCode::Validation, "coords count != dimension");
  if (static_cast<int>(sf.metric.size()) != sf.dimension)
    throw Error(ErrorCode::Validation, "metric row count != dimension");
  for (const auto& row : sf.metric)
    if (static_cast<int>(row.size()) != sf.dimension)
      throw Error(ErrorCode::Validation, "metric column count != dimension");
  for (const Point& p : sf.points)
    if (static_cast<int>(p.x.size()) != sf.dimension)
      throw Error(ErrorCode::Validation, "point arity != dimension");
  return sf;
}

std::string space_file_to_json(const SpaceFile& sf) {
  ordered_json j;
  j["dimension"] = sf.dimension;
  j["coords"] = sf.coords;
  j["metric"] = sf.metric;
  if (!sf.psi.empty()) j["psi"] = sf.psi;
  if (!sf.points.empty()) {
    j["points"] = ordered_json::array();
    for (const Point& p : sf.points) j["points"].push_back(p.x);
  }
  if (sf.has_sampler)
    j["sampler"] = {{"count", sf.sampler_count},
                    {"seed", sf.sampler_seed},
                    {"box", {sf.box_lo, sf.box_hi}}};
  return j.dump(2) + "\n";
}

SpaceFile load_space_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::Validation, "cannot open space file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return space_file_from_json(buf.str());
}

void save_space_file(const SpaceFile& sf, const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::Validation, "cannot write space file: " + path);
  out << space_file_to_json(sf);
}

MetricField to_metric(ExprPool& pool, const SpaceFile& sf) {
  return MetricField::from_strings(pool, sf.coords, sf.metric, sf.psi);
}

std::vector<Point> resolve_points(const SpaceFile& sf) {
  if (!sf.points.empty()) return sf.points;
  if (!sf.has_sampler)
    throw Error(ErrorCode::Validation,
                "space file provides neither points nor a sampler");
  std::mt19937_64 rng(sf.sampler_seed);
  std::uniform_real_distribution<double> u(sf.box_lo, sf.box_hi);
  std::vector<Point> pts(sf.sampler_count);
  for (Point& p : pts) {
    p.x.resize(sf.dimension);
    for (double& v : p.x) v = u(rng);
  }
  return pts;
}

SpaceFile from_metric(const MetricField& m) {
  SpaceFile sf;
  sf.dimension = m.dim;
  sf.coords = m.coords;
  sf.metric.assign(m.dim, std::vector<std::string>(m.dim));
  for (int i = 0; i < m.dim; ++i)
    for (int j = 0; j < m.dim; ++j)
      sf.metric[i][j] = m.pool->to_string(m.G.at({i, j}), m.coords);
  if (m.psi.valid()) sf.psi = m.pool->to_string(m.psi, m.coords);
  return sf;
}

}  // namespace gri
