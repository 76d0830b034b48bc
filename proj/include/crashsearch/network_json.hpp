#ifndef CRASHSEARCH_NETWORK_JSON_HPP
#define CRASHSEARCH_NETWORK_JSON_HPP

#include <algorithm>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "crashsearch/network.hpp"

namespace crashsearch {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key,
                                     const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError("missing field " + path + "." + key);
  return *it;
}

inline double require_number(const nlohmann::json& j, const char* key,
                             const std::string& path) {
  const auto& v = require(j, key, path);
  if (!v.is_number()) throw SchemaError("field " + path + "." + key + " must be a number");
  return v.get<double>();
}

inline std::string require_string(const nlohmann::json& j, const char* key,
                                  const std::string& path) {
  const auto& v = require(j, key, path);
  if (!v.is_string()) throw SchemaError("field " + path + "." + key + " must be a string");
  return v.get<std::string>();
}

} // namespace detail

/// Parses the native network format:
///   {version: 1, nodes: [{id, x, y}], edges: [{id, from, to, lanes: [...]}],
///    origin?: {lat, lon}}
/// Throws SchemaError naming the offending path, or ValidationError when a
/// structural invariant fails.
inline RoadNetwork load_network(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("document root must be an object");
  if (detail::require(j, "version", "$").get<int>() != 1) {
    throw SchemaError("unsupported version at $.version");
  }

  RoadNetwork net;
  size_t ni = 0;
  for (const auto& jn : detail::require(j, "nodes", "$")) {
    const std::string path = "$.nodes[" + std::to_string(ni++) + "]";
    NetworkNode n;
    n.id = detail::require_string(jn, "id", path);
    n.position.x = detail::require_number(jn, "x", path);
    n.position.y = detail::require_number(jn, "y", path);
    net.nodes.push_back(std::move(n));
  }
  size_t ei = 0;
  for (const auto& je : detail::require(j, "edges", "$")) {
    const std::string epath = "$.edges[" + std::to_string(ei++) + "]";
    RoadEdge e;
    e.id = detail::require_string(je, "id", epath);
    e.from = detail::require_string(je, "from", epath);
    e.to = detail::require_string(je, "to", epath);
    size_t li = 0;
    for (const auto& jl : detail::require(je, "lanes", epath)) {
      const std::string lpath = epath + ".lanes[" + std::to_string(li++) + "]";
      Lane lane;
      lane.id = detail::require_string(jl, "id", lpath);
      lane.width = detail::require_number(jl, "width", lpath);
      lane.speed_limit = detail::require_number(jl, "speed_limit", lpath);
      const auto& cl = detail::require(jl, "centerline", lpath);
      if (!cl.is_array()) throw SchemaError("field " + lpath + ".centerline must be an array");
      for (const auto& pt : cl) {
        if (!pt.is_array() || pt.size() != 2) {
          throw SchemaError("field " + lpath + ".centerline must hold [x,y] pairs");
        }
        lane.centerline.push_back({pt[0].get<double>(), pt[1].get<double>()});
      }
      for (const auto& s : detail::require(jl, "successors", lpath)) {
        lane.successors.push_back(s.get<std::string>());
      }
      e.lanes.push_back(std::move(lane));
    }
    net.edges.push_back(std::move(e));
  }
  if (j.contains("origin")) {
    GeoOrigin o;
    o.lat = detail::require_number(j["origin"], "lat", "$.origin");
    o.lon = detail::require_number(j["origin"], "lon", "$.origin");
    net.origin = o;
  }
  net.finalize();
  return net;
}

/// Canonical serialization: nodes and edges sorted by id, lane order
/// preserved (it encodes lateral position), keys alphabetical, two-space
/// indent, trailing newline. save(load(x)) is a fixpoint.
inline std::string save_network(const RoadNetwork& net) {
  nlohmann::json j;
  j["version"] = 1;

  std::vector<const NetworkNode*> nodes;
  for (const auto& n : net.nodes) nodes.push_back(&n);
  std::sort(nodes.begin(), nodes.end(),
            [](const auto* a, const auto* b) { return a->id < b->id; });
  j["nodes"] = nlohmann::json::array();
  for (const auto* n : nodes) {
    j["nodes"].push_back({{"id", n->id}, {"x", n->position.x}, {"y", n->position.y}});
  }

  std::vector<const RoadEdge*> edges;
  for (const auto& e : net.edges) edges.push_back(&e);
  std::sort(edges.begin(), edges.end(),
            [](const auto* a, const auto* b) { return a->id < b->id; });
  j["edges"] = nlohmann::json::array();
  for (const auto* e : edges) {
    nlohmann::json je{{"id", e->id}, {"from", e->from}, {"to", e->to}};
    je["lanes"] = nlohmann::json::array();
    for (const Lane& lane : e->lanes) {
      nlohmann::json jl{{"id", lane.id},
                        {"width", lane.width},
                        {"speed_limit", lane.speed_limit}};
      jl["centerline"] = nlohmann::json::array();
      for (const Vec2& p : lane.centerline) {
        jl["centerline"].push_back({p.x, p.y});
      }
      jl["successors"] = lane.successors;
      je["lanes"].push_back(std::move(jl));
    }
    j["edges"].push_back(std::move(je));
  }
  if (net.origin) {
    j["origin"] = {{"lat", net.origin->lat}, {"lon", net.origin->lon}};
  }
  return j.dump(2) + "\n";
}

} // namespace crashsearch

#endif // CRASHSEARCH_NETWORK_JSON_HPP
