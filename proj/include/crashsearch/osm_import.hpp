#ifndef CRASHSEARCH_OSM_IMPORT_HPP
#define CRASHSEARCH_OSM_IMPORT_HPP

#include <cctype>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "crashsearch/network.hpp"

namespace crashsearch {

struct OsmParseError : std::runtime_error {
  int line;
  int column;
  OsmParseError(int l, int c, const std::string& msg)
      : std::runtime_error("line " + std::to_string(l) + ", column " +
                           std::to_string(c) + ": " + msg),
        line(l),
        column(c) {}
};

struct OsmImportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OsmImportConfig {
  double default_lane_width = 3.5;
  // Fallback speed limits (m/s) when maxspeed is absent, keyed by highway class.
  std::map<std::string, double> class_speed_defaults = {{"motorway", 27.8},
                                                        {"residential", 13.9}};
  double fallback_speed = 13.9;
};

namespace osm_detail {

// Minimal non-validating XML scanner for the OSM subset: elements,
// attributes, self-closing tags, comments, declarations, CDATA-free text.
// Tracks line/column for error reporting.
class XmlScanner {
 public:
  struct Element {
    std::string name;
    std::map<std::string, std::string> attrs;
    bool self_closing = false;
    bool closing = false; // </name>
    int line = 1, column = 1;
  };

  explicit XmlScanner(const std::string& text) : text_(text) {}

  /// Next element tag, skipping text, comments, declarations and PIs.
  /// Returns false at end of input.
  bool next(Element& out) {
    for (;;) {
      skip_until('<');
      if (eof()) return false;
      const int l = line_, c = col_;
      advance(); // consume '<'
      if (peek() == '?') {
        skip_until_literal("?>");
        continue;
      }
      if (peek() == '!') {
        if (text_.compare(pos_, 3, "!--") == 0) {
          skip_until_literal("-->");
        } else {
          skip_until('>');
          if (!eof()) advance();
        }
        continue;
      }
      out = Element{};
      out.line = l;
      out.column = c;
      if (peek() == '/') {
        advance();
        out.closing = true;
      }
      out.name = read_name();
      if (out.name.empty()) fail("expected element name");
      read_attributes(out);
      return true;
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw OsmParseError(line_, col_, msg);
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }
  void advance() {
    if (eof()) return;
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void skip_until(char ch) {
    while (!eof() && text_[pos_] != ch) advance();
  }
  void skip_until_literal(const char* lit) {
    const size_t found = text_.find(lit, pos_);
    if (found == std::string::npos) fail(std::string("unterminated '") + lit + "'");
    while (pos_ < found) advance();
    for (size_t i = 0; lit[i] != '\0'; ++i) advance();
  }
  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }
  static bool name_char(char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' ||
           ch == ':' || ch == '.';
  }
  std::string read_name() {
    std::string name;
    while (!eof() && name_char(peek())) {
      name.push_back(peek());
      advance();
    }
    return name;
  }
  std::string decode_entities(const std::string& raw) {
    std::string out;
    for (size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out.push_back(raw[i]);
        continue;
      }
      const size_t semi = raw.find(';', i);
      const std::string ent = semi == std::string::npos ? "" : raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") out.push_back('&');
      else if (ent == "lt") out.push_back('<');
      else if (ent == "gt") out.push_back('>');
      else if (ent == "quot") out.push_back('"');
      else if (ent == "apos") out.push_back('\'');
      else fail("unknown entity '&" + ent + ";'");
      i = semi;
    }
    return out;
  }
  void read_attributes(Element& out) {
    for (;;) {
      skip_ws();
      if (eof()) fail("unterminated element '" + out.name + "'");
      if (peek() == '/') {
        advance();
        skip_ws();
        if (peek() != '>') fail("expected '>' after '/'");
        advance();
        out.self_closing = true;
        return;
      }
      if (peek() == '>') {
        advance();
        return;
      }
      const std::string key = read_name();
      if (key.empty()) fail("expected attribute name in element '" + out.name + "'");
      skip_ws();
      if (peek() != '=') fail("expected '=' after attribute '" + key + "'");
      advance();
      skip_ws();
      const char quote = peek();
      if (quote != '"' && quote != '\'') fail("expected quoted value for '" + key + "'");
      advance();
      std::string value;
      while (!eof() && peek() != quote) {
        value.push_back(peek());
        advance();
      }
      if (eof()) fail("unterminated attribute value for '" + key + "'");
      advance(); // closing quote
      out.attrs[key] = decode_entities(value);
    }
  }

  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct OsmWay {
  std::string id;
  std::vector<std::string> node_refs;
  std::map<std::string, std::string> tags;
};

/// "50" / "50 km/h" -> m/s; "30 mph" handled; anything else -> no value.
inline std::optional<double> parse_maxspeed(const std::string& raw) {
  size_t i = 0;
  while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
  size_t j = i;
  while (j < raw.size() &&
         (std::isdigit(static_cast<unsigned char>(raw[j])) || raw[j] == '.')) {
    ++j;
  }
  if (j == i) return std::nullopt;
  const double value = std::stod(raw.substr(i, j - i));
  if (raw.find("mph") != std::string::npos) return value * 0.44704;
  return value / 3.6; // OSM default unit is km/h
}

} // namespace osm_detail

/// Imports the OSM XML subset: `node` elements (id, lat, lon) and `way`
/// elements with `nd` refs; only the tags `highway`, `lanes`, `oneway` and
/// `maxspeed` are consulted. Every highway-tagged way becomes one edge per
/// direction (two unless oneway=yes), each with `lanes`-tag lane count
/// (default 1). Lane centerlines are offset right of the travel direction:
/// whole lane widths for one-way edges, half-width shifted for two-way edges
/// so opposing lanes never overlap. Lanes of ways meeting at a shared node
/// are joined by straight connector lanes through the junction interior.
inline RoadNetwork parse_osm_subset(const std::string& xml_text,
                                    const OsmImportConfig& config = {}) {
  struct RawNode {
    double lat, lon;
  };
  std::map<std::string, RawNode> raw_nodes;
  std::vector<osm_detail::OsmWay> ways;

  osm_detail::XmlScanner scanner(xml_text);
  osm_detail::XmlScanner::Element el;
  osm_detail::OsmWay* open_way = nullptr;
  while (scanner.next(el)) {
    if (el.closing) {
      if (el.name == "way") open_way = nullptr;
      continue;
    }
    if (el.name == "node") {
      auto id = el.attrs.find("id");
      auto lat = el.attrs.find("lat");
      auto lon = el.attrs.find("lon");
      if (id == el.attrs.end() || lat == el.attrs.end() || lon == el.attrs.end()) {
        throw OsmParseError(el.line, el.column, "node missing id/lat/lon");
      }
      raw_nodes[id->second] = {std::stod(lat->second), std::stod(lon->second)};
    } else if (el.name == "way") {
      auto id = el.attrs.find("id");
      if (id == el.attrs.end()) throw OsmParseError(el.line, el.column, "way missing id");
      ways.push_back({id->second, {}, {}});
      open_way = el.self_closing ? nullptr : &ways.back();
    } else if (el.name == "nd" && open_way != nullptr) {
      auto ref = el.attrs.find("ref");
      if (ref == el.attrs.end()) throw OsmParseError(el.line, el.column, "nd missing ref");
      open_way->node_refs.push_back(ref->second);
    } else if (el.name == "tag" && open_way != nullptr) {
      auto k = el.attrs.find("k");
      auto v = el.attrs.find("v");
      if (k != el.attrs.end() && v != el.attrs.end()) {
        open_way->tags[k->second] = v->second;
      }
    }
  }

  std::vector<const osm_detail::OsmWay*> drivable;
  for (const auto& w : ways) {
    if (w.tags.count("highway") > 0 && w.node_refs.size() >= 2) drivable.push_back(&w);
  }
  if (drivable.empty()) {
    throw OsmImportError("no drivable ways (no way carries a 'highway' tag)");
  }

  // Projection about the mean coordinate of referenced nodes.
  double lat_sum = 0.0, lon_sum = 0.0;
  size_t ref_count = 0;
  for (const auto* w : drivable) {
    for (const auto& ref : w->node_refs) {
      auto it = raw_nodes.find(ref);
      if (it == raw_nodes.end()) {
        throw OsmImportError("way '" + w->id + "' references unknown node '" + ref + "'");
      }
      lat_sum += it->second.lat;
      lon_sum += it->second.lon;
      ++ref_count;
    }
  }
  GeoProjection proj{lat_sum / static_cast<double>(ref_count),
                     lon_sum / static_cast<double>(ref_count)};

  RoadNetwork net;
  net.origin = GeoOrigin{proj.origin_lat_deg, proj.origin_lon_deg};
  std::map<std::string, bool> node_used;
  for (const auto* w : drivable) {
    for (const auto& ref : w->node_refs) node_used[ref] = true;
  }
  for (const auto& [id, rn] : node_used) {
    (void)rn;
    const RawNode& raw = raw_nodes[id];
    net.nodes.push_back({id, proj.to_local(raw.lat, raw.lon)});
  }
  std::map<NodeId, Vec2> node_pos;
  for (const auto& n : net.nodes) node_pos[n.id] = n.position;

  auto offset_polyline = [](const std::vector<Vec2>& pts, double offset) {
    std::vector<Vec2> out(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
      Vec2 dir;
      if (i == 0) {
        dir = (pts[1] - pts[0]).normalized();
      } else if (i + 1 == pts.size()) {
        dir = (pts[i] - pts[i - 1]).normalized();
      } else {
        dir = ((pts[i + 1] - pts[i]).normalized() + (pts[i] - pts[i - 1]).normalized())
                  .normalized();
      }
      // offset > 0 shifts right of travel direction
      out[i] = pts[i] + dir.left() * (-offset);
    }
    return out;
  };

  for (const auto* w : drivable) {
    const bool oneway = [&] {
      auto it = w->tags.find("oneway");
      return it != w->tags.end() && it->second == "yes";
    }();
    int lane_count = 1;
    if (auto it = w->tags.find("lanes"); it != w->tags.end()) {
      try {
        lane_count = std::max(1, std::stoi(it->second));
      } catch (const std::exception&) {
        lane_count = 1;
      }
    }
    double speed = config.fallback_speed;
    if (auto it = w->tags.find("maxspeed"); it != w->tags.end()) {
      if (auto parsed = osm_detail::parse_maxspeed(it->second)) speed = *parsed;
    } else if (auto hw = w->tags.find("highway"); hw != w->tags.end()) {
      auto def = config.class_speed_defaults.find(hw->second);
      if (def != config.class_speed_defaults.end()) speed = def->second;
    }

    std::vector<Vec2> fwd_pts;
    for (const auto& ref : w->node_refs) fwd_pts.push_back(node_pos[ref]);

    const int directions = oneway ? 1 : 2;
    for (int dir = 0; dir < directions; ++dir) {
      std::vector<Vec2> pts = fwd_pts;
      if (dir == 1) std::reverse(pts.begin(), pts.end());
      RoadEdge edge;
      edge.id = "w" + w->id + (dir == 0 ? "_f" : "_b");
      edge.from = dir == 0 ? w->node_refs.front() : w->node_refs.back();
      edge.to = dir == 0 ? w->node_refs.back() : w->node_refs.front();
      for (int li = 0; li < lane_count; ++li) {
        Lane lane;
        lane.id = edge.id + "_l" + std::to_string(li);
        lane.width = config.default_lane_width;
        lane.speed_limit = speed;
        const double offset = oneway ? li * config.default_lane_width
                                     : (li + 0.5) * config.default_lane_width;
        lane.centerline = offset_polyline(pts, offset);
        edge.lanes.push_back(std::move(lane));
      }
      net.edges.push_back(std::move(edge));
    }
  }

  // Junction wiring: where an edge ends at a node that another edge leaves,
  // join matching lanes. A straight connector lane bridges any geometric gap
  // left by the lateral offsets. U-turns back onto the same way are skipped.
  std::vector<RoadEdge> connectors;
  int connector_seq = 0;
  for (auto& in_edge : net.edges) {
    for (auto& out_edge : net.edges) {
      if (in_edge.to != out_edge.from) continue;
      if (&in_edge == &out_edge) continue;
      const std::string in_way = in_edge.id.substr(0, in_edge.id.find_last_of('_'));
      const std::string out_way = out_edge.id.substr(0, out_edge.id.find_last_of('_'));
      if (in_way == out_way) continue; // U-turn
      for (size_t li = 0; li < in_edge.lanes.size(); ++li) {
        Lane& in_lane = in_edge.lanes[li];
        const size_t lo = std::min(li, out_edge.lanes.size() - 1);
        Lane& out_lane = out_edge.lanes[lo];
        const Vec2 a = in_lane.centerline.back();
        const Vec2 b = out_lane.centerline.front();
        if ((b - a).norm() < 1e-6) {
          in_lane.successors.push_back(out_lane.id);
        } else {
          RoadEdge conn;
          conn.id = "j" + std::to_string(connector_seq++);
          conn.from = in_edge.to;
          conn.to = out_edge.from;
          Lane lane;
          lane.id = conn.id + "_l0";
          lane.width = std::min(in_lane.width, out_lane.width);
          lane.speed_limit = std::min(in_lane.speed_limit, out_lane.speed_limit);
          lane.centerline = {a, b};
          lane.successors.push_back(out_lane.id);
          in_lane.successors.push_back(lane.id);
          conn.lanes.push_back(std::move(lane));
          connectors.push_back(std::move(conn));
        }
      }
    }
  }
  for (auto& c : connectors) net.edges.push_back(std::move(c));

  net.finalize();
  return net;
}

} // namespace crashsearch

#endif // CRASHSEARCH_OSM_IMPORT_HPP
