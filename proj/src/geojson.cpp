#include "pvparam/geojson.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "pvparam/csv.hpp"
#include "pvparam/error.hpp"

namespace pvparam {

using nlohmann::json;

namespace {

double round6(double v) {
  const double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;
}

json ring_json(const RingPoints& ring) {
  json out = json::array();
  for (const auto& p : ring) out.push_back({round6(p.x), round6(p.y)});
  if (!ring.empty()) out.push_back({round6(ring.front().x), round6(ring.front().y)});
  return out;
}

json polygon_geometry(const ArrayPolygon& polygon) {
  json coords = json::array();
  coords.push_back(ring_json(polygon.exterior));
  for (const auto& hole : polygon.holes) coords.push_back(ring_json(hole));
  return {{"type", "Polygon"}, {"coordinates", coords}};
}

RingPoints ring_from_json(const json& ring, const std::string& where) {
  if (!ring.is_array()) throw FormatError(where + ": ring is not an array");
  RingPoints out;
  for (const auto& pos : ring) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
      throw FormatError(where + ": malformed coordinate");
    }
    out.push_back({pos[0].get<double>(), pos[1].get<double>()});
  }
  if (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return out;
}

ArrayPolygon polygon_from_coordinates(const json& coords, const std::string& where) {
  if (!coords.is_array() || coords.empty()) throw FormatError(where + ": polygon has no rings");
  ArrayPolygon poly;
  poly.exterior = ring_from_json(coords[0], where);
  for (std::size_t i = 1; i < coords.size(); ++i) poly.holes.push_back(ring_from_json(coords[i], where));
  return poly;
}

ArrayPolygon polygon_from_geometry(const json& geometry, const std::string& where) {
  if (!geometry.is_object() || !geometry.contains("type")) throw FormatError(where + ": missing geometry");
  const std::string type = geometry.at("type").get<std::string>();
  const json& coords = geometry.at("coordinates");
  ArrayPolygon poly;
  if (type == "Polygon") {
    poly = polygon_from_coordinates(coords, where);
  } else if (type == "MultiPolygon" && coords.is_array() && coords.size() == 1) {
    poly = polygon_from_coordinates(coords[0], where);
  } else {
    throw FormatError(fmt::format("{}: unsupported geometry '{}' (Polygon expected)", where, type));
  }
  try {
    normalize(poly);
  } catch (const GeometryError& e) {
    throw FormatError(where + ": " + e.what());
  }
  return poly;
}

json collection(json features, const std::string& crs_id) {
  json fc = {{"type", "FeatureCollection"}};
  if (!crs_id.empty()) fc["crs"] = {{"type", "name"}, {"properties", {{"name", crs_id}}}};
  fc["features"] = std::move(features);
  return fc;
}

std::string dump(const json& fc) { return fc.dump(1) + "\n"; }

json parse_collection(const std::string& text, const std::string& source, std::string& crs_id) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(fmt::format("{}: invalid JSON: {}", source, e.what()));
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array()) {
    throw FormatError(source + ": not a GeoJSON FeatureCollection");
  }
  crs_id.clear();
  if (doc.contains("crs") && doc["crs"].is_object()) {
    const auto& props = doc["crs"].value("properties", json::object());
    if (props.contains("name") && props["name"].is_string()) crs_id = props["name"].get<std::string>();
  }
  return doc["features"];
}

std::string property_text(const json& props, const char* key, const std::string& where) {
  if (!props.contains(key)) throw FormatError(fmt::format("{}: missing property '{}'", where, key));
  const json& v = props[key];
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_number(v.get<double>());
  throw FormatError(fmt::format("{}: property '{}' must be a string", where, key));
}

double property_number(const json& props, const char* key, const std::string& where) {
  if (!props.contains(key) || !props[key].is_number()) {
    throw FormatError(fmt::format("{}: property '{}' must be a number", where, key));
  }
  return props[key].get<double>();
}

std::string layer_crs(std::span<const PVSystemRecord> systems) {
  return systems.empty() ? std::string{} : systems.front().footprint.crs_id;
}

}  // namespace

std::string pv_layer_to_string(std::span<const PVSystemRecord> systems) {
  json features = json::array();
  for (const auto& s : systems) {
    json props = json::object();
    props["id"] = s.id;
    props["tilt_deg"] = round6(s.orientation.tilt_deg);
    props["azimuth_deg"] = round6(s.orientation.azimuth_deg);
    props["orientation_confidence"] = std::string(to_string(s.orientation.confidence));
    props["template_label"] = s.layout.template_label;
    props["mounting_orientation"] = std::string(to_string(s.layout.orientation));
    props["module_count"] = s.layout.module_count;
    props["capacity_wp"] = round6(s.capacity_w);
    props["matching_score"] = round6(s.layout.score);
    props["area_m2"] = round6(s.footprint.area_m2);
    features.push_back({{"type", "Feature"}, {"properties", props}, {"geometry", polygon_geometry(s.footprint)}});
  }
  return dump(collection(std::move(features), layer_crs(systems)));
}

void export_pv_layer(std::span<const PVSystemRecord> systems, const std::filesystem::path& path) {
  write_file_atomic(path, pv_layer_to_string(systems));
}

std::vector<PVSystemRecord> pv_layer_from_string(const std::string& text, const std::string& source) {
  std::string crs;
  const json features = parse_collection(text, source, crs);
  std::vector<PVSystemRecord> out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string where = fmt::format("{}: feature {}", source, i);
    const json& f = features[i];
    const json props = f.value("properties", json::object());
    PVSystemRecord s;
    s.id = property_text(props, "id", where);
    if (!ids.insert(s.id).second) throw FormatError(fmt::format("{}: duplicate id '{}'", where, s.id));
    s.footprint = polygon_from_geometry(f.value("geometry", json{}), where);
    s.footprint.id = s.id;
    s.footprint.crs_id = crs;
    s.orientation.tilt_deg = property_number(props, "tilt_deg", where);
    s.orientation.azimuth_deg = property_number(props, "azimuth_deg", where);
    s.orientation.confidence = parse_confidence(property_text(props, "orientation_confidence", where));
    s.layout.template_index = -1;
    s.layout.template_label = property_text(props, "template_label", where);
    s.layout.orientation = parse_module_orientation(property_text(props, "mounting_orientation", where));
    s.layout.module_count = static_cast<int>(property_number(props, "module_count", where));
    s.capacity_w = property_number(props, "capacity_wp", where);
    s.layout.capacity_w = s.capacity_w;
    s.layout.score = property_number(props, "matching_score", where);
    s.footprint.area_m2 = property_number(props, "area_m2", where);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PVSystemRecord> import_pv_layer(const std::filesystem::path& path) {
  return pv_layer_from_string(read_text_file(path), path.string());
}

std::string footprint_layer_to_string(std::span<const ArrayPolygon> footprints) {
  json features = json::array();
  for (const auto& fp : footprints) {
    json props = {{"id", fp.id}, {"area_m2", round6(fp.area_m2)}};
    features.push_back({{"type", "Feature"}, {"properties", props}, {"geometry", polygon_geometry(fp)}});
  }
  return dump(collection(std::move(features), footprints.empty() ? std::string{} : footprints.front().crs_id));
}

void write_footprint_layer(std::span<const ArrayPolygon> footprints, const std::filesystem::path& path) {
  write_file_atomic(path, footprint_layer_to_string(footprints));
}

std::vector<ArrayPolygon> read_footprint_layer(const std::filesystem::path& path) {
  std::string crs;
  const json features = parse_collection(read_text_file(path), path.string(), crs);
  std::vector<ArrayPolygon> out;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string where = fmt::format("{}: feature {}", path.string(), i);
    const json props = features[i].value("properties", json::object());
    ArrayPolygon poly = polygon_from_geometry(features[i].value("geometry", json{}), where);
    poly.id = props.contains("id") ? property_text(props, "id", where) : fmt::format("pv_{:04d}", i + 1);
    poly.crs_id = crs;
    out.push_back(std::move(poly));
  }
  return out;
}

std::vector<NeighborhoodRecord> read_regions_geojson(const std::filesystem::path& path) {
  std::string crs;
  const json features = parse_collection(read_text_file(path), path.string(), crs);
  std::vector<NeighborhoodRecord> out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string where = fmt::format("{}: feature {}", path.string(), i);
    const json props = features[i].value("properties", json::object());
    NeighborhoodRecord r;
    r.region_id = property_text(props, "region_id", where);
    if (!ids.insert(r.region_id).second) throw FormatError(fmt::format("{}: duplicate region_id '{}'", where, r.region_id));
    r.boundary = polygon_from_geometry(features[i].value("geometry", json{}), where);
    r.boundary.id = r.region_id;
    r.boundary.crs_id = crs;
    if (props.contains("recorded_kwp") && !props["recorded_kwp"].is_null()) {
      r.recorded_kwp = property_number(props, "recorded_kwp", where);
      if (*r.recorded_kwp < 0.0) throw FormatError(where + ": recorded_kwp must be >= 0");
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_regions_geojson(std::span<const NeighborhoodRecord> regions, const std::filesystem::path& path) {
  json features = json::array();
  for (const auto& r : regions) {
    json props = {{"region_id", r.region_id}};
    if (r.recorded_kwp) props["recorded_kwp"] = round6(*r.recorded_kwp);
    features.push_back({{"type", "Feature"}, {"properties", props}, {"geometry", polygon_geometry(r.boundary)}});
  }
  write_file_atomic(path, dump(collection(std::move(features),
                                          regions.empty() ? std::string{} : regions.front().boundary.crs_id)));
}

}  // namespace pvparam
