#pragma once

// GeoJSON FeatureCollections: the enriched PV layer, plain footprint layers
// and neighbourhood boundaries. Coordinates and numeric properties are
// rounded to 6 fractional digits before writing.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvparam/geometry.hpp"
#include "pvparam/system.hpp"

namespace pvparam {

/// Properties: id, tilt_deg, azimuth_deg, orientation_confidence,
/// template_label, mounting_orientation, module_count, capacity_wp,
/// matching_score, area_m2.
std::string pv_layer_to_string(std::span<const PVSystemRecord> systems);
void export_pv_layer(std::span<const PVSystemRecord> systems, const std::filesystem::path& path);

/// Inverse of export_pv_layer. Fields the layer does not carry (layout
/// cells, template index, provenance) are left empty; template_index is -1.
std::vector<PVSystemRecord> import_pv_layer(const std::filesystem::path& path);
std::vector<PVSystemRecord> pv_layer_from_string(const std::string& text, const std::string& source = "<string>");

/// Footprints with `id` and `area_m2` properties.
std::string footprint_layer_to_string(std::span<const ArrayPolygon> footprints);
void write_footprint_layer(std::span<const ArrayPolygon> footprints, const std::filesystem::path& path);
std::vector<ArrayPolygon> read_footprint_layer(const std::filesystem::path& path);

struct NeighborhoodRecord {
  std::string region_id;
  ArrayPolygon boundary;
  std::optional<double> recorded_kwp;
};

/// Polygon features (or single-part MultiPolygons) with a `region_id`
/// property and an optional `recorded_kwp`. Throws FormatError on other
/// geometry types and on repeated ids.
std::vector<NeighborhoodRecord> read_regions_geojson(const std::filesystem::path& path);
void write_regions_geojson(std::span<const NeighborhoodRecord> regions, const std::filesystem::path& path);

}  // namespace pvparam
