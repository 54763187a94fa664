#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "linesect/intersect.hpp"
#include "linesect/polybasis.hpp"

// Structured-text (JSON) file formats.
//
// Geometry:
//   {"kind": "lagrange_curve",   "degree": q,        "nodes":  [[x, y], ...], "params": [...]?}
//   {"kind": "power_curve",      "degree": q,        "coeffs": [[x, y], ...]}
//   {"kind": "lagrange_surface", "bidegree": [q1,q2], "nodes":  [[[x,y,z], ...], ...],
//                                                     "params": [[...], [...]]?}
//   {"kind": "power_surface",    "bidegree": [q1,q2], "coeffs": [[[x,y,z], ...], ...]}
// Surface grids are indexed [i1][i2]. Missing nodal parameters default to
// uniform spacing on [0, 1].
//
// Lines:
//   {"lines": [{"origin": [...], "direction": [...]}, ...]}
// An empty file means no lines.
namespace linesect::io {

using Json = nlohmann::ordered_json;

using Geometry = std::variant<PowerCurve, PowerSurface>;

struct GeometryInput {
  std::string kind;
  Geometry geometry;
};

/// Throws Error(invalid_input / shape_mismatch / ill_posed_basis) naming the
/// offending field.
GeometryInput parse_geometry(const Json& doc);
GeometryInput read_geometry_file(const std::string& path);

/// Power-basis form at full precision; parse_geometry reads it back exactly.
Json geometry_to_json(const PowerCurve& curve);
Json geometry_to_json(const PowerSurface& surface);

struct LineSpec {
  std::vector<double> origin;
  std::vector<double> direction;
};

std::vector<LineSpec> parse_lines(const Json& doc);
std::vector<LineSpec> read_lines_file(const std::string& path);

template <int Dim>
QueryLine<Dim> to_line(const LineSpec& spec, std::size_t index);

/// Rounds to `digits` significant digits so the serialized value prints
/// with at most that many.
double round_sig(double value, int digits);

Json number(double value, int digits);

Json record_to_json(const CurveRecord& record, int digits, bool with_domain);
Json record_to_json(const SurfaceRecord& record, int digits, bool with_domain);

Json read_json_file(const std::string& path, bool allow_empty);

}  // namespace linesect::io
