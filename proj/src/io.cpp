#include "linesect/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "linesect/error.hpp"

namespace linesect::io {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw Error(ErrorKind::invalid_input, "field '" + field + "': " + message);
}

const Json& require(const Json& doc, const char* key, const std::string& where) {
  if (!doc.is_object() || !doc.contains(key)) fail(where + key, "missing");
  return doc.at(key);
}

double to_double(const Json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(field, "expected a finite number");
  return d;
}

int to_degree(const Json& v, const std::string& field) {
  if (!v.is_number_integer()) fail(field, "expected an integer");
  const auto d = v.get<long long>();
  if (d < 0 || d > kMaxDegree) fail(field, "degree must lie in [0, " + std::to_string(kMaxDegree) + "]");
  return static_cast<int>(d);
}

template <int Dim>
Eigen::Matrix<double, Dim, 1> to_point(const Json& v, const std::string& field) {
  if (!v.is_array() || v.size() != Dim) fail(field, "expected " + std::to_string(Dim) + " coordinates");
  Eigen::Matrix<double, Dim, 1> p;
  for (int d = 0; d < Dim; ++d) p[d] = to_double(v[static_cast<std::size_t>(d)], field + "[" + std::to_string(d) + "]");
  return p;
}

std::vector<double> to_params(const Json& v, std::size_t expected, const std::string& field) {
  if (!v.is_array() || v.size() != expected) {
    fail(field, "expected " + std::to_string(expected) + " nodal parameters");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(to_double(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<Vec2> curve_points(const Json& doc, const char* key, int degree) {
  const Json& pts = require(doc, key, "");
  if (!pts.is_array() || pts.size() != static_cast<std::size_t>(degree + 1)) {
    fail(key, "expected degree+1 = " + std::to_string(degree + 1) + " entries");
  }
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.push_back(to_point<2>(pts[i], std::string(key) + "[" + std::to_string(i) + "]"));
  }
  return out;
}

// Grid [i1][i2] flattened with i1 varying fastest.
std::vector<Vec3> surface_points(const Json& doc, const char* key, std::array<int, 2> q) {
  const Json& grid = require(doc, key, "");
  if (!grid.is_array() || grid.size() != static_cast<std::size_t>(q[0] + 1)) {
    fail(key, "expected q1+1 = " + std::to_string(q[0] + 1) + " rows");
  }
  std::vector<Vec3> out(static_cast<std::size_t>((q[0] + 1) * (q[1] + 1)));
  for (int i1 = 0; i1 <= q[0]; ++i1) {
    const Json& row = grid[static_cast<std::size_t>(i1)];
    const std::string row_field = std::string(key) + "[" + std::to_string(i1) + "]";
    if (!row.is_array() || row.size() != static_cast<std::size_t>(q[1] + 1)) {
      fail(row_field, "expected q2+1 = " + std::to_string(q[1] + 1) + " entries");
    }
    for (int i2 = 0; i2 <= q[1]; ++i2) {
      out[static_cast<std::size_t>(i1 + (q[0] + 1) * i2)] =
          to_point<3>(row[static_cast<std::size_t>(i2)], row_field + "[" + std::to_string(i2) + "]");
    }
  }
  return out;
}

std::array<int, 2> to_bidegree(const Json& doc) {
  const Json& b = require(doc, "bidegree", "");
  if (!b.is_array() || b.size() != 2) fail("bidegree", "expected [q1, q2]");
  return {to_degree(b[0], "bidegree[0]"), to_degree(b[1], "bidegree[1]")};
}

Json vec_json(const double* data, int n, int digits) {
  Json a = Json::array();
  for (int i = 0; i < n; ++i) a.push_back(number(data[i], digits));
  return a;
}

}  // namespace

GeometryInput parse_geometry(const Json& doc) {
  if (!doc.is_object()) fail("<root>", "expected an object");
  const Json& kind_field = require(doc, "kind", "");
  if (!kind_field.is_string()) fail("kind", "expected a string");
  const std::string kind = kind_field.get<std::string>();

  if (kind == "lagrange_curve" || kind == "power_curve") {
    const int degree = to_degree(require(doc, "degree", ""), "degree");
    if (kind == "power_curve") {
      return {kind, PowerCurve(curve_points(doc, "coeffs", degree))};
    }
    LagrangeCurve c = LagrangeCurve::uniform(curve_points(doc, "nodes", degree));
    if (doc.contains("params")) c.params = to_params(doc.at("params"), c.nodes.size(), "params");
    return {kind, lagrange_to_power(c)};
  }
  if (kind == "lagrange_surface" || kind == "power_surface") {
    const auto q = to_bidegree(doc);
    if (kind == "power_surface") {
      return {kind, PowerSurface(q, surface_points(doc, "coeffs", q))};
    }
    LagrangeSurface s = LagrangeSurface::uniform(q, surface_points(doc, "nodes", q));
    if (doc.contains("params")) {
      const Json& p = doc.at("params");
      if (!p.is_array() || p.size() != 2) fail("params", "expected two parameter lists");
      s.params[0] = to_params(p[0], static_cast<std::size_t>(q[0] + 1), "params[0]");
      s.params[1] = to_params(p[1], static_cast<std::size_t>(q[1] + 1), "params[1]");
    }
    return {kind, lagrange_to_power(s)};
  }
  fail("kind", "unknown geometry kind '" + kind + "'");
}

Json read_json_file(const std::string& path, bool allow_empty) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::invalid_input, "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    if (allow_empty) return Json();
    throw Error(ErrorKind::invalid_input, "'" + path + "' is empty");
  }
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::invalid_input, "'" + path + "': " + e.what());
  }
}

GeometryInput read_geometry_file(const std::string& path) {
  return parse_geometry(read_json_file(path, false));
}

Json geometry_to_json(const PowerCurve& curve) {
  Json j;
  j["kind"] = "power_curve";
  j["degree"] = curve.degree();
  Json coeffs = Json::array();
  for (const auto& c : curve.coeffs()) coeffs.push_back({c[0], c[1]});
  j["coeffs"] = coeffs;
  return j;
}

Json geometry_to_json(const PowerSurface& surface) {
  const auto q = surface.bidegree();
  Json j;
  j["kind"] = "power_surface";
  j["bidegree"] = {q[0], q[1]};
  Json grid = Json::array();
  for (int j1 = 0; j1 <= q[0]; ++j1) {
    Json row = Json::array();
    for (int j2 = 0; j2 <= q[1]; ++j2) {
      const Vec3& c = surface.coeff(j1, j2);
      row.push_back({c[0], c[1], c[2]});
    }
    grid.push_back(row);
  }
  j["coeffs"] = grid;
  return j;
}

std::vector<LineSpec> parse_lines(const Json& doc) {
  if (doc.is_null()) return {};
  const Json& lines = require(doc, "lines", "");
  if (!lines.is_array()) fail("lines", "expected an array");
  std::vector<LineSpec> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = "lines[" + std::to_string(i) + "].";
    LineSpec spec;
    for (const char* key : {"origin", "direction"}) {
      const Json& v = require(lines[i], key, where);
      if (!v.is_array() || v.empty()) fail(where + key, "expected a coordinate array");
      std::vector<double>& dst = std::string(key) == "origin" ? spec.origin : spec.direction;
      for (std::size_t d = 0; d < v.size(); ++d) {
        dst.push_back(to_double(v[d], where + key + "[" + std::to_string(d) + "]"));
      }
    }
    if (spec.origin.size() != spec.direction.size()) {
      fail(where + "direction", "origin and direction differ in dimension");
    }
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<LineSpec> read_lines_file(const std::string& path) {
  return parse_lines(read_json_file(path, true));
}

template <int Dim>
QueryLine<Dim> to_line(const LineSpec& spec, std::size_t index) {
  const std::string where = "lines[" + std::to_string(index) + "]";
  if (spec.origin.size() != static_cast<std::size_t>(Dim)) {
    fail(where + ".origin", "expected " + std::to_string(Dim) + " coordinates for this geometry");
  }
  Eigen::Matrix<double, Dim, 1> o, d;
  for (int k = 0; k < Dim; ++k) {
    o[k] = spec.origin[static_cast<std::size_t>(k)];
    d[k] = spec.direction[static_cast<std::size_t>(k)];
  }
  if (d.norm() == 0.0) fail(where + ".direction", "must be nonzero");
  return QueryLine<Dim>(o, d);
}

template QueryLine<2> to_line<2>(const LineSpec&, std::size_t);
template QueryLine<3> to_line<3>(const LineSpec&, std::size_t);

double round_sig(double value, int digits) {
  if (!std::isfinite(value) || value == 0.0) return value;
  digits = std::clamp(digits, 1, 17);
  char buf[64];
  if (digits >= 15) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    return std::strtod(buf, nullptr);
  }
  // Drop accumulated rounding noise first, then round half away from zero.
  std::snprintf(buf, sizeof buf, "%.*g", std::min(15, digits + 6), value);
  const double clean = std::strtod(buf, nullptr);
  const int exponent = static_cast<int>(std::floor(std::log10(std::abs(clean))));
  const double scale = std::pow(10.0, digits - 1 - exponent);
  const double rounded = std::round(clean * scale) / scale;
  std::snprintf(buf, sizeof buf, "%.*g", digits, rounded);
  return std::strtod(buf, nullptr);
}

Json number(double value, int digits) {
  if (!std::isfinite(value)) return Json();
  const double r = round_sig(value, digits);
  return r == 0.0 ? 0.0 : r;  // no negative zero in reports
}

Json record_to_json(const CurveRecord& r, int digits, bool with_domain) {
  Json j;
  j["status"] = to_string(r.status);
  j["xi"] = number(r.xi, digits);
  if (r.status == RecordStatus::complex_discarded) j["xi_imag"] = number(r.xi_imag, digits);
  j["theta"] = number(r.theta[0], digits);
  j["point"] = vec_json(r.point.data(), 2, digits);
  j["residual"] = number(r.residual, digits);
  j["multiplicity"] = r.multiplicity;
  if (r.multiplicity_unresolved) j["multiplicity_unresolved"] = true;
  if (with_domain) j["in_domain"] = r.in_domain;
  return j;
}

Json record_to_json(const SurfaceRecord& r, int digits, bool with_domain) {
  Json j;
  j["status"] = to_string(r.status);
  j["xi"] = number(r.xi, digits);
  if (r.status == RecordStatus::complex_discarded) j["xi_imag"] = number(r.xi_imag, digits);
  j["theta"] = vec_json(r.theta.data(), 2, digits);
  j["point"] = vec_json(r.point.data(), 3, digits);
  j["residual"] = number(r.residual, digits);
  j["multiplicity"] = r.multiplicity;
  if (r.multiplicity_unresolved) j["multiplicity_unresolved"] = true;
  if (with_domain) j["in_domain"] = r.in_domain;
  return j;
}

}  // namespace linesect::io
