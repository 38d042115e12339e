#pragma once

#include "linkcert/errors.hpp"
#include "linkcert/geometry.hpp"

#include <string>
#include <vector>

namespace linkcert {

enum class LoopKind { Polyline, CatmullRom, Cubics };

/// One curve of a model. Straight pieces are stored as linear cubics so the
/// whole pipeline works on a single segment type. `control_points` keeps the
/// source representation for serialization (polyline vertices or
/// Catmull-Rom controls); it is empty for explicit cubics.
struct LoopGeometry {
  std::vector<CubicSegment> segments;
  bool closed = true;
  LoopKind kind = LoopKind::Cubics;
  std::vector<Vec3> control_points;

  std::size_t size() const { return segments.size(); }
};

struct CurveModel {
  std::vector<LoopGeometry> loops;
  double xi = 0.0;

  std::size_t size() const { return loops.size(); }
};

/// Closed polyline: segment i runs vertices[i] -> vertices[(i+1) % n].
struct PolylineLoop {
  std::vector<Vec3> vertices;

  std::size_t size() const { return vertices.size(); }
  const Vec3 &vertex(std::size_t i) const {
    return vertices[i < vertices.size() ? i : i - vertices.size()];
  }
  double length() const;
  PolylineLoop reversed() const;
};

enum class ModelFormat { JsonCurves, PolylineText };

/// Closed uniform Catmull-Rom cycle (tension 0.5): one cubic per control
/// point, segment k interpolating controls k and k+1.
std::vector<CubicSegment> catmull_rom_to_cubics(const std::vector<Vec3> &cps);

/// Open variant with reflected phantom end points; n controls give n-1 pieces.
std::vector<CubicSegment>
catmull_rom_open_to_cubics(const std::vector<Vec3> &cps);

LoopGeometry make_polyline_loop(const std::vector<Vec3> &vertices,
                                bool closed = true);
LoopGeometry make_catmull_rom_loop(const std::vector<Vec3> &cps);
LoopGeometry make_cubic_loop(std::vector<CubicSegment> segments,
                             bool closed = true);

/// Computes xi and validates every loop. Throws ValidationError.
CurveModel make_model(std::vector<LoopGeometry> loops);
CurveModel model_from_polylines(const std::vector<PolylineLoop> &loops);

/// Mean |coordinate| over all control points (segment starts for cubics).
double average_coordinate_magnitude(const std::vector<LoopGeometry> &loops);

void validate_loop(const LoopGeometry &loop, double xi);
void validate_polyline(const PolylineLoop &loop, double xi);

/// Open loops are rejected unless `allow_open` (braid inputs).
CurveModel parse_json_curves(const std::string &text, bool allow_open = false);
CurveModel parse_polyline_text(const std::string &text);
CurveModel load_model(const std::string &path, ModelFormat format);
ModelFormat format_from_path(const std::string &path);

/// Canonical json-curves text (sorted keys, shortest round-trip doubles).
std::string to_json_curves(const CurveModel &model);
std::string to_polyline_text(const std::vector<PolylineLoop> &loops);
void save_model(const CurveModel &model, const std::string &path);

/// Hex SHA-256 of the canonical json-curves serialization.
std::string model_digest(const CurveModel &model);

std::string read_file(const std::string &path);
void write_file(const std::string &path, const std::string &contents);

} // namespace linkcert
