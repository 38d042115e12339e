#include "linkcert/model.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace linkcert {

using nlohmann::json;

double PolylineLoop::length() const {
  double total = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    total += (vertex(i + 1) - vertices[i]).norm();
  return total;
}

PolylineLoop PolylineLoop::reversed() const {
  PolylineLoop out;
  out.vertices.assign(vertices.rbegin(), vertices.rend());
  return out;
}

namespace {

CubicSegment catmull_rom_piece(const Vec3 &p0, const Vec3 &p1, const Vec3 &p2,
                               const Vec3 &p3) {
  CubicSegment seg;
  seg.coeffs[0] = p1;
  seg.coeffs[1] = 0.5 * (p2 - p0);
  seg.coeffs[2] = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
  seg.coeffs[3] = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
  return seg;
}

void reject_adjacent_duplicates(const std::vector<Vec3> &cps, bool closed) {
  const std::size_t n = cps.size();
  const std::size_t last = closed ? n : n - 1;
  for (std::size_t k = 0; k < last; ++k) {
    if (cps[k] == cps[(k + 1) % n])
      throw ValidationError("duplicate adjacent Catmull-Rom control points at " +
                            std::to_string(k));
  }
}

} // namespace

std::vector<CubicSegment> catmull_rom_to_cubics(const std::vector<Vec3> &cps) {
  const std::size_t n = cps.size();
  if (n < 4)
    throw ValidationError("closed Catmull-Rom cycle needs at least 4 points");
  reject_adjacent_duplicates(cps, true);
  std::vector<CubicSegment> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k)
    out.push_back(catmull_rom_piece(cps[(k + n - 1) % n], cps[k],
                                    cps[(k + 1) % n], cps[(k + 2) % n]));
  return out;
}

std::vector<CubicSegment>
catmull_rom_open_to_cubics(const std::vector<Vec3> &cps) {
  const std::size_t n = cps.size();
  if (n < 2)
    throw ValidationError("open Catmull-Rom curve needs at least 2 points");
  reject_adjacent_duplicates(cps, false);
  auto at = [&](std::ptrdiff_t k) -> Vec3 {
    if (k < 0)
      return 2.0 * cps[0] - cps[1];
    if (k >= static_cast<std::ptrdiff_t>(n))
      return 2.0 * cps[n - 1] - cps[n - 2];
    return cps[k];
  };
  std::vector<CubicSegment> out;
  for (std::ptrdiff_t k = 0; k + 1 < static_cast<std::ptrdiff_t>(n); ++k)
    out.push_back(catmull_rom_piece(at(k - 1), at(k), at(k + 1), at(k + 2)));
  return out;
}

LoopGeometry make_polyline_loop(const std::vector<Vec3> &vertices,
                                bool closed) {
  LoopGeometry loop;
  loop.kind = LoopKind::Polyline;
  loop.closed = closed;
  loop.control_points = vertices;
  const std::size_t n = vertices.size();
  const std::size_t count = closed ? n : (n == 0 ? 0 : n - 1);
  loop.segments.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    loop.segments.push_back(
        CubicSegment::line(vertices[i], vertices[(i + 1) % n]));
  return loop;
}

LoopGeometry make_catmull_rom_loop(const std::vector<Vec3> &cps) {
  LoopGeometry loop;
  loop.kind = LoopKind::CatmullRom;
  loop.closed = true;
  loop.control_points = cps;
  loop.segments = catmull_rom_to_cubics(cps);
  return loop;
}

LoopGeometry make_cubic_loop(std::vector<CubicSegment> segments, bool closed) {
  LoopGeometry loop;
  loop.kind = LoopKind::Cubics;
  loop.closed = closed;
  loop.segments = std::move(segments);
  return loop;
}

double average_coordinate_magnitude(const std::vector<LoopGeometry> &loops) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto &loop : loops) {
    if (loop.kind == LoopKind::Cubics) {
      for (const auto &seg : loop.segments) {
        sum += seg.start().cwiseAbs().sum();
        count += 3;
      }
      if (!loop.closed && !loop.segments.empty()) {
        sum += loop.segments.back().end().cwiseAbs().sum();
        count += 3;
      }
    } else {
      for (const auto &p : loop.control_points) {
        sum += p.cwiseAbs().sum();
        count += 3;
      }
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

void validate_loop(const LoopGeometry &loop, double xi) {
  for (const auto &p : loop.control_points)
    if (!p.allFinite())
      throw ValidationError("non-finite coordinate in loop");
  const std::size_t n = loop.segments.size();
  if (loop.closed && n < 3)
    throw ValidationError("closed loop needs at least 3 segments");
  if (n == 0)
    throw ValidationError("loop has no segments");
  for (const auto &seg : loop.segments) {
    if (!seg.is_finite())
      throw ValidationError("non-finite segment coefficient");
    if (!(seg.t_lo >= 0.0 && seg.t_lo < seg.t_hi && seg.t_hi <= 1.0))
      throw ValidationError("segment parameter window must satisfy "
                            "0 <= t_lo < t_hi <= 1");
  }
  const double tol = 1e-12 * xi;
  const std::size_t joints = loop.closed ? n : n - 1;
  for (std::size_t k = 0; k < joints; ++k) {
    const Vec3 gap =
        loop.segments[k].end() - loop.segments[(k + 1) % n].start();
    if (!(gap.norm() <= tol)) {
      std::ostringstream msg;
      msg << "segments " << k << " and " << (k + 1) % n
          << " do not share an endpoint (gap " << gap.norm() << ")";
      throw ValidationError(msg.str());
    }
  }
}

void validate_polyline(const PolylineLoop &loop, double xi) {
  if (loop.size() < 3)
    throw ValidationError("polyline loop needs at least 3 vertices");
  for (const auto &v : loop.vertices)
    if (!v.allFinite())
      throw ValidationError("non-finite polyline vertex");
  for (std::size_t i = 0; i < loop.size(); ++i)
    if (!((loop.vertex(i + 1) - loop.vertices[i]).norm() >
          kMachineEpsilon * xi))
      throw ValidationError("zero-length polyline segment at " +
                            std::to_string(i));
}

CurveModel make_model(std::vector<LoopGeometry> loops) {
  CurveModel model;
  model.loops = std::move(loops);
  model.xi = average_coordinate_magnitude(model.loops);
  if (!std::isfinite(model.xi))
    throw ValidationError("non-finite coordinate in model");
  if (!model.loops.empty() && !(model.xi > 0.0))
    throw ValidationError("model has zero coordinate magnitude");
  for (std::size_t i = 0; i < model.loops.size(); ++i) {
    try {
      validate_loop(model.loops[i], model.xi);
    } catch (const ValidationError &e) {
      throw ValidationError("loop " + std::to_string(i) + ": " + e.what());
    }
  }
  return model;
}

CurveModel model_from_polylines(const std::vector<PolylineLoop> &loops) {
  std::vector<LoopGeometry> geo;
  geo.reserve(loops.size());
  for (const auto &p : loops)
    geo.push_back(make_polyline_loop(p.vertices));
  return make_model(std::move(geo));
}

namespace {

Vec3 parse_point(const json &j) {
  if (!j.is_array() || j.size() != 3)
    throw ParseError("point must be an array of 3 numbers");
  Vec3 p;
  for (int k = 0; k < 3; ++k) {
    if (j[k].is_number())
      p[k] = j[k].get<double>();
    else if (j[k].is_null())
      p[k] = std::numeric_limits<double>::quiet_NaN();
    else
      throw ParseError("coordinate must be a number");
  }
  return p;
}

std::vector<Vec3> parse_points(const json &j) {
  if (!j.is_array())
    throw ParseError("\"points\" must be an array");
  std::vector<Vec3> pts;
  pts.reserve(j.size());
  for (const auto &p : j)
    pts.push_back(parse_point(p));
  return pts;
}

LoopGeometry parse_loop(const json &j) {
  if (!j.is_object() || !j.contains("type"))
    throw ParseError("loop must be an object with a \"type\"");
  const std::string type = j.at("type").get<std::string>();
  const bool closed = j.value("closed", true);
  if (type == "polyline") {
    return make_polyline_loop(parse_points(j.at("points")), closed);
  }
  if (type == "catmullrom") {
    auto pts = parse_points(j.at("points"));
    for (const auto &p : pts)
      if (!p.allFinite())
        throw ValidationError("non-finite Catmull-Rom control point");
    if (closed)
      return make_catmull_rom_loop(pts);
    LoopGeometry loop = make_cubic_loop(catmull_rom_open_to_cubics(pts), false);
    loop.kind = LoopKind::CatmullRom;
    loop.control_points = pts;
    return loop;
  }
  if (type == "cubics") {
    std::vector<CubicSegment> segs;
    for (const auto &s : j.at("segments")) {
      CubicSegment seg;
      const auto &c = s.at("coeffs");
      if (!c.is_array() || c.size() != 4)
        throw ParseError("cubic needs 4 coefficient vectors");
      for (int k = 0; k < 4; ++k)
        seg.coeffs[k] = parse_point(c[k]);
      if (s.contains("t")) {
        const auto &t = s.at("t");
        if (!t.is_array() || t.size() != 2)
          throw ParseError("\"t\" must be [lo, hi]");
        seg.t_lo = t[0].get<double>();
        seg.t_hi = t[1].get<double>();
      }
      segs.push_back(seg);
    }
    return make_cubic_loop(std::move(segs), closed);
  }
  throw ParseError("unknown loop type \"" + type + "\"");
}

json point_json(const Vec3 &p) { return json::array({p.x(), p.y(), p.z()}); }

json loop_json(const LoopGeometry &loop) {
  json j;
  j["closed"] = loop.closed;
  switch (loop.kind) {
  case LoopKind::Polyline:
    j["type"] = "polyline";
    break;
  case LoopKind::CatmullRom:
    j["type"] = "catmullrom";
    break;
  case LoopKind::Cubics:
    j["type"] = "cubics";
    break;
  }
  if (loop.kind == LoopKind::Cubics) {
    json segs = json::array();
    for (const auto &s : loop.segments) {
      json c = json::array();
      for (const auto &a : s.coeffs)
        c.push_back(point_json(a));
      segs.push_back({{"coeffs", c}, {"t", json::array({s.t_lo, s.t_hi})}});
    }
    j["segments"] = segs;
  } else {
    json pts = json::array();
    for (const auto &p : loop.control_points)
      pts.push_back(point_json(p));
    j["points"] = pts;
  }
  return j;
}

} // namespace

CurveModel parse_json_curves(const std::string &text, bool allow_open) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("json-curves: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("loops") || !doc["loops"].is_array())
    throw ParseError("json-curves: top level must be {\"loops\": [...]}");
  std::vector<LoopGeometry> loops;
  try {
    for (const auto &l : doc["loops"]) {
      loops.push_back(parse_loop(l));
      if (!loops.back().closed && !allow_open)
        throw ValidationError("open loops are only accepted in braid inputs");
    }
  } catch (const json::exception &e) {
    throw ParseError(std::string("json-curves: ") + e.what());
  }
  return make_model(std::move(loops));
}

CurveModel parse_polyline_text(const std::string &text) {
  std::vector<LoopGeometry> loops;
  std::vector<Vec3> current;
  auto flush = [&] {
    if (!current.empty())
      loops.push_back(make_polyline_loop(current));
    current.clear();
  };
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
      flush();
      continue;
    }
    if (line[first] == '#')
      continue;
    std::istringstream ls(line.substr(first));
    std::string tag;
    std::string xs, ys, zs, extra;
    ls >> tag >> xs >> ys >> zs;
    if (tag != "v" || zs.empty() || (ls >> extra))
      throw ParseError("polyline-text line " + std::to_string(lineno) +
                       ": expected \"v x y z\"");
    Vec3 p;
    try {
      p = Vec3(std::stod(xs), std::stod(ys), std::stod(zs));
    } catch (const std::exception &) {
      throw ParseError("polyline-text line " + std::to_string(lineno) +
                       ": bad number");
    }
    current.push_back(p);
  }
  flush();
  return make_model(std::move(loops));
}

ModelFormat format_from_path(const std::string &path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  return (ext == ".txt" || ext == ".poly") ? ModelFormat::PolylineText
                                           : ModelFormat::JsonCurves;
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw LinkcertError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, const std::string &contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw LinkcertError("cannot write " + path);
  out << contents;
  if (!out)
    throw LinkcertError("write failed for " + path);
}

CurveModel load_model(const std::string &path, ModelFormat format) {
  const std::string text = read_file(path);
  return format == ModelFormat::JsonCurves ? parse_json_curves(text)
                                           : parse_polyline_text(text);
}

std::string to_json_curves(const CurveModel &model) {
  json loops = json::array();
  for (const auto &l : model.loops)
    loops.push_back(loop_json(l));
  json doc;
  doc["loops"] = loops;
  doc["meta"] = {{"catmullrom", "uniform"}};
  return doc.dump();
}

std::string to_polyline_text(const std::vector<PolylineLoop> &loops) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto &loop : loops) {
    for (const auto &v : loop.vertices)
      out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    out << '\n';
  }
  return out.str();
}

void save_model(const CurveModel &model, const std::string &path) {
  if (format_from_path(path) == ModelFormat::JsonCurves) {
    write_file(path, to_json_curves(model) + "\n");
    return;
  }
  std::vector<PolylineLoop> loops;
  for (const auto &l : model.loops) {
    if (l.kind != LoopKind::Polyline || !l.closed)
      throw LinkcertError("polyline-text holds closed polylines only");
    loops.push_back({l.control_points});
  }
  write_file(path, to_polyline_text(loops));
}

std::string model_digest(const CurveModel &model) {
  const std::string text = to_json_curves(model);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) !=
      1)
    throw LinkcertError("SHA-256 digest failed");
  std::ostringstream hex;
  hex << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i)
    hex << std::setw(2) << static_cast<int>(md[i]);
  return hex.str();
}

} // namespace linkcert
