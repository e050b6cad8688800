#pragma once

#include <string>
#include <vector>

#include "eitrec/common.hpp"

namespace eit {

struct Ellipse {
  Vec2 center{0.0, 0.0};
  double semi_a = 0.4;
  double semi_b = 0.2;
  double rotation = 0.0;  // radians, counterclockwise
};

struct Circle {
  Vec2 center{0.0, 0.0};
  double radius = 0.25;
};

/// Analytic description of the inclusion subdomain: a single ellipse or a
/// union of pairwise disjoint circles, all strictly inside the unit disk.
struct ShapeSpec {
  enum class Kind { ellipse, circles };

  Kind kind = Kind::ellipse;
  Ellipse ellipse;
  std::vector<Circle> circles;

  static ShapeSpec make_ellipse(Vec2 center, double semi_a, double semi_b, double rotation);
  static ShapeSpec make_circles(std::vector<Circle> cs);

  /// Default phantoms used throughout the experiments.
  static ShapeSpec default_ellipse();
  static ShapeSpec default_circles();

  /// Parses "ellipse cx cy ax ay rot" or "circles cx1 cy1 r1 [cx2 cy2 r2 ...]".
  static ShapeSpec parse(const std::string& text);
  std::string to_string() const;

  /// Signed implicit value of the nearest component: negative inside,
  /// zero on a boundary curve, positive outside. Approximately a distance.
  double signed_distance(Vec2 p) const;

  bool contains(Vec2 p) const { return signed_distance(p) <= 1e-12; }

  double area() const;

  /// Largest distance from the origin to any point of the shape.
  double max_radius_from_origin() const;

  /// Throws if the shape touches/exits the unit circle or circles overlap.
  void validate_inside_unit_disk() const;

  /// Polylines sampling the boundary curves with spacing <= h, points exactly
  /// on the analytic curves. One closed loop per component (last != first).
  std::vector<std::vector<Vec2>> sample_interfaces(double h) const;
};

/// Characteristic function of the shape: 1 inside or on the boundary, else 0.
inline int chi_shape(const ShapeSpec& shape, Vec2 p) { return shape.contains(p) ? 1 : 0; }

}  // namespace eit
