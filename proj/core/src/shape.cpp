#include "eitrec/shape.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace eit {

namespace {

Vec2 to_ellipse_frame(const Ellipse& e, Vec2 p) {
  const double c = std::cos(e.rotation);
  const double s = std::sin(e.rotation);
  const Vec2 d = p - e.center;
  return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

Vec2 from_ellipse_frame(const Ellipse& e, Vec2 q) {
  const double c = std::cos(e.rotation);
  const double s = std::sin(e.rotation);
  return {e.center.x + c * q.x - s * q.y, e.center.y + s * q.x + c * q.y};
}

// First-order approximation of the signed distance from the implicit
// rho(p) = sqrt((x/a)^2 + (y/b)^2): (rho - 1) / |grad rho|.
double ellipse_signed_distance(const Ellipse& e, Vec2 p) {
  const Vec2 q = to_ellipse_frame(e, p);
  const double xa = q.x / e.semi_a;
  const double yb = q.y / e.semi_b;
  const double rho = std::hypot(xa, yb);
  if (rho < 1e-14) return -std::min(e.semi_a, e.semi_b);
  const double gx = xa / e.semi_a;
  const double gy = yb / e.semi_b;
  const double grad = std::hypot(gx, gy) / rho;
  return (rho - 1.0) * rho / std::max(grad * rho, 1e-300);
}

double circle_signed_distance(const Circle& c, Vec2 p) { return dist(p, c.center) - c.radius; }

}  // namespace

ShapeSpec ShapeSpec::make_ellipse(Vec2 center, double semi_a, double semi_b, double rotation) {
  if (semi_a <= 0.0 || semi_b <= 0.0) throw std::invalid_argument("ellipse semi-axes must be positive");
  ShapeSpec s;
  s.kind = Kind::ellipse;
  s.ellipse = {center, semi_a, semi_b, rotation};
  return s;
}

ShapeSpec ShapeSpec::make_circles(std::vector<Circle> cs) {
  if (cs.empty()) throw std::invalid_argument("at least one circle required");
  for (const auto& c : cs)
    if (c.radius <= 0.0) throw std::invalid_argument("circle radius must be positive");
  ShapeSpec s;
  s.kind = Kind::circles;
  s.circles = std::move(cs);
  return s;
}

ShapeSpec ShapeSpec::default_ellipse() { return make_ellipse({0.0, 0.0}, 0.4, 0.2, 0.0); }

ShapeSpec ShapeSpec::default_circles() {
  return make_circles({Circle{{-0.3, 0.3}, 0.25}, Circle{{0.35, -0.25}, 0.15}});
}

ShapeSpec ShapeSpec::parse(const std::string& text) {
  std::istringstream in(text);
  std::string kind;
  in >> kind;
  if (kind == "ellipse") {
    double cx, cy, ax, ay, rot;
    if (!(in >> cx >> cy >> ax >> ay >> rot))
      throw std::invalid_argument("expected: ellipse cx cy ax ay rot");
    return make_ellipse({cx, cy}, ax, ay, rot);
  }
  if (kind == "circles") {
    std::vector<Circle> cs;
    double cx, cy, r;
    while (in >> cx >> cy >> r) cs.push_back({{cx, cy}, r});
    if (cs.empty()) throw std::invalid_argument("expected: circles cx1 cy1 r1 ...");
    return make_circles(std::move(cs));
  }
  throw std::invalid_argument("unknown shape kind '" + kind + "'");
}

std::string ShapeSpec::to_string() const {
  std::string out;
  if (kind == Kind::ellipse) {
    out = "ellipse " + fmt17(ellipse.center.x) + " " + fmt17(ellipse.center.y) + " " +
          fmt17(ellipse.semi_a) + " " + fmt17(ellipse.semi_b) + " " + fmt17(ellipse.rotation);
  } else {
    out = "circles";
    for (const auto& c : circles)
      out += " " + fmt17(c.center.x) + " " + fmt17(c.center.y) + " " + fmt17(c.radius);
  }
  return out;
}

double ShapeSpec::signed_distance(Vec2 p) const {
  if (kind == Kind::ellipse) return ellipse_signed_distance(ellipse, p);
  double d = circle_signed_distance(circles[0], p);
  for (size_t i = 1; i < circles.size(); ++i)
    d = std::min(d, circle_signed_distance(circles[i], p));
  return d;
}

double ShapeSpec::area() const {
  if (kind == Kind::ellipse) return pi * ellipse.semi_a * ellipse.semi_b;
  double a = 0.0;
  for (const auto& c : circles) a += pi * c.radius * c.radius;
  return a;
}

double ShapeSpec::max_radius_from_origin() const {
  if (kind == Kind::ellipse) {
    // Sample the boundary; exact maximization is a quartic root problem.
    double r = 0.0;
    for (int i = 0; i < 720; ++i) {
      const double t = 2.0 * pi * i / 720.0;
      const Vec2 p = from_ellipse_frame(
          ellipse, {ellipse.semi_a * std::cos(t), ellipse.semi_b * std::sin(t)});
      r = std::max(r, norm(p));
    }
    return r;
  }
  double r = 0.0;
  for (const auto& c : circles) r = std::max(r, norm(c.center) + c.radius);
  return r;
}

void ShapeSpec::validate_inside_unit_disk() const {
  if (max_radius_from_origin() >= 1.0 - 1e-9)
    throw std::invalid_argument("shape touches or crosses the unit circle: " + to_string());
  if (kind == Kind::circles) {
    for (size_t i = 0; i < circles.size(); ++i)
      for (size_t j = i + 1; j < circles.size(); ++j) {
        const double gap = dist(circles[i].center, circles[j].center) -
                           circles[i].radius - circles[j].radius;
        if (gap <= 0.0) throw std::invalid_argument("circles must be pairwise disjoint");
      }
  }
}

std::vector<std::vector<Vec2>> ShapeSpec::sample_interfaces(double h) const {
  std::vector<std::vector<Vec2>> loops;
  if (kind == Kind::ellipse) {
    // Parameter speed is bounded by max(a, b), so this count bounds spacing by h.
    const double amax = std::max(ellipse.semi_a, ellipse.semi_b);
    const int n = std::max(16, static_cast<int>(std::ceil(2.0 * pi * amax / h)));
    std::vector<Vec2> loop(n);
    for (int i = 0; i < n; ++i) {
      const double t = 2.0 * pi * i / n;
      loop[i] = from_ellipse_frame(
          ellipse, {ellipse.semi_a * std::cos(t), ellipse.semi_b * std::sin(t)});
    }
    loops.push_back(std::move(loop));
  } else {
    for (const auto& c : circles) {
      const int n = std::max(12, static_cast<int>(std::ceil(2.0 * pi * c.radius / h)));
      std::vector<Vec2> loop(n);
      for (int i = 0; i < n; ++i) {
        const double t = 2.0 * pi * i / n;
        loop[i] = {c.center.x + c.radius * std::cos(t), c.center.y + c.radius * std::sin(t)};
      }
      loops.push_back(std::move(loop));
    }
  }
  return loops;
}

}  // namespace eit
