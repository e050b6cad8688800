#include "eitrec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

namespace eit {

double TriMesh::total_area() const {
  double a = 0.0;
  for (int t = 0; t < triangle_count(); ++t) a += signed_area(t);
  return a;
}

double TriMesh::min_angle_deg() const {
  double worst = 180.0;
  for (const auto& tr : triangles) {
    for (int k = 0; k < 3; ++k) {
      const Vec2 a = vertices[tr[k]];
      const Vec2 b = vertices[tr[(k + 1) % 3]];
      const Vec2 c = vertices[tr[(k + 2) % 3]];
      const Vec2 u = b - a, v = c - a;
      const double ang = std::atan2(std::abs(cross(u, v)), dot(u, v));
      worst = std::min(worst, ang * 180.0 / pi);
    }
  }
  return worst;
}

double TriMesh::max_edge_length() const {
  double worst = 0.0;
  for (const auto& tr : triangles)
    for (int k = 0; k < 3; ++k)
      worst = std::max(worst, dist(vertices[tr[k]], vertices[tr[(k + 1) % 3]]));
  return worst;
}

std::vector<bool> TriMesh::boundary_vertex_mask() const {
  std::vector<bool> mask(vertices.size(), false);
  for (const auto& e : boundary_edges) {
    mask[e[0]] = true;
    mask[e[1]] = true;
  }
  return mask;
}

namespace {
uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<uint64_t>(a) << 32) | static_cast<uint64_t>(b);
}
}  // namespace

void TriMesh::validate() const {
  const int nv = vertex_count();
  if (nv < 3 || triangles.empty()) throw MeshError("mesh has too few vertices or triangles");
  for (const auto& p : vertices)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw MeshError("non-finite vertex coordinate");

  for (size_t t = 0; t < triangles.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int v = triangles[t][k];
      if (v < 0 || v >= nv) throw MeshError("triangle vertex index out of range");
    }
    if (signed_area(static_cast<int>(t)) <= 0.0)
      throw MeshError("triangle " + std::to_string(t) + " is degenerate or clockwise");
  }

  std::map<uint64_t, int> edge_count;
  for (const auto& tr : triangles)
    for (int k = 0; k < 3; ++k) ++edge_count[edge_key(tr[k], tr[(k + 1) % 3])];

  std::set<uint64_t> boundary_set;
  for (const auto& e : boundary_edges) boundary_set.insert(edge_key(e[0], e[1]));
  if (boundary_set.size() != boundary_edges.size()) throw MeshError("duplicate boundary edge");

  int n_single = 0;
  for (const auto& [key, count] : edge_count) {
    if (count > 2) throw MeshError("edge shared by more than two triangles");
    if (count == 1) {
      ++n_single;
      if (!boundary_set.count(key)) throw MeshError("boundary edge missing from boundary list");
    } else if (boundary_set.count(key)) {
      throw MeshError("interior edge listed as boundary");
    }
  }
  if (n_single != static_cast<int>(boundary_edges.size()))
    throw MeshError("boundary edge count mismatch");

  // Single closed loop covering exactly the boundary vertices.
  std::set<int> boundary_verts;
  for (const auto& e : boundary_edges) {
    boundary_verts.insert(e[0]);
    boundary_verts.insert(e[1]);
  }
  if (boundary_cycle.size() != boundary_verts.size())
    throw MeshError("boundary cycle does not cover the boundary vertices");
  std::set<int> cycle_set(boundary_cycle.begin(), boundary_cycle.end());
  if (cycle_set != boundary_verts) throw MeshError("boundary cycle vertex set mismatch");
  const int nb = static_cast<int>(boundary_cycle.size());
  for (int i = 0; i < nb; ++i) {
    const uint64_t key = edge_key(boundary_cycle[i], boundary_cycle[(i + 1) % nb]);
    if (!boundary_set.count(key)) throw MeshError("boundary cycle step is not a boundary edge");
  }

  // Euler characteristic of a disk: V - E + F = 1.
  const long long V = nv;
  const long long E = static_cast<long long>(edge_count.size());
  const long long F = static_cast<long long>(triangles.size());
  if (V - E + F != 1) throw MeshError("Euler characteristic is not 1 (not a disk)");
}

double BoundaryParam::total_length() const {
  double s = 0.0;
  for (double l : edge_lengths) s += l;
  return s;
}

BoundaryParam boundary_param(const TriMesh& mesh) {
  if (mesh.boundary_cycle.empty()) throw MeshError("mesh has no boundary");
  BoundaryParam bp;
  bp.cycle = mesh.boundary_cycle;
  const int n = bp.size();
  bp.angles.resize(n);
  bp.edge_lengths.resize(n);
  bp.vertex_weights.resize(n);
  bp.cycle_pos.assign(mesh.vertex_count(), -1);
  for (int i = 0; i < n; ++i) {
    bp.angles[i] = angle_of(mesh.vertices[bp.cycle[i]]);
    bp.cycle_pos[bp.cycle[i]] = i;
  }
  for (int i = 0; i < n; ++i)
    bp.edge_lengths[i] = dist(mesh.vertices[bp.cycle[i]], mesh.vertices[bp.cycle[(i + 1) % n]]);
  for (int i = 0; i < n; ++i)
    bp.vertex_weights[i] = 0.5 * (bp.edge_lengths[(i + n - 1) % n] + bp.edge_lengths[i]);
  return bp;
}

bool same_mesh(const TriMesh& a, const TriMesh& b) {
  if (a.vertices.size() != b.vertices.size() || a.triangles != b.triangles ||
      a.boundary_edges != b.boundary_edges)
    return false;
  for (size_t i = 0; i < a.vertices.size(); ++i)
    if (a.vertices[i].x != b.vertices[i].x || a.vertices[i].y != b.vertices[i].y) return false;
  return true;
}

bool conforms_to_shape(const TriMesh& mesh, const ShapeSpec& shape, double on_tol) {
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    int want = -1;  // 0 or 1 once a non-interface sample is seen
    bool ok = true;
    auto account = [&](Vec2 p) {
      const double sd = shape.signed_distance(p);
      if (std::abs(sd) <= on_tol) return;  // interface vertex, excused
      const int cls = sd < 0.0 ? 1 : 0;
      if (want == -1)
        want = cls;
      else if (want != cls)
        ok = false;
    };
    const auto& tr = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) account(mesh.vertices[tr[k]]);
    account(mesh.centroid(t));
    if (!ok) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Disk mesher: ring-graded point set, incremental Delaunay triangulation with
// tolerance-guarded Lawson flips, constrained recovery of interface polylines,
// and Laplacian smoothing of the free vertices.
// ---------------------------------------------------------------------------

namespace {

struct DTri {
  std::array<int, 3> v;    // counterclockwise
  std::array<int, 3> adj;  // adj[e]: neighbor across the edge opposite v[e]
  bool alive = true;
};

class Triangulator {
 public:
  std::vector<Vec2> pts;
  std::vector<DTri> tris;
  std::vector<int> vert_tri;  // one alive triangle per vertex
  std::unordered_set<uint64_t> constrained;

  static double orient(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

  // > 0 when d lies strictly inside the circumcircle of ccw (a, b, c),
  // with an absolute guard scaled to the local point spread.
  static double in_circle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double ax = a.x - d.x, ay = a.y - d.y;
    const double bx = b.x - d.x, by = b.y - d.y;
    const double cx = c.x - d.x, cy = c.y - d.y;
    const double a2 = ax * ax + ay * ay;
    const double b2 = bx * bx + by * by;
    const double c2 = cx * cx + cy * cy;
    return ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);
  }

  static double spread4(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double sx = std::max({a.x, b.x, c.x, d.x}) - std::min({a.x, b.x, c.x, d.x});
    const double sy = std::max({a.y, b.y, c.y, d.y}) - std::min({a.y, b.y, c.y, d.y});
    return std::max(sx, sy);
  }

  bool should_flip(int t, int e) const {
    const int u = tris[t].adj[e];
    if (u < 0) return false;
    if (constrained.count(edge_key(tris[t].v[(e + 1) % 3], tris[t].v[(e + 2) % 3]))) return false;
    const int e2 = opposite_index(u, t);
    const Vec2 a = pts[tris[t].v[0]], b = pts[tris[t].v[1]], c = pts[tris[t].v[2]];
    const Vec2 d = pts[tris[u].v[e2]];
    const double s = spread4(a, b, c, d);
    const double det = in_circle(a, b, c, d);
    return det > 1e-11 * s * s * s * s;
  }

  int opposite_index(int u, int t) const {
    for (int k = 0; k < 3; ++k)
      if (tris[u].adj[k] == t) return k;
    throw MeshError("adjacency inconsistency in triangulation");
  }

  void set_vert_tri(int t) {
    for (int k = 0; k < 3; ++k) vert_tri[tris[t].v[k]] = t;
  }

  // Initial fan triangulation of the convex hull polygon 0..nb-1 (ccw).
  void init_polygon(int nb) {
    vert_tri.assign(pts.size(), -1);
    tris.clear();
    tris.reserve(4 * pts.size());
    for (int i = 1; i + 1 < nb; ++i) {
      DTri t;
      t.v = {0, i, i + 1};
      t.adj = {-1, -1, -1};
      tris.push_back(t);
    }
    const int m = nb - 2;
    for (int i = 0; i < m; ++i) {
      tris[i].adj[0] = -1;                      // edge (i, i+1) on hull
      tris[i].adj[1] = (i + 1 < m) ? i + 1 : -1;  // edge (i+1, 0)
      tris[i].adj[2] = (i > 0) ? i - 1 : -1;      // edge (0, i)
      set_vert_tri(i);
    }
  }

  struct Location {
    int tri = -1;
    int on_edge = -1;  // edge index within tri, or -1 when strictly inside
  };

  Location locate(Vec2 p, int hint) const {
    int t = (hint >= 0 && hint < static_cast<int>(tris.size()) && tris[hint].alive)
                ? hint
                : first_alive();
    const int cap = 8 * static_cast<int>(tris.size()) + 64;
    for (int step = 0; step < cap; ++step) {
      int worst_edge = -1;
      double worst = 0.0;
      int on_edge = -1;
      for (int e = 0; e < 3; ++e) {
        const Vec2 A = pts[tris[t].v[(e + 1) % 3]];
        const Vec2 B = pts[tris[t].v[(e + 2) % 3]];
        const double o = orient(A, B, p);
        const double s = spread4(A, B, p, p);
        if (o < -1e-13 * s * s) {
          if (worst_edge < 0 || o < worst) {
            worst_edge = e;
            worst = o;
          }
        } else if (std::abs(o) <= 1e-13 * s * s) {
          on_edge = e;
        }
      }
      if (worst_edge < 0) return {t, on_edge};
      const int next = tris[t].adj[worst_edge];
      if (next < 0) throw MeshError("point located outside the triangulation hull");
      t = next;
    }
    return exhaustive_locate(p);
  }

  Location exhaustive_locate(Vec2 p) const {
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (!tris[t].alive) continue;
      bool inside = true;
      int on_edge = -1;
      for (int e = 0; e < 3 && inside; ++e) {
        const Vec2 A = pts[tris[t].v[(e + 1) % 3]];
        const Vec2 B = pts[tris[t].v[(e + 2) % 3]];
        const double o = orient(A, B, p);
        const double s = spread4(A, B, p, p);
        if (o < -1e-13 * s * s) inside = false;
        else if (std::abs(o) <= 1e-13 * s * s) on_edge = e;
      }
      if (inside) return {t, on_edge};
    }
    throw MeshError("point not inside any triangle");
  }

  int first_alive() const {
    for (int t = static_cast<int>(tris.size()) - 1; t >= 0; --t)
      if (tris[t].alive) return t;
    throw MeshError("empty triangulation");
  }

  // Returns false when the point cannot be inserted cleanly (on a hull edge).
  bool insert_point(int pi, int& hint) {
    const Vec2 p = pts[pi];
    const Location loc = locate(p, hint);
    std::vector<std::pair<int, int>> suspects;
    if (loc.on_edge >= 0) {
      if (tris[loc.tri].adj[loc.on_edge] < 0) return false;  // on hull edge: drop
      split_edge(loc.tri, loc.on_edge, pi, suspects);
    } else {
      split_triangle(loc.tri, pi, suspects);
    }
    legalize(pi, suspects);
    hint = vert_tri[pi];
    return true;
  }

  void split_triangle(int t, int pi, std::vector<std::pair<int, int>>& suspects) {
    const DTri old = tris[t];
    const int n1 = static_cast<int>(tris.size());
    const int n2 = n1 + 1;
    // (v0,v1,p), (v1,v2,p), (v2,v0,p)
    tris[t] = {{old.v[0], old.v[1], pi}, {n1, n2, old.adj[2]}, true};
    tris.push_back({{old.v[1], old.v[2], pi}, {n2, t, old.adj[0]}, true});
    tris.push_back({{old.v[2], old.v[0], pi}, {t, n1, old.adj[1]}, true});
    if (old.adj[2] >= 0) relink(old.adj[2], t, t);
    if (old.adj[0] >= 0) relink(old.adj[0], t, n1);
    if (old.adj[1] >= 0) relink(old.adj[1], t, n2);
    set_vert_tri(t);
    set_vert_tri(n1);
    set_vert_tri(n2);
    suspects.push_back({t, 2});
    suspects.push_back({n1, 2});
    suspects.push_back({n2, 2});
  }

  void split_edge(int t, int e, int pi, std::vector<std::pair<int, int>>& suspects) {
    const int u = tris[t].adj[e];
    const int e2 = opposite_index(u, t);
    const int apex_t = tris[t].v[e];
    const int P = tris[t].v[(e + 1) % 3];
    const int Q = tris[t].v[(e + 2) % 3];
    const int apex_u = tris[u].v[e2];
    // t = (apex_t, P, Q), u = (apex_u, Q, P) as cyclic orders.
    const int tAdjP = tris[t].adj[(e + 1) % 3];  // across (Q, apex_t)
    const int tAdjQ = tris[t].adj[(e + 2) % 3];  // across (apex_t, P)
    const int uAdjQ = tris[u].adj[(e2 + 1) % 3];  // across (P, apex_u)
    const int uAdjP = tris[u].adj[(e2 + 2) % 3];  // across (apex_u, Q)

    const int t2 = static_cast<int>(tris.size());
    const int u2 = t2 + 1;
    // t  := (apex_t, P, p)   t2 := (apex_t, p, Q)
    // u  := (apex_u, p, P)   u2 := (apex_u, Q, p)
    tris[t] = {{apex_t, P, pi}, {u, t2, tAdjQ}, true};
    tris.push_back({{apex_t, pi, Q}, {u2, tAdjP, t}, true});
    tris[u] = {{apex_u, pi, P}, {t, uAdjQ, u2}, true};
    tris.push_back({{apex_u, Q, pi}, {t2, u, uAdjP}, true});
    if (tAdjP >= 0) relink(tAdjP, t, t2);
    if (uAdjP >= 0) relink(uAdjP, u, u2);
    set_vert_tri(t);
    set_vert_tri(t2);
    set_vert_tri(u);
    set_vert_tri(u2);
    suspects.push_back({t, 2});
    suspects.push_back({t2, 1});
    suspects.push_back({u, 1});
    suspects.push_back({u2, 2});
  }

  void relink(int t, int from, int to) {
    for (int k = 0; k < 3; ++k)
      if (tris[t].adj[k] == from) {
        tris[t].adj[k] = to;
        return;
      }
    throw MeshError("relink target not found");
  }

  // Lawson legalization of the edges opposite the new point pi.
  void legalize(int pi, std::vector<std::pair<int, int>> stack) {
    int guard = 0;
    while (!stack.empty()) {
      if (++guard > 200000) throw MeshError("legalization did not terminate");
      auto [t, e] = stack.back();
      stack.pop_back();
      if (!tris[t].alive || tris[t].v[e] != pi) continue;
      if (!should_flip(t, e)) continue;
      const int u = tris[t].adj[e];
      flip(t, e);
      // After flip both triangles contain pi; their edges opposite pi are suspect.
      for (int w : {t, u})
        for (int k = 0; k < 3; ++k)
          if (tris[w].v[k] == pi) stack.push_back({w, k});
    }
  }

  // Flips the edge opposite vertex e of triangle t. Afterwards t and u share
  // the new diagonal (t.v[e], old apex of u).
  void flip(int t, int e) {
    const int u = tris[t].adj[e];
    const int e2 = opposite_index(u, t);
    const int p = tris[t].v[e];
    const int P = tris[t].v[(e + 1) % 3];
    const int Q = tris[t].v[(e + 2) % 3];
    const int d = tris[u].v[e2];
    const int tP = tris[t].adj[(e + 1) % 3];   // across (Q, p)
    const int tQ = tris[t].adj[(e + 2) % 3];   // across (p, P)
    const int uQ = tris[u].adj[(e2 + 1) % 3];  // across (P, d)
    const int uP = tris[u].adj[(e2 + 2) % 3];  // across (d, Q)
    tris[t] = {{p, P, d}, {uQ, u, tQ}, true};
    tris[u] = {{p, d, Q}, {uP, tP, t}, true};
    if (uQ >= 0) relink(uQ, u, t);
    if (tP >= 0) relink(tP, t, u);
    set_vert_tri(t);
    set_vert_tri(u);
  }

  bool flip_is_valid(int t, int e) const {
    const int u = tris[t].adj[e];
    if (u < 0) return false;
    const int e2 = opposite_index(u, t);
    const Vec2 p = pts[tris[t].v[e]];
    const Vec2 P = pts[tris[t].v[(e + 1) % 3]];
    const Vec2 Q = pts[tris[t].v[(e + 2) % 3]];
    const Vec2 d = pts[tris[u].v[e2]];
    const double s1 = spread4(p, P, d, d);
    const double s2 = spread4(p, d, Q, Q);
    return orient(p, P, d) > 1e-13 * s1 * s1 && orient(p, d, Q) > 1e-13 * s2 * s2;
  }

  bool edge_exists(int a, int b) const {
    bool found = false;
    visit_star(a, [&](int t) {
      for (int k = 0; k < 3; ++k)
        if (tris[t].v[k] == b) found = true;
      return !found;
    });
    return found;
  }

  int index_of(int t, int a) const {
    for (int k = 0; k < 3; ++k)
      if (tris[t].v[k] == a) return k;
    throw MeshError("vertex star walk lost its center");
  }

  // Visits alive triangles around vertex a; fn returns false to stop early.
  template <typename Fn>
  void visit_star(int a, Fn fn) const {
    const int t0 = vert_tri[a];
    if (t0 < 0 || !tris[t0].alive) throw MeshError("stale vertex-triangle map");
    int t = t0;
    int guard = 0;
    while (true) {
      if (++guard > 100000) throw MeshError("vertex star walk did not terminate");
      if (!fn(t)) return;
      const int next = tris[t].adj[(index_of(t, a) + 1) % 3];
      if (next == t0) return;  // closed orbit
      if (next < 0) break;     // hit the hull: rewind the other way
      t = next;
    }
    t = t0;
    guard = 0;
    while (true) {
      if (++guard > 100000) throw MeshError("vertex star walk did not terminate");
      const int next = tris[t].adj[(index_of(t, a) + 2) % 3];
      if (next < 0 || next == t0) return;
      t = next;
      if (!fn(t)) return;
    }
  }

  static bool proper_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double s = spread4(a, b, c, d);
    const double eps = 1e-13 * s * s;
    const double o1 = orient(a, b, c), o2 = orient(a, b, d);
    const double o3 = orient(c, d, a), o4 = orient(c, d, b);
    return ((o1 > eps && o2 < -eps) || (o1 < -eps && o2 > eps)) &&
           ((o3 > eps && o4 < -eps) || (o3 < -eps && o4 > eps));
  }

  // Makes (a, b) an edge of the triangulation by flipping crossing edges.
  void recover_edge(int a, int b) {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      if (edge_exists(a, b)) return;
      // Find any crossing edge, preferring ones whose flip is valid.
      int ft = -1, fe = -1;
      for (int t = 0; t < static_cast<int>(tris.size()) && ft < 0; ++t) {
        if (!tris[t].alive) continue;
        for (int e = 0; e < 3; ++e) {
          const int P = tris[t].v[(e + 1) % 3];
          const int Q = tris[t].v[(e + 2) % 3];
          if (P == a || P == b || Q == a || Q == b) continue;
          if (!proper_cross(pts[a], pts[b], pts[P], pts[Q])) continue;
          if (constrained.count(edge_key(P, Q)))
            throw MeshError("constrained interface segments intersect");
          if (flip_is_valid(t, e)) {
            ft = t;
            fe = e;
            break;
          }
        }
      }
      if (ft < 0) throw MeshError("interface edge recovery failed");
      flip(ft, fe);
    }
    throw MeshError("interface edge recovery did not terminate");
  }

  void lawson_sweep() {
    for (int pass = 0; pass < 60; ++pass) {
      int flips = 0;
      for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
        if (!tris[t].alive) continue;
        for (int e = 0; e < 3; ++e) {
          if (tris[t].adj[e] <= t) continue;  // visit each edge once
          if (should_flip(t, e) && flip_is_valid(t, e)) {
            flip(t, e);
            ++flips;
            break;
          }
        }
      }
      if (flips == 0) return;
    }
  }

  void smooth(const std::vector<bool>& movable, int rounds) {
    for (int round = 0; round < rounds; ++round) {
      std::vector<Vec2> sum(pts.size(), Vec2{0, 0});
      std::vector<int> cnt(pts.size(), 0);
      for (const auto& t : tris) {
        if (!t.alive) continue;
        for (int k = 0; k < 3; ++k) {
          const int a = t.v[k], b = t.v[(k + 1) % 3];
          sum[a] = sum[a] + pts[b];
          sum[b] = sum[b] + pts[a];
          ++cnt[a];
          ++cnt[b];
        }
      }
      for (size_t i = 0; i < pts.size(); ++i) {
        if (!movable[i] || cnt[i] == 0) continue;
        const Vec2 target = (1.0 / cnt[i]) * sum[i];
        const Vec2 old = pts[i];
        for (double w : {1.0, 0.5, 0.25}) {
          pts[i] = {old.x + w * (target.x - old.x), old.y + w * (target.y - old.y)};
          if (star_valid(static_cast<int>(i))) break;
          pts[i] = old;
        }
      }
      lawson_sweep();
    }
  }

  bool star_valid(int a) const {
    bool ok = true;
    visit_star(a, [&](int t) {
      const Vec2 A = pts[tris[t].v[0]], B = pts[tris[t].v[1]], C = pts[tris[t].v[2]];
      const double s = spread4(A, B, C, C);
      if (orient(A, B, C) <= 1e-13 * s * s) ok = false;
      return ok;
    });
    return ok;
  }
};

struct PointSet {
  std::vector<Vec2> pts;
  int n_boundary = 0;
  int n_interface = 0;  // interface samples occupy [n_boundary, n_boundary + n_interface)
  std::vector<std::vector<int>> interface_loops;
};

PointSet build_point_set(double h, const ShapeSpec* shape) {
  PointSet ps;
  const double dr = 0.8660254037844386 * h;
  // The boundary ring is twice as fine as the interior so the polygonal
  // chord defect (the sagitta is quadratic in the spacing) stays below the
  // interior discretization error. Buffer rings share one count: each ring
  // vertex sits radially under every second boundary vertex, which keeps
  // the near-boundary vertex stars symmetric.
  const int n_ring = std::max(6, static_cast<int>(std::llround(2.0 * pi * (1.0 - dr) / h)));
  const int nb = 2 * n_ring;
  ps.n_boundary = nb;
  for (int i = 0; i < nb; ++i) {
    const double a = 2.0 * pi * i / nb;
    ps.pts.push_back({std::cos(a), std::sin(a)});
  }

  if (shape) {
    const auto loops = shape->sample_interfaces(h);
    for (const auto& loop : loops) {
      std::vector<int> ids;
      for (const Vec2& p : loop) {
        ids.push_back(static_cast<int>(ps.pts.size()));
        ps.pts.push_back(p);
      }
      ps.interface_loops.push_back(std::move(ids));
    }
    ps.n_interface = static_cast<int>(ps.pts.size()) - nb;
  }

  const double clearance = 0.62 * h;
  auto keep = [&](Vec2 p) {
    if (shape && std::abs(shape->signed_distance(p)) < clearance) return false;
    return true;
  };

  // Two boundary-conforming buffer rings, then a hexagonal lattice core.
  // The lattice's symmetric vertex stars give clean nodal accuracy; the
  // rings grade it into the circular boundary.
  std::vector<Vec2> interior;
  const int max_rings = 5;
  int rings = 0;
  while (rings < max_rings) {
    const double r = 1.0 - (rings + 1) * dr;
    if (r < 0.55 * dr) break;                       // reached the center
    if (2.0 * pi * r / n_ring < 0.62 * dr) break;   // rings getting too thin
    ++rings;
    // odd rings under the odd boundary vertices, even rings staggered
    const double offset = (rings % 2 == 1 ? pi / n_ring : 0.0);
    for (int i = 0; i < n_ring; ++i) {
      const double a = offset + 2.0 * pi * i / n_ring;
      interior.push_back({r * std::cos(a), r * std::sin(a)});
    }
  }
  double hex_cut = (rings > 0 ? 1.0 - rings * dr : 1.0) - 0.7 * h;
  if (hex_cut > 0.0) {
    const int jmax = static_cast<int>(std::floor(hex_cut / dr));
    for (int j = -jmax; j <= jmax; ++j) {
      const double y = j * dr;
      const double x0 = (j & 1) ? 0.5 * h : 0.0;
      const int imax = static_cast<int>(std::floor((hex_cut + h) / h)) + 1;
      for (int i = -imax; i <= imax; ++i) {
        const Vec2 p{x0 + i * h, y};
        if (norm(p) <= hex_cut) interior.push_back(p);
      }
    }
  } else {
    interior.push_back({0.0, 0.0});
  }
  for (const Vec2& p : interior)
    if (keep(p)) ps.pts.push_back(p);

  // Components whose interior lost every lattice point still need one seed
  // vertex, otherwise the interface polygon is triangulated by slivers.
  if (shape) {
    auto has_interior_point = [&](auto inside) {
      for (size_t i = nb + ps.n_interface; i < ps.pts.size(); ++i)
        if (inside(ps.pts[i])) return true;
      return false;
    };
    if (shape->kind == ShapeSpec::Kind::circles) {
      for (const auto& c : shape->circles) {
        if (!has_interior_point([&](Vec2 p) { return dist(p, c.center) < c.radius; }))
          ps.pts.push_back(c.center);
      }
    } else {
      const auto& e = shape->ellipse;
      if (!has_interior_point([&](Vec2 p) { return shape->signed_distance(p) < 0.0; }))
        ps.pts.push_back(e.center);
    }
  }
  return ps;
}

TriMesh triangulate(const PointSet& ps, const ShapeSpec* shape) {
  Triangulator tr;
  tr.pts = ps.pts;
  tr.vert_tri.assign(tr.pts.size(), -1);
  tr.init_polygon(ps.n_boundary);

  std::vector<bool> inserted(tr.pts.size(), false);
  for (int i = 0; i < ps.n_boundary; ++i) inserted[i] = true;
  int hint = 0;
  for (int i = ps.n_boundary; i < static_cast<int>(tr.pts.size()); ++i)
    inserted[i] = tr.insert_point(i, hint);

  if (shape) {
    for (const auto& loop : ps.interface_loops) {
      const int n = static_cast<int>(loop.size());
      for (int i = 0; i < n; ++i) {
        const int a = loop[i], b = loop[(i + 1) % n];
        if (!inserted[a] || !inserted[b]) throw MeshError("interface sample dropped");
        tr.recover_edge(a, b);
        tr.constrained.insert(edge_key(a, b));
      }
    }
  }

  tr.lawson_sweep();

  std::vector<bool> movable(tr.pts.size(), false);
  for (int i = ps.n_boundary + ps.n_interface; i < static_cast<int>(tr.pts.size()); ++i)
    movable[i] = inserted[i];
  tr.smooth(movable, 8);

  TriMesh mesh;
  mesh.vertices = tr.pts;
  for (const auto& t : tr.tris)
    if (t.alive) mesh.triangles.push_back(t.v);
  const int nb = ps.n_boundary;
  for (int i = 0; i < nb; ++i) mesh.boundary_edges.push_back({i, (i + 1) % nb});
  mesh.boundary_cycle.resize(nb);
  for (int i = 0; i < nb; ++i) mesh.boundary_cycle[i] = i;

  // Dropped points would leave unused vertices; compact if any.
  std::vector<bool> used(mesh.vertices.size(), false);
  for (const auto& t : mesh.triangles)
    for (int v : t) used[v] = true;
  if (std::find(used.begin(), used.end(), false) != used.end()) {
    std::vector<int> remap(mesh.vertices.size(), -1);
    std::vector<Vec2> kept;
    for (size_t i = 0; i < mesh.vertices.size(); ++i)
      if (used[i]) {
        remap[i] = static_cast<int>(kept.size());
        kept.push_back(mesh.vertices[i]);
      }
    mesh.vertices = kept;
    for (auto& t : mesh.triangles)
      for (int& v : t) v = remap[v];
    for (auto& e : mesh.boundary_edges)
      for (int& v : e) v = remap[v];
    for (int& v : mesh.boundary_cycle) v = remap[v];
  }
  return mesh;
}

}  // namespace

TriMesh generate_disk_mesh(double target_edge_length) {
  if (!(target_edge_length > 0.0) || target_edge_length >= 1.0)
    throw std::invalid_argument("target edge length must be in (0, 1)");
  const PointSet ps = build_point_set(target_edge_length, nullptr);
  TriMesh mesh = triangulate(ps, nullptr);
  mesh.validate();
  if (mesh.max_edge_length() > 2.0 * target_edge_length)
    throw MeshError("generated mesh exceeds the maximum edge length bound");
  if (mesh.min_angle_deg() < 20.0)
    throw MeshError("generated mesh violates the 20 degree angle bound");
  return mesh;
}

TriMesh generate_disk_mesh_with_shape(double target_edge_length, const ShapeSpec& shape) {
  if (!(target_edge_length > 0.0) || target_edge_length >= 1.0)
    throw std::invalid_argument("target edge length must be in (0, 1)");
  shape.validate_inside_unit_disk();
  const PointSet ps = build_point_set(target_edge_length, &shape);
  TriMesh mesh = triangulate(ps, &shape);
  mesh.validate();
  if (mesh.max_edge_length() > 2.0 * target_edge_length)
    throw MeshError("generated mesh exceeds the maximum edge length bound");
  if (mesh.min_angle_deg() < 5.0)
    throw MeshError("generated shape mesh is badly degenerate");
  if (!conforms_to_shape(mesh, shape))
    throw MeshError("generated mesh does not conform to the shape interface");
  return mesh;
}

TriMesh refine_uniform(const TriMesh& mesh, bool project_boundary_to_circle) {
  TriMesh out;
  out.vertices = mesh.vertices;
  const auto bmask = mesh.boundary_vertex_mask();

  std::map<uint64_t, int> midpoint;
  std::set<uint64_t> boundary_keys;
  for (const auto& e : mesh.boundary_edges) boundary_keys.insert(edge_key(e[0], e[1]));

  auto mid = [&](int a, int b) {
    const uint64_t key = edge_key(a, b);
    const auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Vec2 p = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
    if (project_boundary_to_circle && boundary_keys.count(key)) {
      const double r = norm(p);
      if (r > 0.0) p = (1.0 / r) * p;
    }
    const int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back(p);
    midpoint.emplace(key, id);
    return id;
  };

  for (const auto& t : mesh.triangles) {
    const int m01 = mid(t[0], t[1]);
    const int m12 = mid(t[1], t[2]);
    const int m20 = mid(t[2], t[0]);
    out.triangles.push_back({t[0], m01, m20});
    out.triangles.push_back({t[1], m12, m01});
    out.triangles.push_back({t[2], m20, m12});
    out.triangles.push_back({m01, m12, m20});
  }
  for (const auto& e : mesh.boundary_edges) {
    const int m = midpoint.at(edge_key(e[0], e[1]));
    out.boundary_edges.push_back({e[0], m});
    out.boundary_edges.push_back({m, e[1]});
  }
  // New cycle: old vertex, then the midpoint toward the next one.
  const int nb = static_cast<int>(mesh.boundary_cycle.size());
  for (int i = 0; i < nb; ++i) {
    const int a = mesh.boundary_cycle[i];
    const int b = mesh.boundary_cycle[(i + 1) % nb];
    out.boundary_cycle.push_back(a);
    out.boundary_cycle.push_back(midpoint.at(edge_key(a, b)));
  }
  out.validate();
  return out;
}

}  // namespace eit
