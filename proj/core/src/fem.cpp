#include "eitrec/fem.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

namespace eit {

double NodalField::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double NodalField::interpolate(Vec2 p) const {
  const TriMesh& m = *mesh;
  double best_quality = -1e300;
  double best_value = 0.0;
  for (int t = 0; t < m.triangle_count(); ++t) {
    const auto& tr = m.triangles[t];
    const Vec2 a = m.vertices[tr[0]], b = m.vertices[tr[1]], c = m.vertices[tr[2]];
    const double area2 = cross(b - a, c - a);
    const double l0 = cross(b - p, c - p) / area2;
    const double l1 = cross(c - p, a - p) / area2;
    const double l2 = 1.0 - l0 - l1;
    const double quality = std::min({l0, l1, l2});
    if (quality > best_quality) {
      best_quality = quality;
      best_value = l0 * values[tr[0]] + l1 * values[tr[1]] + l2 * values[tr[2]];
      if (quality >= -1e-12) break;
    }
  }
  return best_value;
}

SparseMatrix SparseMatrix::from_triplets(int n, std::vector<Triplet> triplets) {
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m;
  m.n_ = n;
  m.row_offsets_.assign(n + 1, 0);
  for (size_t i = 0; i < triplets.size();) {
    size_t j = i;
    double sum = 0.0;
    while (j < triplets.size() && triplets[j].row == triplets[i].row &&
           triplets[j].col == triplets[i].col)
      sum += triplets[j++].value;
    m.cols_.push_back(triplets[i].col);
    m.values_.push_back(sum);
    ++m.row_offsets_[triplets[i].row + 1];
    i = j;
  }
  for (int r = 0; r < n; ++r) m.row_offsets_[r + 1] += m.row_offsets_[r];
  return m;
}

double SparseMatrix::coeff(int i, int j) const {
  for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
    if (cols_[k] == j) return values_[k];
  return 0.0;
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(n_, 0.0);
  for (int r = 0; r < n_; ++r) {
    double s = 0.0;
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) s += values_[k] * x[cols_[k]];
    y[r] = s;
  }
  return y;
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(n_, 0.0);
  for (int r = 0; r < n_; ++r) d[r] = coeff(r, r);
  return d;
}

std::vector<double> SparseMatrix::row_sums() const {
  std::vector<double> s(n_, 0.0);
  for (int r = 0; r < n_; ++r)
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) s[r] += values_[k];
  return s;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double SparseMatrix::symmetry_defect() const {
  double worst = 0.0;
  for (int r = 0; r < n_; ++r)
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      worst = std::max(worst, std::abs(values_[k] - coeff(cols_[k], r)));
  return worst;
}

bool SparseMatrix::equals(const SparseMatrix& other) const {
  return n_ == other.n_ && row_offsets_ == other.row_offsets_ && cols_ == other.cols_ &&
         values_ == other.values_;
}

SparseMatrix SparseMatrix::scaled(double s) const {
  SparseMatrix m = *this;
  for (double& v : m.values_) v *= s;
  return m;
}

std::string SparseMatrix::dump_coordinate_text() const {
  std::string out;
  for (int r = 0; r < n_; ++r)
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      out += std::to_string(r) + " " + std::to_string(cols_[k]) + " " + fmt17(values_[k]) + "\n";
  return out;
}

CoeffFn constant_coeff(double value) {
  return [value](int, Vec2, const std::array<double, 3>&) { return value; };
}

std::array<Vec2, 3> p1_gradients(const TriMesh& mesh, int tri) {
  const auto& tr = mesh.triangles[tri];
  const Vec2 a = mesh.vertices[tr[0]], b = mesh.vertices[tr[1]], c = mesh.vertices[tr[2]];
  const double inv2A = 1.0 / cross(b - a, c - a);
  return {Vec2{(b.y - c.y) * inv2A, (c.x - b.x) * inv2A},
          Vec2{(c.y - a.y) * inv2A, (a.x - c.x) * inv2A},
          Vec2{(a.y - b.y) * inv2A, (b.x - a.x) * inv2A}};
}

Vec2 field_gradient(const NodalField& u, int tri) {
  const auto g = p1_gradients(*u.mesh, tri);
  const auto& tr = u.mesh->triangles[tri];
  Vec2 s{0.0, 0.0};
  for (int k = 0; k < 3; ++k) s = s + u.values[tr[k]] * g[k];
  return s;
}

SparseMatrix assemble_stiffness(const TriMesh& mesh, const CoeffFn& coeff) {
  const int n = mesh.vertex_count();
  std::vector<Triplet> trips;
  trips.reserve(9 * mesh.triangles.size());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tr = mesh.triangles[t];
    const Vec2 a = mesh.vertices[tr[0]], b = mesh.vertices[tr[1]], c = mesh.vertices[tr[2]];
    const double area = 0.5 * cross(b - a, c - a);
    if (area <= 0.0) throw MeshError("degenerate triangle in stiffness assembly");
    const auto grads = p1_gradients(mesh, t);
    // integral of sigma over the triangle by the 3-midpoint rule
    double sigma_int = 0.0;
    for (int g = 0; g < 3; ++g) {
      const auto& bary = QuadRule::barycentric[g];
      const Vec2 x = {bary[0] * a.x + bary[1] * b.x + bary[2] * c.x,
                      bary[0] * a.y + bary[1] * b.y + bary[2] * c.y};
      const double s = coeff(t, x, bary);
      if (!std::isfinite(s))
        throw std::invalid_argument("non-finite coefficient at quadrature point");
      sigma_int += QuadRule::weights[g] * s;
    }
    sigma_int *= area;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trips.push_back({tr[i], tr[j], sigma_int * dot(grads[i], grads[j])});
  }
  return SparseMatrix::from_triplets(n, std::move(trips));
}

SparseMatrix assemble_mass(const TriMesh& mesh) {
  const int n = mesh.vertex_count();
  std::vector<Triplet> trips;
  trips.reserve(9 * mesh.triangles.size());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tr = mesh.triangles[t];
    const double area = mesh.signed_area(t);
    if (area <= 0.0) throw MeshError("degenerate triangle in mass assembly");
    const double off = area / 12.0;
    const double diag = 2.0 * off;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trips.push_back({tr[i], tr[j], i == j ? diag : off});
  }
  return SparseMatrix::from_triplets(n, std::move(trips));
}

SparseMatrix assemble_boundary_mass(const TriMesh& mesh, const BoundaryParam& bp) {
  const int n = mesh.vertex_count();
  std::vector<Triplet> trips;
  const int nb = bp.size();
  for (int i = 0; i < nb; ++i) {
    const int a = bp.cycle[i];
    const int b = bp.cycle[(i + 1) % nb];
    const double L = bp.edge_lengths[i];
    trips.push_back({a, a, L / 3.0});
    trips.push_back({b, b, L / 3.0});
    trips.push_back({a, b, L / 6.0});
    trips.push_back({b, a, L / 6.0});
  }
  return SparseMatrix::from_triplets(n, std::move(trips));
}

std::vector<double> assemble_boundary_load(const TriMesh& mesh, const BoundaryParam& bp,
                                           const std::function<double(double angle)>& g) {
  std::vector<double> load(mesh.vertex_count(), 0.0);
  for (int i = 0; i < bp.size(); ++i) load[bp.cycle[i]] = bp.vertex_weights[i] * g(bp.angles[i]);
  return load;
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

namespace {

std::atomic<uint64_t> g_solver_version{1};

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& A, int extra_dim = 0,
                                     const std::vector<double>* border = nullptr) {
  const int n = A.size();
  const int dim = n + extra_dim;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(A.nnz() + (border ? 2 * n : 0));
  for (int r = 0; r < n; ++r)
    for (int k = A.row_offsets()[r]; k < A.row_offsets()[r + 1]; ++k)
      trips.emplace_back(r, A.cols()[k], A.values()[k]);
  if (border) {
    for (int r = 0; r < n; ++r) {
      if ((*border)[r] == 0.0) continue;
      trips.emplace_back(r, n, (*border)[r]);
      trips.emplace_back(n, r, (*border)[r]);
    }
  }
  Eigen::SparseMatrix<double> M(dim, dim);
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  return M;
}

}  // namespace

std::vector<double> linear_solve(const SparseMatrix& A, std::span<const double> b, double tol,
                                 int max_iter, SolveReport* report) {
  const int n = A.size();
  if (max_iter < 0) max_iter = 10 * n;
  std::vector<double> x(n, 0.0);
  const double bnorm = norm2(b);
  if (report) *report = {};
  if (bnorm == 0.0) return x;

  std::vector<double> diag = A.diagonal();
  for (double& d : diag) d = (d != 0.0) ? 1.0 / d : 1.0;

  std::vector<double> r(b.begin(), b.end());
  std::vector<double> z(n), p(n), Ap;
  for (int i = 0; i < n; ++i) z[i] = diag[i] * r[i];
  p = z;
  double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
  double rnorm = norm2(r);

  for (int it = 0; it < max_iter; ++it) {
    if (rnorm <= tol * bnorm) {
      if (report) *report = {false, it, rnorm / bnorm, 0.0};
      return x;
    }
    Ap = A.multiply(p);
    const double pAp = std::inner_product(p.begin(), p.end(), Ap.begin(), 0.0);
    if (pAp <= 0.0)
      throw SolverError("conjugate gradients breakdown (matrix not SPD)", it, rnorm / bnorm);
    const double alpha = rz / pAp;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    for (int i = 0; i < n; ++i) z[i] = diag[i] * r[i];
    const double rz_new = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rnorm = norm2(r);
  }
  if (rnorm <= tol * bnorm) {
    if (report) *report = {false, max_iter, rnorm / bnorm, 0.0};
    return x;
  }
  throw SolverError("conjugate gradients did not converge", max_iter, rnorm / bnorm);
}

SparseMatrix eliminate_dirichlet(const SparseMatrix& A, const std::vector<bool>& on_boundary) {
  const int n = A.size();
  std::vector<Triplet> trips;
  trips.reserve(A.nnz());
  for (int r = 0; r < n; ++r) {
    if (on_boundary[r]) {
      trips.push_back({r, r, 1.0});
      continue;
    }
    for (int k = A.row_offsets()[r]; k < A.row_offsets()[r + 1]; ++k) {
      const int c = A.cols()[k];
      if (!on_boundary[c]) trips.push_back({r, c, A.values()[k]});
    }
  }
  return SparseMatrix::from_triplets(n, std::move(trips));
}

// ----- ConstrainedNeumannSolver --------------------------------------------

struct ConstrainedNeumannSolver::Impl {
  std::shared_ptr<const TriMesh> mesh;
  SparseMatrix A;
  std::vector<double> w;  // lumped boundary weights, full length
  double wsum = 0.0;
  SolveOptions opts;
  uint64_t version = 0;
  bool direct = false;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

ConstrainedNeumannSolver::ConstrainedNeumannSolver(std::shared_ptr<const TriMesh> mesh,
                                                   const BoundaryParam& bp, SparseMatrix A,
                                                   SolveOptions opts)
    : impl_(std::make_unique<Impl>()) {
  impl_->mesh = std::move(mesh);
  impl_->A = std::move(A);
  impl_->opts = opts;
  impl_->version = g_solver_version.fetch_add(1);
  const int n = impl_->A.size();
  impl_->w.assign(n, 0.0);
  for (int i = 0; i < bp.size(); ++i) impl_->w[bp.cycle[i]] = bp.vertex_weights[i];
  for (double x : impl_->w) impl_->wsum += x;
  impl_->direct = n <= opts.direct_threshold;
  if (impl_->direct) {
    const auto M = to_eigen(impl_->A, 1, &impl_->w);
    impl_->lu.compute(M);
    if (impl_->lu.info() != Eigen::Success)
      throw SolverError("sparse LU factorization of the bordered system failed", 0, 0.0);
  }
}

ConstrainedNeumannSolver::~ConstrainedNeumannSolver() = default;
ConstrainedNeumannSolver::ConstrainedNeumannSolver(ConstrainedNeumannSolver&&) noexcept = default;
ConstrainedNeumannSolver& ConstrainedNeumannSolver::operator=(ConstrainedNeumannSolver&&) noexcept =
    default;

const SparseMatrix& ConstrainedNeumannSolver::matrix() const { return impl_->A; }
const std::vector<double>& ConstrainedNeumannSolver::boundary_weights() const { return impl_->w; }
std::shared_ptr<const TriMesh> ConstrainedNeumannSolver::mesh() const { return impl_->mesh; }
uint64_t ConstrainedNeumannSolver::version() const { return impl_->version; }

NodalField ConstrainedNeumannSolver::solve(std::span<const double> rhs, SolveReport* report) const {
  const int n = impl_->A.size();
  // Compatibility: the incompatible part of the load is a multiple of the
  // weight vector; removing it does not change the constrained solution
  // (the bordered multiplier absorbs it exactly).
  double s = 0.0;
  for (double v : rhs) s += v;
  const double kappa = s / impl_->wsum;
  std::vector<double> b(rhs.begin(), rhs.end());
  for (int i = 0; i < n; ++i) b[i] -= kappa * impl_->w[i];

  std::vector<double> u(n);
  if (impl_->direct) {
    Eigen::VectorXd rb(n + 1);
    for (int i = 0; i < n; ++i) rb[i] = b[i];
    rb[n] = 0.0;
    const Eigen::VectorXd x = impl_->lu.solve(rb);
    if (impl_->lu.info() != Eigen::Success)
      throw SolverError("bordered Neumann solve failed", 0, 0.0);
    for (int i = 0; i < n; ++i) u[i] = x[i];
  } else {
    // Projected conjugate gradients: the preconditioned residual is projected
    // back onto the complement of constants every iteration.
    const int max_iter = impl_->opts.max_iter < 0 ? 10 * n : impl_->opts.max_iter;
    std::vector<double> diag = impl_->A.diagonal();
    for (double& d : diag) d = (d != 0.0) ? 1.0 / d : 1.0;
    auto project = [n](std::vector<double>& v) {
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= n;
      for (double& x : v) x -= mean;
    };
    std::vector<double> x(n, 0.0), r = b, z(n), p, Ap;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
      u = x;
    } else {
      for (int i = 0; i < n; ++i) z[i] = diag[i] * r[i];
      project(z);
      p = z;
      double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
      double rnorm = norm2(r);
      int it = 0;
      for (; it < max_iter && rnorm > impl_->opts.tol * bnorm; ++it) {
        Ap = impl_->A.multiply(p);
        const double pAp = std::inner_product(p.begin(), p.end(), Ap.begin(), 0.0);
        if (pAp <= 0.0) throw SolverError("projected CG breakdown", it, rnorm / bnorm);
        const double alpha = rz / pAp;
        for (int i = 0; i < n; ++i) {
          x[i] += alpha * p[i];
          r[i] -= alpha * Ap[i];
        }
        for (int i = 0; i < n; ++i) z[i] = diag[i] * r[i];
        project(z);
        const double rz_new = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rnorm = norm2(r);
      }
      if (rnorm > impl_->opts.tol * bnorm)
        throw SolverError("projected CG did not converge", it, rnorm / bnorm);
      u = x;
    }
  }

  // Enforce the boundary-weighted zero mean exactly.
  double wm = 0.0;
  for (int i = 0; i < n; ++i) wm += impl_->w[i] * u[i];
  wm /= impl_->wsum;
  for (int i = 0; i < n; ++i) u[i] -= wm;

  if (report) {
    report->direct = impl_->direct;
    report->removed_component = std::abs(s);
    const auto Au = impl_->A.multiply(u);
    double rn = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = Au[i] - b[i];
      rn += d * d;
    }
    const double bn = norm2(b);
    report->residual = bn > 0.0 ? std::sqrt(rn) / bn : std::sqrt(rn);
  }
  return NodalField(impl_->mesh, std::move(u));
}

// ----- DirichletSolver ------------------------------------------------------

struct DirichletSolver::Impl {
  std::shared_ptr<const TriMesh> mesh;
  std::vector<bool> on_boundary;
  SparseMatrix Ae;
  SolveOptions opts;
  bool direct = false;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

DirichletSolver::DirichletSolver(std::shared_ptr<const TriMesh> mesh, const SparseMatrix& A_full,
                                 SolveOptions opts)
    : impl_(std::make_unique<Impl>()) {
  impl_->mesh = std::move(mesh);
  impl_->opts = opts;
  const auto mask = impl_->mesh->boundary_vertex_mask();
  impl_->on_boundary.assign(mask.begin(), mask.end());
  impl_->Ae = eliminate_dirichlet(A_full, impl_->on_boundary);
  impl_->direct = impl_->Ae.size() <= opts.direct_threshold;
  if (impl_->direct) {
    impl_->ldlt.compute(to_eigen(impl_->Ae));
    if (impl_->ldlt.info() != Eigen::Success)
      throw SolverError("sparse LDLT factorization failed", 0, 0.0);
  }
}

DirichletSolver::~DirichletSolver() = default;
DirichletSolver::DirichletSolver(DirichletSolver&&) noexcept = default;
DirichletSolver& DirichletSolver::operator=(DirichletSolver&&) noexcept = default;

const SparseMatrix& DirichletSolver::eliminated_matrix() const { return impl_->Ae; }
std::shared_ptr<const TriMesh> DirichletSolver::mesh() const { return impl_->mesh; }

NodalField DirichletSolver::solve(std::span<const double> load, SolveReport* report) const {
  const int n = impl_->Ae.size();
  std::vector<double> b(load.begin(), load.end());
  for (int i = 0; i < n; ++i)
    if (impl_->on_boundary[i]) b[i] = 0.0;

  std::vector<double> q(n);
  if (impl_->direct) {
    Eigen::Map<const Eigen::VectorXd> bb(b.data(), n);
    const Eigen::VectorXd x = impl_->ldlt.solve(bb);
    if (impl_->ldlt.info() != Eigen::Success) throw SolverError("Dirichlet solve failed", 0, 0.0);
    for (int i = 0; i < n; ++i) q[i] = x[i];
    if (report) *report = {true, 0, 0.0, 0.0};
  } else {
    SolveReport cg_report;
    q = linear_solve(impl_->Ae, b, impl_->opts.tol, impl_->opts.max_iter, &cg_report);
    if (report) *report = cg_report;
  }
  for (int i = 0; i < n; ++i)
    if (impl_->on_boundary[i]) q[i] = 0.0;
  return NodalField(impl_->mesh, std::move(q));
}

// ----- one-shot wrappers ----------------------------------------------------

NodalField solve_neumann_zero_mean(const SparseMatrix& A, std::span<const double> rhs,
                                   std::shared_ptr<const TriMesh> mesh, const BoundaryParam& bp,
                                   SolveOptions opts, SolveReport* report) {
  ConstrainedNeumannSolver solver(std::move(mesh), bp, A, opts);
  return solver.solve(rhs, report);
}

NodalField solve_dirichlet_zero(const SparseMatrix& A_full, std::span<const double> rhs,
                                std::shared_ptr<const TriMesh> mesh, SolveOptions opts,
                                SolveReport* report) {
  DirichletSolver solver(std::move(mesh), A_full, opts);
  return solver.solve(rhs, report);
}

double boundary_weighted_mean(const NodalField& u, const BoundaryParam& bp) {
  double s = 0.0, w = 0.0;
  for (int i = 0; i < bp.size(); ++i) {
    s += bp.vertex_weights[i] * u.values[bp.cycle[i]];
    w += bp.vertex_weights[i];
  }
  return s / w;
}

}  // namespace eit
