#include "rbmm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rbmm/errors.hpp"
#include "rbmm/kernels.hpp"

namespace rbmm {

namespace {

constexpr double kEigFloor = 1e-12;
constexpr double kRankTol = 1e-10;
constexpr double kTieTol = 1e-12;

struct Svd {
  Matrix u;
  Vector s;
  Matrix v;
};

// Thin SVD with the first clearly nonzero entry of every left singular
// vector made nonnegative, so downstream products are reproducible.
Svd thin_svd(const Matrix& x) {
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Svd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  for (Index j = 0; j < out.u.cols(); ++j) {
    const double scale = out.u.col(j).cwiseAbs().maxCoeff();
    for (Index i = 0; i < out.u.rows(); ++i) {
      if (std::abs(out.u(i, j)) > 1e-12 * scale) {
        if (out.u(i, j) < 0) {
          out.u.col(j) *= -1.0;
          out.v.col(j) *= -1.0;
        }
        break;
      }
    }
  }
  return out;
}

void require_shape(const Manifold& m, const Matrix& a, const char* what) {
  if (a.rows() != m.rows() || a.cols() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected " << m.rows() << "x" << m.cols() << " for " << m.describe()
       << ", got " << a.rows() << "x" << a.cols();
    throw ContractViolation(os.str());
  }
}

void require_based_at(const Point& x, const TangentVector& u, const char* what) {
  if (!(u.base.manifold == x.manifold) || u.base.data.rows() != x.data.rows() ||
      u.base.data.cols() != x.data.cols() || u.base.data != x.data)
    throw ContractViolation(std::string(what) + ": tangent vector is not based at this point");
  require_shape(x.manifold, u.data, what);
}

void require_exp_log(const Manifold& m, const char* what) {
  if (!m.has_exp_log())
    throw UnsupportedKind(std::string(what) + " is not available on " + m.describe());
}

struct Eig {
  Vector values;
  Matrix vectors;
};

Eig sym_eig(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(spd::sym(a));
  if (es.info() != Eigen::Success) throw DegenerateInput("symmetric eigendecomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

Eig positive_eig(const Matrix& a, const char* what) {
  Eig e = sym_eig(a);
  if (e.values.minCoeff() < kEigFloor) {
    std::ostringstream os;
    os << what << ": eigenvalue " << e.values.minCoeff() << " below floor " << kEigFloor;
    throw DegenerateInput(os.str());
  }
  return e;
}

template <class F>
Matrix spectral(const Eig& e, F f) {
  Vector d = e.values.unaryExpr(f);
  return spd::sym(e.vectors * d.asDiagonal() * e.vectors.transpose());
}

// Top-r singular subspaces of a fixed-rank point.
std::pair<Matrix, Matrix> rank_factors(const Point& x) {
  const Svd svd = thin_svd(x.data);
  const Index r = x.manifold.rank();
  return {svd.u.leftCols(r), svd.v.leftCols(r)};
}

}  // namespace

const char* kind_name(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::Euclidean: return "euclidean";
    case ManifoldKind::Sphere: return "sphere";
    case ManifoldKind::Stiefel: return "stiefel";
    case ManifoldKind::SPD: return "spd";
    case ManifoldKind::FixedRank: return "fixed-rank";
  }
  return "unknown";
}

Manifold Manifold::euclidean(Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw ContractViolation("euclidean: dimensions must be positive");
  return {ManifoldKind::Euclidean, rows, cols, 0};
}

Manifold Manifold::sphere(Index dim) {
  if (dim < 2) throw ContractViolation("sphere: ambient dimension must be at least 2");
  return {ManifoldKind::Sphere, dim, 1, 0};
}

Manifold Manifold::stiefel(Index n, Index k) {
  if (k < 1 || n < k) throw ContractViolation("stiefel: need 1 <= k <= n");
  return {ManifoldKind::Stiefel, n, k, 0};
}

Manifold Manifold::spd(Index n) {
  if (n < 1) throw ContractViolation("spd: dimension must be positive");
  return {ManifoldKind::SPD, n, n, 0};
}

Manifold Manifold::fixed_rank(Index rows, Index cols, Index rank) {
  if (rows < 1 || cols < 1 || rank < 1 || rank > std::min(rows, cols))
    throw ContractViolation("fixed_rank: need 1 <= rank <= min(rows, cols)");
  return {ManifoldKind::FixedRank, rows, cols, rank};
}

double Manifold::injectivity_floor() const {
  switch (kind_) {
    case ManifoldKind::Sphere: return std::numbers::pi;
    case ManifoldKind::Stiefel: return 0.89 * std::numbers::pi;
    default: return std::numeric_limits<double>::infinity();
  }
}

double Manifold::r_hat() const { return std::min(injectivity_floor(), 1.0); }

bool Manifold::has_exp_log() const {
  return kind_ == ManifoldKind::Euclidean || kind_ == ManifoldKind::Sphere ||
         kind_ == ManifoldKind::SPD;
}

std::string Manifold::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case ManifoldKind::Euclidean: os << "Euclidean(" << rows_ << "," << cols_ << ")"; break;
    case ManifoldKind::Sphere: os << "Sphere(" << rows_ << ")"; break;
    case ManifoldKind::Stiefel: os << "Stiefel(" << rows_ << "," << cols_ << ")"; break;
    case ManifoldKind::SPD: os << "SPD(" << rows_ << ")"; break;
    case ManifoldKind::FixedRank:
      os << "FixedRank(" << rows_ << "," << cols_ << "," << rank_ << ")";
      break;
  }
  return os.str();
}

bool is_valid_point(const Point& x, double tol) {
  const Manifold& m = x.manifold;
  if (x.data.rows() != m.rows() || x.data.cols() != m.cols()) return false;
  if (!x.data.allFinite()) return false;
  switch (m.kind()) {
    case ManifoldKind::Euclidean: return true;
    case ManifoldKind::Sphere: return std::abs(x.data.norm() - 1.0) <= tol;
    case ManifoldKind::Stiefel: {
      const Matrix g = x.data.transpose() * x.data;
      return (g - Matrix::Identity(m.cols(), m.cols())).norm() <= tol;
    }
    case ManifoldKind::SPD: {
      const double scale = std::max(1.0, x.data.norm());
      if ((x.data - x.data.transpose()).norm() > tol * scale) return false;
      return sym_eig(x.data).values.minCoeff() > 0.0;
    }
    case ManifoldKind::FixedRank: {
      const Vector s = thin_svd(x.data).s;
      const Index r = m.rank();
      if (s(0) <= 0.0 || s(r - 1) <= kRankTol * s(0)) return false;
      return r == s.size() || s(r) <= std::max(tol, kRankTol) * s(0);
    }
  }
  return false;
}

Point make_point(const Manifold& manifold, Matrix data, double tol) {
  require_shape(manifold, data, "make_point");
  Point p{manifold, std::move(data)};
  if (!is_valid_point(p, tol))
    throw ContractViolation("make_point: data violates the invariants of " + manifold.describe());
  return p;
}

double tangent_residual(const TangentVector& v) {
  const Point& x = v.base;
  const double scale = std::max(1.0, v.data.norm());
  switch (x.manifold.kind()) {
    case ManifoldKind::Euclidean: return 0.0;
    case ManifoldKind::Sphere: return std::abs(x.data.col(0).dot(v.data.col(0))) / scale;
    case ManifoldKind::Stiefel: {
      const Matrix s = x.data.transpose() * v.data;
      return (s + s.transpose()).norm() / scale;
    }
    case ManifoldKind::SPD: return (v.data - v.data.transpose()).norm() / scale;
    case ManifoldKind::FixedRank: return (v.data - proj_tangent(x, v.data).data).norm() / scale;
  }
  return 0.0;
}

TangentVector make_tangent(const Point& base, Matrix data, double tol) {
  require_shape(base.manifold, data, "make_tangent");
  TangentVector v{base, std::move(data)};
  if (tangent_residual(v) > tol)
    throw ContractViolation("make_tangent: data is not tangent to " + base.manifold.describe());
  return v;
}

TangentVector zero_tangent(const Point& x) {
  return {x, Matrix::Zero(x.data.rows(), x.data.cols())};
}

double inner(const Point& x, const TangentVector& u, const TangentVector& v) {
  require_based_at(x, u, "inner");
  require_based_at(x, v, "inner");
  if (x.manifold.kind() == ManifoldKind::SPD) {
    Eigen::LLT<Matrix> llt(x.data);
    if (llt.info() != Eigen::Success) throw DegenerateInput("inner: SPD base not positive definite");
    const Matrix lu = llt.matrixL().solve(u.data);
    const Matrix a = llt.matrixL().solve(lu.transpose()).transpose();
    const Matrix lv = llt.matrixL().solve(v.data);
    const Matrix b = llt.matrixL().solve(lv.transpose()).transpose();
    return 0.5 * kernels::frobenius_dot(a, b);
  }
  return kernels::frobenius_dot(u.data, v.data);
}

double norm(const Point& x, const TangentVector& u) { return std::sqrt(std::max(0.0, inner(x, u, u))); }

TangentVector proj_tangent(const Point& x, const Matrix& v) {
  require_shape(x.manifold, v, "proj_tangent");
  switch (x.manifold.kind()) {
    case ManifoldKind::Euclidean: return {x, v};
    case ManifoldKind::Sphere: return {x, v - x.data * x.data.col(0).dot(v.col(0))};
    case ManifoldKind::Stiefel: return {x, v - x.data * spd::sym(x.data.transpose() * v)};
    case ManifoldKind::SPD: return {x, spd::sym(v)};
    case ManifoldKind::FixedRank: {
      const auto [u, w] = rank_factors(x);
      const Matrix uv = u.transpose() * v;
      const Matrix vw = v * w;
      return {x, u * uv + vw * w.transpose() - u * (uv * w) * w.transpose()};
    }
  }
  throw UnsupportedKind("proj_tangent: unknown kind");
}

TangentVector egrad_to_rgrad(const Point& x, const Matrix& egrad) {
  require_shape(x.manifold, egrad, "egrad_to_rgrad");
  if (x.manifold.kind() == ManifoldKind::SPD)
    return {x, spd::sym(2.0 * x.data * spd::sym(egrad) * x.data)};
  return proj_tangent(x, egrad);
}

TangentVector scale(const TangentVector& u, double a) { return {u.base, a * u.data}; }

TangentVector add(const TangentVector& u, const TangentVector& v) {
  require_based_at(u.base, v, "add");
  return {u.base, u.data + v.data};
}

Point retract(const Point& x, const TangentVector& eta) {
  require_based_at(x, eta, "retract");
  switch (x.manifold.kind()) {
    case ManifoldKind::Euclidean: return {x.manifold, x.data + eta.data};
    case ManifoldKind::Sphere:
    case ManifoldKind::Stiefel:
    case ManifoldKind::FixedRank: return proj_manifold(x.manifold, x.data + eta.data);
    case ManifoldKind::SPD: return exp_map(x, eta);
  }
  throw UnsupportedKind("retract: unknown kind");
}

Point exp_map(const Point& x, const TangentVector& eta) {
  require_exp_log(x.manifold, "exp_map");
  require_based_at(x, eta, "exp_map");
  switch (x.manifold.kind()) {
    case ManifoldKind::Euclidean: return {x.manifold, x.data + eta.data};
    case ManifoldKind::Sphere: {
      const double t = eta.data.norm();
      if (t == 0.0) return x;
      Matrix y = std::cos(t) * x.data + (std::sin(t) / t) * eta.data;
      y /= y.norm();
      return {x.manifold, y};
    }
    case ManifoldKind::SPD: {
      const Eig e = positive_eig(x.data, "exp_map");
      const Matrix s = spectral(e, [](double v) { return std::sqrt(v); });
      const Matrix si = spectral(e, [](double v) { return 1.0 / std::sqrt(v); });
      return {x.manifold, spd::sym(s * spd::exp(si * eta.data * si) * s)};
    }
    default: break;
  }
  throw UnsupportedKind("exp_map: unsupported kind");
}

TangentVector log_map(const Point& x, const Point& y) {
  require_exp_log(x.manifold, "log_map");
  if (!(x.manifold == y.manifold)) throw ContractViolation("log_map: manifold mismatch");
  switch (x.manifold.kind()) {
    case ManifoldKind::Euclidean: return {x, y.data - x.data};
    case ManifoldKind::Sphere: {
      const double c = x.data.col(0).dot(y.data.col(0));
      const Matrix v = y.data - c * x.data;
      const double s = v.norm();
      const double theta = std::atan2(s, c);
      if (std::numbers::pi - theta < 1e-10)
        throw DegenerateInput("log_map: points are antipodal on the sphere");
      if (s == 0.0) return zero_tangent(x);
      return {x, (theta / s) * v};
    }
    case ManifoldKind::SPD: {
      const Eig e = positive_eig(x.data, "log_map");
      const Matrix s = spectral(e, [](double v) { return std::sqrt(v); });
      const Matrix si = spectral(e, [](double v) { return 1.0 / std::sqrt(v); });
      return {x, spd::sym(s * spd::log(si * y.data * si) * s)};
    }
    default: break;
  }
  throw UnsupportedKind("log_map: unsupported kind");
}

TangentVector transport(const Point& x, const Point& y, const TangentVector& u) {
  require_based_at(x, u, "transport");
  if (!(x.manifold == y.manifold)) throw ContractViolation("transport: manifold mismatch");
  switch (x.manifold.kind()) {
    case ManifoldKind::Euclidean: return {y, u.data};
    case ManifoldKind::Sphere: {
      const TangentVector v = log_map(x, y);
      const double theta = v.data.norm();
      if (theta == 0.0) return {y, u.data};
      const Matrix e = v.data / theta;
      const double a = e.col(0).dot(u.data.col(0));
      return {y, u.data + (std::cos(theta) - 1.0) * a * e - std::sin(theta) * a * x.data};
    }
    case ManifoldKind::SPD: {
      const Eig ex = positive_eig(x.data, "transport");
      const Matrix s = spectral(ex, [](double v) { return std::sqrt(v); });
      const Matrix si = spectral(ex, [](double v) { return 1.0 / std::sqrt(v); });
      const Matrix e = s * spd::sqrt(si * y.data * si) * si;
      return {y, spd::sym(e * u.data * e.transpose())};
    }
    case ManifoldKind::Stiefel:
    case ManifoldKind::FixedRank: return proj_tangent(y, u.data);
  }
  throw UnsupportedKind("transport: unknown kind");
}

double dist(const Point& x, const Point& y) {
  if (!(x.manifold == y.manifold)) throw ContractViolation("dist: manifold mismatch");
  require_shape(x.manifold, x.data, "dist");
  require_shape(x.manifold, y.data, "dist");
  switch (x.manifold.kind()) {
    case ManifoldKind::Sphere: {
      const double chord = std::sqrt(kernels::frobenius_distance_sq(x.data, y.data));
      return 2.0 * std::asin(std::min(1.0, 0.5 * chord));
    }
    case ManifoldKind::SPD: {
      if (x.data == y.data) return 0.0;
      Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(spd::sym(x.data), spd::sym(y.data));
      if (ges.info() != Eigen::Success) throw DegenerateInput("dist: SPD pencil not definite");
      const Vector lam = ges.eigenvalues();
      if (lam.minCoeff() < kEigFloor) throw DegenerateInput("dist: eigenvalue below floor");
      return std::sqrt(0.5 * lam.array().log().square().sum());
    }
    default: return std::sqrt(kernels::frobenius_distance_sq(x.data, y.data));
  }
}

double dist(const ProductPoint& x, const ProductPoint& y) {
  if (x.size() != y.size()) throw ContractViolation("dist: block count mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = dist(x[i], y[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

TangentVector grad_dist_sq(const Point& x, const Point& p) { return scale(log_map(x, p), -2.0); }

Point proj_manifold(const Manifold& manifold, const Matrix& x) {
  require_shape(manifold, x, "proj_manifold");
  if (!x.allFinite()) throw DegenerateInput("proj_manifold: non-finite input");
  switch (manifold.kind()) {
    case ManifoldKind::Euclidean: return {manifold, x};
    case ManifoldKind::Sphere: {
      const double n = x.norm();
      if (n == 0.0) throw DegenerateInput("proj_manifold: zero vector has no sphere projection");
      return {manifold, x / n};
    }
    case ManifoldKind::Stiefel: {
      const Svd svd = thin_svd(x);
      const Index k = manifold.cols();
      if (svd.s(0) == 0.0 || svd.s(k - 1) <= kTieTol * svd.s(0))
        throw DegenerateInput("proj_manifold: Stiefel input is rank deficient");
      return {manifold, svd.u * svd.v.transpose()};
    }
    case ManifoldKind::SPD: {
      Matrix s = spd::sym(x);
      if (sym_eig(s).values.minCoeff() <= 0.0)
        throw DegenerateInput("proj_manifold: symmetric part is not positive definite");
      return {manifold, s};
    }
    case ManifoldKind::FixedRank: {
      const Svd svd = thin_svd(x);
      const Index r = manifold.rank();
      const double top = svd.s(0);
      if (top == 0.0 || svd.s(r - 1) <= kRankTol * top)
        throw DegenerateInput("proj_manifold: input has rank below the target rank");
      if (r < svd.s.size() && svd.s(r - 1) - svd.s(r) <= kTieTol * top)
        throw DegenerateInput("proj_manifold: tied singular values at the truncation rank");
      const Matrix y = svd.u.leftCols(r) * svd.s.head(r).asDiagonal() * svd.v.leftCols(r).transpose();
      return {manifold, y};
    }
  }
  throw UnsupportedKind("proj_manifold: unknown kind");
}

Point random_point(const Manifold& manifold, Rng& rng) {
  switch (manifold.kind()) {
    case ManifoldKind::Euclidean: return {manifold, gaussian(rng, manifold.rows(), manifold.cols())};
    case ManifoldKind::Sphere:
    case ManifoldKind::Stiefel:
      return proj_manifold(manifold, gaussian(rng, manifold.rows(), manifold.cols()));
    case ManifoldKind::SPD: {
      const Matrix g = gaussian(rng, manifold.rows(), manifold.rows());
      return {manifold, spd::exp(0.5 * spd::sym(g))};
    }
    case ManifoldKind::FixedRank: {
      const Index r = manifold.rank();
      const Matrix a = gaussian(rng, manifold.rows(), r);
      const Matrix b = gaussian(rng, r, manifold.cols());
      return proj_manifold(manifold, a * b);
    }
  }
  throw UnsupportedKind("random_point: unknown kind");
}

TangentVector random_unit_tangent(const Point& x, Rng& rng) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    TangentVector v = proj_tangent(x, gaussian(rng, x.data.rows(), x.data.cols()));
    const double n = norm(x, v);
    if (n > 1e-8) return scale(v, 1.0 / n);
  }
  throw DegenerateInput("random_unit_tangent: tangent space appears trivial");
}

namespace spd {

Matrix sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }

Matrix sqrt(const Matrix& a) {
  return spectral(positive_eig(a, "spd::sqrt"), [](double v) { return std::sqrt(v); });
}

Matrix inv_sqrt(const Matrix& a) {
  return spectral(positive_eig(a, "spd::inv_sqrt"), [](double v) { return 1.0 / std::sqrt(v); });
}

Matrix log(const Matrix& a) {
  return spectral(positive_eig(a, "spd::log"), [](double v) { return std::log(v); });
}

Matrix exp(const Matrix& a) {
  return spectral(sym_eig(a), [](double v) { return std::exp(v); });
}

Matrix inverse(const Matrix& a) {
  return spectral(positive_eig(a, "spd::inverse"), [](double v) { return 1.0 / v; });
}

double min_eigenvalue(const Matrix& a) { return sym_eig(a).values.minCoeff(); }
double max_eigenvalue(const Matrix& a) { return sym_eig(a).values.maxCoeff(); }

}  // namespace spd

}  // namespace rbmm
