#include "rbmm/apps/subspace.hpp"

#include <cmath>
#include <memory>

#include "rbmm/errors.hpp"
#include "rbmm/kernels.hpp"

namespace rbmm::apps::subspace {

namespace {

// Z(t) = [diag cos(theta t); diag sin(theta t)], so U(t) = Q Z(t).
Matrix z_matrix(const Vector& theta, double t) {
  const Index k = theta.size();
  Matrix z = Matrix::Zero(2 * k, k);
  for (Index j = 0; j < k; ++j) {
    z(j, j) = std::cos(theta(j) * t);
    z(k + j, j) = std::sin(theta(j) * t);
  }
  return z;
}

void check_q(const Matrix& q, const Vector& theta, const Data& data) {
  if (q.cols() != 2 * theta.size() || q.rows() != data.d())
    throw ContractViolation("subspace: Q must be d x 2k for k angles");
}

}  // namespace

Matrix GeodesicModel::frame(double t) const {
  Matrix u(h.rows(), h.cols());
  for (Index j = 0; j < h.cols(); ++j)
    u.col(j) = std::cos(theta(j) * t) * h.col(j) + std::sin(theta(j) * t) * y.col(j);
  return u;
}

Matrix GeodesicModel::q() const {
  Matrix out(h.rows(), 2 * h.cols());
  out << h, y;
  return out;
}

GeodesicModel GeodesicModel::from_q(const Matrix& q, const Vector& theta) {
  const Index k = theta.size();
  if (q.cols() != 2 * k) throw ContractViolation("from_q: Q must have 2k columns");
  return {q.leftCols(k), q.rightCols(k), theta};
}

Data Data::make(std::vector<Matrix> x, std::vector<double> t) {
  if (x.empty() || x.size() != t.size())
    throw ContractViolation("subspace data: need one time per observation");
  Data out{std::move(x), std::move(t), {}};
  for (const Matrix& xi : out.x) {
    if (xi.rows() != out.x.front().rows())
      throw ContractViolation("subspace data: observations must share the ambient dimension");
    out.cov.push_back(xi * xi.transpose());
  }
  return out;
}

Generated st_generate(Index d, Index k, Index T, Index ell, double noise, Rng& rng,
                      double max_angle) {
  if (k < 1 || 2 * k > d) throw ContractViolation("st_generate: need 1 <= k <= d/2");
  if (T < 1 || ell < 1) throw ContractViolation("st_generate: need T >= 1 and ell >= 1");
  if (noise < 0.0) throw ContractViolation("st_generate: noise must be nonnegative");
  const Matrix g = gaussian(rng, d, 2 * k);
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(d, 2 * k);
  Vector theta(k);
  for (Index j = 0; j < k; ++j) theta(j) = uniform(rng, 0.0, max_angle);
  GeodesicModel truth = GeodesicModel::from_q(q, theta);
  std::vector<Matrix> xs;
  std::vector<double> ts;
  for (Index i = 0; i < T; ++i) {
    const double t = T == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(T - 1);
    const Matrix gi = gaussian(rng, k, ell);
    const Matrix ni = gaussian(rng, d, ell);
    xs.push_back(truth.frame(t) * gi + noise * ni);
    ts.push_back(t);
  }
  return {Data::make(std::move(xs), std::move(ts)), std::move(truth)};
}

Generated st_generate(Index d, Index k, Index T, Index ell, double noise, std::uint64_t seed,
                      double max_angle) {
  Rng rng(seed);
  return st_generate(d, k, T, ell, noise, rng, max_angle);
}

ThetaCoefficients st_theta_coefficients(const Matrix& h, const Matrix& y, const Data& data) {
  if (h.rows() != data.d() || y.rows() != h.rows() || y.cols() != h.cols())
    throw ContractViolation("st_theta_coefficients: shape mismatch");
  const Index T = static_cast<Index>(data.x.size());
  const Index k = h.cols();
  ThetaCoefficients c;
  c.alpha.resize(T, k);
  c.beta.resize(T, k);
  c.gamma.resize(T, k);
  c.r.resize(T, k);
  c.phi.resize(T, k);
  c.b.resize(T, k);
  c.lipschitz = Vector::Zero(k);
  for (Index i = 0; i < T; ++i) {
    const Matrix ch = data.cov[i] * h;
    const Matrix cy = data.cov[i] * y;
    for (Index j = 0; j < k; ++j) {
      const double a = h.col(j).dot(ch.col(j));
      const double be = y.col(j).dot(ch.col(j));
      const double ga = y.col(j).dot(cy.col(j));
      const double half = 0.5 * (a - ga);
      c.alpha(i, j) = a;
      c.beta(i, j) = be;
      c.gamma(i, j) = ga;
      c.phi(i, j) = (be == 0.0 && half == 0.0) ? 0.0 : std::atan2(be, half);
      c.r(i, j) = std::hypot(half, be);
      c.b(i, j) = 0.5 * (a + ga);
      const double t = data.t[i];
      c.lipschitz(j) += 4.0 * c.r(i, j) * t * t;
    }
  }
  return c;
}

double objective(const Matrix& q, const Vector& theta, const Data& data) {
  check_q(q, theta, data);
  double f = 0.0;
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    const Matrix p = data.x[i].transpose() * (q * z_matrix(theta, data.t[i]));
    f -= kernels::frobenius_dot(p, p);
  }
  return f;
}

double separable_objective(const ThetaCoefficients& c, const Vector& theta, const Data& data) {
  double f = 0.0;
  for (Index i = 0; i < c.r.rows(); ++i)
    for (Index j = 0; j < c.r.cols(); ++j)
      f -= c.r(i, j) * std::cos(2.0 * theta(j) * data.t[i] - c.phi(i, j)) + c.b(i, j);
  return f;
}

Matrix grad_q(const Matrix& q, const Vector& theta, const Data& data) {
  check_q(q, theta, data);
  Matrix g = Matrix::Zero(q.rows(), q.cols());
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    const Matrix z = z_matrix(theta, data.t[i]);
    g -= 2.0 * data.cov[i] * (q * z) * z.transpose();
  }
  return g;
}

Vector grad_theta(const ThetaCoefficients& c, const Vector& theta, const Data& data) {
  Vector g = Vector::Zero(theta.size());
  for (Index i = 0; i < c.r.rows(); ++i) {
    const double t = data.t[i];
    for (Index j = 0; j < c.r.cols(); ++j)
      g(j) += 2.0 * c.r(i, j) * t * std::sin(2.0 * theta(j) * t - c.phi(i, j));
  }
  return g;
}

namespace {

Vector theta_step(const ThetaCoefficients& c, const Vector& theta, const Data& data,
                  double lambda_theta) {
  const Vector g = grad_theta(c, theta, data);
  Vector out = theta;
  for (Index j = 0; j < theta.size(); ++j) {
    const double w = c.lipschitz(j) + lambda_theta;
    if (w > 0.0) out(j) -= g(j) / w;
  }
  return out;
}

}  // namespace

Update st_block_update(const Matrix& q, const Vector& theta, const Data& data, double lambda_q,
                       double lambda_theta) {
  const Manifold st = Manifold::stiefel(q.rows(), q.cols());
  const Matrix qn = proj_manifold(st, lambda_q * q - grad_q(q, theta, data)).data;
  const Index k = theta.size();
  const ThetaCoefficients c = st_theta_coefficients(qn.leftCols(k), qn.rightCols(k), data);
  return {qn, theta_step(c, theta, data, lambda_theta)};
}

double st_geodesic_error(const GeodesicModel& estimate, const GeodesicModel& truth, int grid_points) {
  if (grid_points < 1) throw ContractViolation("st_geodesic_error: empty grid");
  if (estimate.d() != truth.d() || estimate.k() != truth.k())
    throw ContractViolation("st_geodesic_error: models have different shapes");
  const double scale = 1.0 / (2.0 * static_cast<double>(truth.k()));
  double total = 0.0;
  for (int g = 0; g < grid_points; ++g) {
    const double t = grid_points == 1 ? 0.0 : static_cast<double>(g) / (grid_points - 1);
    const Matrix ue = estimate.frame(t);
    const Matrix ut = truth.frame(t);
    const Matrix diff = ue * ue.transpose() - ut * ut.transpose();
    total += scale * kernels::frobenius_dot(diff, diff);
  }
  return std::sqrt(total / grid_points);
}

BlockProblem st_problem(const Data& data, Index k) {
  auto shared = std::make_shared<const Data>(data);
  const Index d = data.d();
  BlockProblem p;
  p.manifolds = {Manifold::stiefel(d, 2 * k), Manifold::euclidean(k)};
  p.constraints = {Constraint::whole(), Constraint::whole()};
  p.value = [shared](const ProductPoint& s) {
    return objective(s[0].data, s[1].data.col(0), *shared);
  };
  p.egrad = [shared, k](const ProductPoint& s, std::size_t i) -> Matrix {
    const Matrix& q = s[0].data;
    const Vector theta = s[1].data.col(0);
    if (i == 0) return grad_q(q, theta, *shared);
    const ThetaCoefficients c = st_theta_coefficients(q.leftCols(k), q.rightCols(k), *shared);
    return grad_theta(c, theta, *shared);
  };
  return p;
}

SurrogateSpec q_spec(Schedule lambda_q) {
  // g = f(a) + <grad f(a), Q - a> + (lambda_q/2)||Q - a||^2, written in the
  // regularized-linear form with R = -grad f(a)/2 and weight lambda_q/2.
  Schedule half = [lambda_q](int n) { return 0.5 * lambda_q(n); };
  return SurrogateSpec::regularized_linear_stiefel(std::move(half));
}

SurrogateSpec theta_spec(const Data& data, Schedule lambda_theta) {
  auto shared = std::make_shared<const Data>(data);
  const auto coefficients = [shared](const Marginal& m) {
    const Matrix& q = (*m.state)[0].data;
    const Index k = q.cols() / 2;
    return st_theta_coefficients(q.leftCols(k), q.rightCols(k), *shared);
  };
  SurrogateSpec s = SurrogateSpec::prox_linear(
      std::move(lambda_theta), [coefficients](const Marginal& m, const Point&) -> Matrix {
        return coefficients(m).lipschitz;
      });
  s.exact = [coefficients, shared](const Marginal& m, const Point& anchor,
                                   double lambda) -> std::optional<Matrix> {
    return theta_step(coefficients(m), anchor.data.col(0), *shared, lambda);
  };
  return s;
}

ProductPoint to_state(const GeodesicModel& model) {
  const Manifold st = Manifold::stiefel(model.d(), 2 * model.k());
  return {{Point{st, model.q()}, Point{Manifold::euclidean(model.k()), model.theta}}};
}

GeodesicModel from_state(const ProductPoint& state) {
  return GeodesicModel::from_q(state[0].data, state[1].data.col(0));
}

ProductPoint random_state(Index d, Index k, Rng& rng, double max_angle) {
  const Point q = random_point(Manifold::stiefel(d, 2 * k), rng);
  Vector theta(k);
  for (Index j = 0; j < k; ++j) theta(j) = uniform(rng, 0.0, max_angle);
  return {{q, Point{Manifold::euclidean(k), theta}}};
}

}  // namespace rbmm::apps::subspace
