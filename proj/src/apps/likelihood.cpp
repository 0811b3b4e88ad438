#include "rbmm/apps/likelihood.hpp"

#include <cmath>
#include <memory>
#include <numbers>

#include "rbmm/errors.hpp"

namespace rbmm::apps::likelihood {

Matrix Problem::scatter(const Vector& mu) const {
  const Vector d = mean - mu;
  return cov + d * d.transpose();
}

double Problem::min_eigenvalue_bound() const {
  return spd::min_eigenvalue(sigma_hat) * std::exp(-std::numbers::sqrt2 * rho2);
}

double Problem::smoothness_bound() const {
  // mu-block Hessian is 2 Sigma^{-1}; Sigma-block bound uses lambda_max(S) <= 4 rho1^2.
  const double lmin = min_eigenvalue_bound();
  return std::max(2.0 / lmin, 8.0 * rho1 * rho1 / lmin);
}

Problem ol_make(const Matrix& samples, double rho2, std::optional<double> rho1,
                std::optional<Vector> mu_hat, std::optional<Matrix> sigma_hat) {
  const Index m = samples.rows();
  const Index n = samples.cols();
  if (m < 2 || n < 1) throw ContractViolation("ol_make: need at least two samples");
  if (!(rho2 > 0.0)) throw ContractViolation("ol_make: rho2 must be positive");
  Problem p;
  p.samples = samples;
  p.mean = samples.colwise().mean().transpose();
  const Matrix centered = samples.rowwise() - p.mean.transpose();
  p.cov = spd::sym(centered.transpose() * centered / static_cast<double>(m));
  p.mu_hat = mu_hat.value_or(p.mean);
  p.sigma_hat = sigma_hat.value_or(p.cov);
  if (p.mu_hat.size() != n || p.sigma_hat.rows() != n || p.sigma_hat.cols() != n)
    throw ContractViolation("ol_make: nominal moments have the wrong shape");
  if (spd::min_eigenvalue(p.sigma_hat) < 1e-12)
    throw DegenerateInput("ol_make: nominal covariance is not positive definite");
  if (rho1) {
    p.rho1 = *rho1;
  } else {
    p.rho1 = 0.0;
    for (Index i = 0; i < m; ++i)
      p.rho1 = std::max(p.rho1, (samples.row(i).transpose() - p.mu_hat).norm());
  }
  if (!(p.rho1 > 0.0)) throw ContractViolation("ol_make: rho1 must be positive");
  p.rho2 = rho2;
  return p;
}

Problem ol_make_split(const Matrix& samples, Index train, double rho2) {
  if (train < 2 || samples.rows() - train < 2)
    throw ContractViolation("ol_make_split: both halves need at least two samples");
  const Problem nominal = ol_make(samples.topRows(train), rho2);
  return ol_make(samples.bottomRows(samples.rows() - train), rho2, std::nullopt, nominal.mean,
                 nominal.cov);
}

Matrix ol_generate(Index n, Index m, Rng& rng) {
  if (n < 1 || m < 2) throw ContractViolation("ol_generate: need n >= 1 and m >= 2");
  const Matrix a = gaussian(rng, n, n);
  const Matrix sigma = a * a.transpose() / static_cast<double>(n) + 0.5 * Matrix::Identity(n, n);
  const Vector mean = gaussian(rng, n, 1);
  const Matrix z = gaussian(rng, m, n);
  const Matrix l = Eigen::LLT<Matrix>(sigma).matrixL();
  return (z * l.transpose()).rowwise() + mean.transpose();
}

Matrix ol_generate(Index n, Index m, std::uint64_t seed) {
  Rng rng(seed);
  return ol_generate(n, m, rng);
}

double objective(const Problem& p, const Vector& mu, const Matrix& sigma) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw DegenerateInput("objective: Sigma not positive definite");
  const Matrix sinv_s = llt.solve(p.scatter(mu));
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return sinv_s.trace() + logdet;
}

BlockProblem ol_build(const Problem& problem) {
  auto p = std::make_shared<const Problem>(problem);
  const Index n = problem.n();
  BlockProblem b;
  b.manifolds = {Manifold::euclidean(n), Manifold::spd(n)};
  b.constraints = {Constraint::euclidean_ball(problem.mu_hat, problem.rho1),
                   Constraint::geodesic_ball(problem.sigma_hat, problem.rho2)};
  b.value = [p](const ProductPoint& s) { return objective(*p, s[0].data.col(0), s[1].data); };
  b.egrad = [p](const ProductPoint& s, std::size_t i) -> Matrix {
    const Vector mu = s[0].data.col(0);
    const Matrix sinv = spd::inverse(s[1].data);
    if (i == 0) return -2.0 * sinv * (p->mean - mu);
    return spd::sym(sinv - sinv * p->scatter(mu) * sinv);
  };
  b.smoothness = problem.smoothness_bound();
  return b;
}

std::vector<SurrogateSpec> ol_specs(const Problem& problem, Schedule lambda, Schedule inner_tol,
                                    int inner_budget) {
  auto p = std::make_shared<const Problem>(problem);
  SurrogateSpec mu = SurrogateSpec::euclidean_proximal(lambda);
  // argmin (xbar - mu)^T Sigma^{-1} (xbar - mu) + (lambda/2)||mu - mu_prev||^2
  mu.exact = [p](const Marginal& m, const Point& anchor, double lam) -> std::optional<Matrix> {
    const Matrix sinv = spd::inverse((*m.state)[1].data);
    const Index n = sinv.rows();
    const Matrix a = 2.0 * sinv + lam * Matrix::Identity(n, n);
    const Vector rhs = 2.0 * sinv * p->mean + lam * anchor.data.col(0);
    return Matrix(a.llt().solve(rhs));
  };
  mu.strong_convexity = [p](double lam) { return lam; };
  mu.inner_budget = inner_budget;
  mu.inner_tol = inner_tol;

  SurrogateSpec sigma = SurrogateSpec::riemannian_proximal(lambda);
  // Block minimizer without the proximal term is the scatter matrix.
  sigma.exact = [p](const Marginal& m, const Point&, double lam) -> std::optional<Matrix> {
    if (lam != 0.0) return std::nullopt;
    return p->scatter((*m.state)[0].data.col(0));
  };
  // The marginal is geodesically convex and d^2 is 2-strongly convex.
  sigma.strong_convexity = [](double lam) { return lam; };
  sigma.inner_budget = inner_budget;
  sigma.inner_tol = std::move(inner_tol);
  return {mu, sigma};
}

ProductPoint ol_initial_point(const Problem& p, Rng& rng) {
  const Index n = p.n();
  Vector dir = gaussian(rng, n, 1);
  dir /= dir.norm();
  const Vector mu = p.mu_hat + 0.5 * p.rho1 * dir;
  const Point center{Manifold::spd(n), p.sigma_hat};
  const TangentVector v = random_unit_tangent(center, rng);
  const Point sigma = exp_map(center, scale(v, 0.5 * p.rho2));
  return {{Point{Manifold::euclidean(n), mu}, sigma}};
}

}  // namespace rbmm::apps::likelihood
