#include "rbmm/apps/rpca.hpp"

#include <cmath>
#include <memory>

#include "rbmm/errors.hpp"
#include "rbmm/kernels.hpp"

namespace rbmm::apps::rpca {

namespace {

void check(const Params& p) {
  if (!(p.smoothing > 0.0) || !(p.fidelity > 0.0) || p.sparsity < 0.0 || p.rank < 1)
    throw ContractViolation("rpca: need sigma > 0, mu > 0, lambda >= 0, rank >= 1");
}

}  // namespace

double g_sigma(const Matrix& s, double lambda, double sigma) {
  return kernels::huber_sum(s.data(), static_cast<std::size_t>(s.size()), sigma, lambda);
}

Matrix z_sigma(const Matrix& s, double lambda, double sigma) {
  Matrix out(s.rows(), s.cols());
  kernels::clip_ratio(s.data(), static_cast<std::size_t>(s.size()), sigma, lambda, out.data());
  return out;
}

Matrix l_update(const Matrix& m, const Matrix& s, const Matrix& l_prev, const Params& p, double prox) {
  check(p);
  const double w = 1.0 / p.fidelity;
  const Matrix c = (w * (m - s) + prox * l_prev) / (w + prox);
  return proj_manifold(Manifold::fixed_rank(m.rows(), m.cols(), p.rank), c).data;
}

Matrix s_update(const Matrix& m, const Matrix& l, const Matrix& s_prev, const Params& p, double prox) {
  check(p);
  const double k = p.fidelity * prox;
  const double mu_t = p.fidelity / (1.0 + k);
  const Matrix b = ((m - l) + k * s_prev) / (1.0 + k);
  Matrix out(b.rows(), b.cols());
  kernels::huber_shrink(b.data(), static_cast<std::size_t>(b.size()), mu_t, p.smoothing, p.sparsity,
                        out.data());
  return out;
}

double objective(const Matrix& m, const Matrix& l, const Matrix& s, const Params& p) {
  const Matrix r = m - l;
  return g_sigma(s, p.sparsity, p.smoothing) +
         kernels::frobenius_distance_sq(r, s) / (2.0 * p.fidelity);
}

Generated rpca_generate(Index rows, Index cols, Index rank, double corruption, Rng& rng) {
  if (rank < 1 || rank >= std::min(rows, cols))
    throw ContractViolation("rpca_generate: need 1 <= r < min(rows, cols)");
  if (corruption < 0.0 || corruption > 1.0)
    throw ContractViolation("rpca_generate: corruption fraction must lie in [0, 1]");
  const Matrix a = gaussian(rng, rows, rank);
  const Matrix b = gaussian(rng, cols, rank);
  Generated g;
  g.low_rank = a * b.transpose();
  g.sparse = Matrix::Zero(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      if (uniform(rng, 0.0, 1.0) < corruption) g.sparse(i, j) = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
  g.observed = g.low_rank + g.sparse;
  return g;
}

Setup rpca_build(const Matrix& observed, const Params& params, Schedule prox) {
  check(params);
  auto mp = std::make_shared<const Matrix>(observed);
  const Params p = params;
  Setup s;
  s.problem.manifolds = {Manifold::fixed_rank(observed.rows(), observed.cols(), p.rank),
                         Manifold::euclidean(observed.rows(), observed.cols())};
  s.problem.constraints = {Constraint::whole(), Constraint::whole()};
  s.problem.value = [mp, p](const ProductPoint& st) {
    return objective(*mp, st[0].data, st[1].data, p);
  };
  s.problem.egrad = [mp, p](const ProductPoint& st, std::size_t i) -> Matrix {
    const Matrix resid = (*mp - st[0].data - st[1].data) / p.fidelity;
    if (i == 0) return -resid;
    return z_sigma(st[1].data, p.sparsity, p.smoothing) - resid;
  };
  s.problem.smoothness = 1.0 / p.fidelity + 1.0 / p.smoothing;

  SurrogateSpec l = SurrogateSpec::euclidean_proximal(prox);
  l.exact = [mp, p](const Marginal& m, const Point& anchor, double lam) -> std::optional<Matrix> {
    return l_update(*mp, (*m.state)[1].data, anchor.data, p, lam);
  };
  SurrogateSpec sp = SurrogateSpec::euclidean_proximal(prox);
  sp.exact = [mp, p](const Marginal& m, const Point& anchor, double lam) -> std::optional<Matrix> {
    return s_update(*mp, (*m.state)[0].data, anchor.data, p, lam);
  };
  s.specs = {l, sp};
  return s;
}

ProductPoint rpca_initial_point(const Matrix& observed, const Params& p) {
  const Manifold lm = Manifold::fixed_rank(observed.rows(), observed.cols(), p.rank);
  return {{proj_manifold(lm, observed),
           Point{Manifold::euclidean(observed.rows(), observed.cols()),
                 Matrix::Zero(observed.rows(), observed.cols())}}};
}

}  // namespace rbmm::apps::rpca
