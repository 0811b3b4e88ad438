#include "rbmm/apps/cp.hpp"

#include <memory>
#include <numeric>

#include "rbmm/errors.hpp"
#include "rbmm/kernels.hpp"

namespace rbmm::apps::cp {

namespace {

Index product(const std::vector<Index>& dims) {
  return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<>());
}

Manifold factor_manifold(Index rows, Index rank, FactorConstraint c, Index fixed_rank) {
  switch (c) {
    case FactorConstraint::Euclidean: return Manifold::euclidean(rows, rank);
    case FactorConstraint::Stiefel: return Manifold::stiefel(rows, rank);
    case FactorConstraint::FixedRank: return Manifold::fixed_rank(rows, rank, fixed_rank);
  }
  throw ContractViolation("cp: unknown factor constraint");
}

struct Context {
  Tensor x;
  std::vector<Matrix> unfolded;
  double norm_sq = 0.0;
};

}  // namespace

Tensor Tensor::zeros(std::vector<Index> dims) {
  for (Index d : dims)
    if (d < 1) throw ContractViolation("tensor dimensions must be positive");
  Tensor t{std::move(dims), {}};
  t.data = Vector::Zero(product(t.dims));
  return t;
}

Matrix unfold(const Tensor& x, std::size_t mode) {
  const std::size_t m = x.dims.size();
  if (mode >= m) throw ContractViolation("unfold: mode out of range");
  const Index rows = x.dims[mode];
  const Index cols = x.data.size() / rows;
  Matrix out(rows, cols);
  std::vector<Index> idx(m, 0);
  for (Index lin = 0; lin < x.data.size(); ++lin) {
    Index col = 0;
    for (std::size_t j = 0; j < m; ++j)
      if (j != mode) col = col * x.dims[j] + idx[j];
    out(idx[mode], col) = x.data(lin);
    for (std::size_t j = m; j-- > 0;) {
      if (++idx[j] < x.dims[j]) break;
      idx[j] = 0;
    }
  }
  return out;
}

Matrix khatri_rao(const std::vector<Matrix>& factors, std::size_t skip) {
  if (factors.empty()) throw ContractViolation("khatri_rao: no factors");
  const Index r = factors.front().cols();
  Matrix b = Matrix::Ones(1, r);
  for (std::size_t j = 0; j < factors.size(); ++j) {
    if (j == skip) continue;
    const Matrix& u = factors[j];
    if (u.cols() != r) throw ContractViolation("khatri_rao: factors disagree on rank");
    Matrix next(b.rows() * u.rows(), r);
    for (Index a = 0; a < b.rows(); ++a)
      for (Index c = 0; c < u.rows(); ++c)
        next.row(a * u.rows() + c) = b.row(a).cwiseProduct(u.row(c));
    b = std::move(next);
  }
  return b;
}

Tensor reconstruct(const std::vector<Matrix>& factors) {
  std::vector<Index> dims;
  for (const Matrix& u : factors) dims.push_back(u.rows());
  Tensor t = Tensor::zeros(dims);
  // Row-major data is the mode-0 unfolding read row by row.
  const Matrix x0 = factors[0] * khatri_rao(factors, 0).transpose();
  const Index cols = x0.cols();
  for (Index i = 0; i < x0.rows(); ++i) t.data.segment(i * cols, cols) = x0.row(i).transpose();
  return t;
}

double objective(const Tensor& x, const std::vector<Matrix>& factors) {
  const Matrix x0 = unfold(x, 0);
  const Matrix fit = factors[0] * khatri_rao(factors, 0).transpose();
  return kernels::frobenius_distance_sq(x0, fit);
}

double relative_error(const Tensor& x, const std::vector<Matrix>& factors) {
  return std::sqrt(objective(x, factors)) / x.data.norm();
}

Generated cp_generate(const std::vector<Index>& dims, Index rank, double noise, Rng& rng,
                      FactorConstraint first, Index fixed_rank) {
  if (dims.size() < 2 || rank < 1) throw ContractViolation("cp_generate: need order >= 2, rank >= 1");
  std::vector<Matrix> factors;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i == 0 && first == FactorConstraint::Stiefel) {
      if (dims[0] < rank) throw ContractViolation("cp_generate: Stiefel factor needs I_1 >= R");
      const Matrix g = gaussian(rng, dims[0], rank);
      factors.push_back(Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(dims[0], rank));
    } else if (i == 0 && first == FactorConstraint::FixedRank) {
      if (fixed_rank < 1 || fixed_rank > std::min(dims[0], rank))
        throw ContractViolation("cp_generate: fixed rank must lie in [1, min(I_1, R)]");
      const Matrix a = gaussian(rng, dims[0], fixed_rank);
      const Matrix c = gaussian(rng, fixed_rank, rank);
      factors.push_back(a * c);
    } else {
      factors.push_back(gaussian(rng, dims[i], rank));
    }
  }
  Tensor t = reconstruct(factors);
  if (noise > 0.0) t.data += noise * gaussian(rng, t.data.size(), 1);
  return {std::move(t), std::move(factors)};
}

Setup cp_build(const Tensor& x, Index rank, FactorConstraint first, Index fixed_rank,
               Schedule lambda, bool proximal) {
  if (rank < 1) throw ContractViolation("cp_build: rank must be positive");
  auto ctx = std::make_shared<Context>();
  ctx->x = x;
  for (std::size_t i = 0; i < x.dims.size(); ++i) ctx->unfolded.push_back(unfold(x, i));
  ctx->norm_sq = x.data.squaredNorm();

  Setup s;
  BlockProblem& p = s.problem;
  for (std::size_t i = 0; i < x.dims.size(); ++i) {
    p.manifolds.push_back(factor_manifold(x.dims[i], rank,
                                          i == 0 ? first : FactorConstraint::Euclidean, fixed_rank));
    p.constraints.push_back(Constraint::whole());
  }
  p.value = [ctx](const ProductPoint& st) {
    const std::vector<Matrix> f = factors_of(st);
    return kernels::frobenius_distance_sq(ctx->unfolded[0], f[0] * khatri_rao(f, 0).transpose());
  };
  p.egrad = [ctx](const ProductPoint& st, std::size_t i) -> Matrix {
    const std::vector<Matrix> f = factors_of(st);
    const Matrix b = khatri_rao(f, i);
    return -2.0 * (ctx->unfolded[i] - f[i] * b.transpose()) * b;
  };

  for (std::size_t i = 0; i < x.dims.size(); ++i) {
    const FactorConstraint kind = i == 0 ? first : FactorConstraint::Euclidean;
    // The surrogate weight lambda_n ||.||^2 is (lambda/2)||.||^2 with lambda = 2 lambda_n.
    Schedule twice = [lambda](int n) { return 2.0 * lambda(n); };
    if (kind == FactorConstraint::FixedRank) {
      // Projected gradient: curvature 2 ||B^T B||_2 majorizes the quadratic.
      SurrogateSpec spec = SurrogateSpec::prox_linear(
          proximal ? twice : constant_schedule(0.0),
          [](const Marginal& m, const Point&) -> Matrix {
            const std::vector<Matrix> f = factors_of(*m.state);
            const Matrix b = khatri_rao(f, m.block);
            return Matrix::Constant(1, 1, 2.0 * spd::max_eigenvalue(b.transpose() * b));
          });
      s.specs.push_back(std::move(spec));
      continue;
    }
    SurrogateSpec spec = proximal ? SurrogateSpec::euclidean_proximal(twice) : SurrogateSpec::identity();
    const bool stiefel = kind == FactorConstraint::Stiefel;
    spec.exact = [ctx, stiefel](const Marginal& m, const Point& anchor,
                                double lam) -> std::optional<Matrix> {
      const std::vector<Matrix> f = factors_of(*m.state);
      const Matrix b = khatri_rao(f, m.block);
      const double c = 0.5 * lam;
      const Matrix xb = ctx->unfolded[m.block] * b + c * anchor.data;
      if (stiefel) return proj_manifold(m.manifold, xb).data;
      Matrix gram = b.transpose() * b;
      gram.diagonal().array() += c;
      Eigen::LDLT<Matrix> ldlt(gram);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
          ldlt.vectorD().minCoeff() <= 1e-14 * ldlt.vectorD().maxCoeff())
        throw DegenerateInput("cp: Khatri-Rao Gram matrix is singular");
      return Matrix(ldlt.solve(xb.transpose()).transpose());
    };
    s.specs.push_back(std::move(spec));
  }
  return s;
}

ProductPoint random_factors(const Tensor& x, Index rank, FactorConstraint first, Index fixed_rank,
                            Rng& rng) {
  ProductPoint st;
  for (std::size_t i = 0; i < x.dims.size(); ++i) {
    const Manifold m =
        factor_manifold(x.dims[i], rank, i == 0 ? first : FactorConstraint::Euclidean, fixed_rank);
    st.blocks.push_back(random_point(m, rng));
  }
  return st;
}

std::vector<Matrix> factors_of(const ProductPoint& state) {
  std::vector<Matrix> f;
  for (const Point& p : state.blocks) f.push_back(p.data);
  return f;
}

}  // namespace rbmm::apps::cp
