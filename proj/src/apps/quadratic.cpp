#include "rbmm/apps/quadratic.hpp"

namespace rbmm::apps::quadratic {

namespace {

double other(const Marginal& m) { return (*m.state)[1 - m.block].data(0, 0); }

// Block i minimizes (x - c_i)^2 + o x + (lambda/2)(x - anchor)^2 with c = (1, 2).
ExactSolver solver() {
  return [](const Marginal& m, const Point& anchor, double lambda) -> std::optional<Matrix> {
    const double c = m.block == 0 ? 1.0 : 2.0;
    const double x = (2.0 * c - other(m) + lambda * anchor.data(0, 0)) / (2.0 + lambda);
    return Matrix::Constant(1, 1, x);
  };
}

}  // namespace

BlockProblem problem() {
  BlockProblem p;
  p.manifolds = {Manifold::euclidean(1), Manifold::euclidean(1)};
  p.constraints = {Constraint::whole(), Constraint::whole()};
  p.value = [](const ProductPoint& s) {
    const double a = s[0].data(0, 0);
    const double b = s[1].data(0, 0);
    return (a - 1.0) * (a - 1.0) + (b - 2.0) * (b - 2.0) + a * b;
  };
  p.egrad = [](const ProductPoint& s, std::size_t i) {
    const double a = s[0].data(0, 0);
    const double b = s[1].data(0, 0);
    const double g = i == 0 ? 2.0 * (a - 1.0) + b : 2.0 * (b - 2.0) + a;
    return Matrix::Constant(1, 1, g);
  };
  p.smoothness = 2.0;
  return p;
}

ProductPoint initial_point(double a, double b) {
  const Manifold m = Manifold::euclidean(1);
  return {{Point{m, Matrix::Constant(1, 1, a)}, Point{m, Matrix::Constant(1, 1, b)}}};
}

SurrogateSpec proximal_spec(Schedule lambda) {
  SurrogateSpec s = SurrogateSpec::euclidean_proximal(std::move(lambda));
  s.exact = solver();
  return s;
}

SurrogateSpec exact_spec() {
  SurrogateSpec s = SurrogateSpec::identity();
  s.exact = solver();
  return s;
}

}  // namespace rbmm::apps::quadratic
