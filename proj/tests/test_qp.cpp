#include <sstream>

#include "cascade/qp/solve.hpp"
#include "cascade/qp/types.hpp"
#include "doctest.h"

using namespace cascade::qp;

namespace {

QpSolution solve_builder(const ProblemBuilder& builder) { return solve(builder.finish()); }

}  // namespace

TEST_CASE("registry hands out dense indices from zero") {
  VariableRegistry reg;
  const VarKey a{1, 0, 0, 0};
  const VarKey b{1, 0, 0, 1};
  CHECK(reg.add(a) == 0);
  CHECK(reg.add(b) == 1);
  CHECK(reg.size() == 2);
  CHECK(reg.index_of(a) == 0);
  CHECK(reg.index_of(b) == 1);
  CHECK(reg.contains(a));
  CHECK(!reg.contains(VarKey{2, 0, 0, 0}));
  CHECK(reg.key_at(1) == b);
}

TEST_CASE("registry rejects duplicate keys and unknown lookups") {
  VariableRegistry reg;
  const VarKey a{3, 1, 2, 7};
  reg.add(a);
  CHECK_THROWS_AS(reg.add(a), std::invalid_argument);
  CHECK_THROWS_AS(reg.index_of(VarKey{3, 1, 2, 8}), std::out_of_range);
}

TEST_CASE("builder assembles the standard form") {
  ProblemBuilder b;
  const int x = b.add_var(0.0, 5.0);
  const int y = b.add_var();
  b.add_quadratic(x, 2.0);   // 2x^2, so P_xx = 4
  b.add_linear(y, -1.0);
  const int r = b.begin_row(1.0, 3.0);
  b.coeff(r, x, 1.0);
  b.coeff(r, y, 2.0);
  const QpProblem p = b.finish();
  CHECK(p.num_vars == 2);
  CHECK(p.num_rows() == 1);
  CHECK(p.quadratic_cost.coeff(x, x) == doctest::Approx(4.0));
  CHECK(p.var_lower[x] == 0.0);
  CHECK(p.var_upper[x] == 5.0);
  CHECK(!is_finite_bound(p.var_lower[y]));
  Eigen::Vector2d at(1.0, 2.0);
  CHECK(p.objective_at(at) == doctest::Approx(2.0 * 1.0 - 2.0));
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("validate names broken invariants") {
  ProblemBuilder b;
  const int x = b.add_var(1.0, -1.0);
  (void)x;
  CHECK_THROWS_AS(b.finish().validate(), std::invalid_argument);

  QpProblem p;
  p.num_vars = 2;
  p.linear_cost = Eigen::VectorXd::Zero(2);
  p.var_lower = Eigen::VectorXd::Constant(2, -kInf);
  p.var_upper = Eigen::VectorXd::Constant(2, kInf);
  p.quadratic_cost.resize(2, 2);
  std::vector<Triplet> t{{0, 1, 1.0}};   // asymmetric
  p.quadratic_cost.setFromTriplets(t.begin(), t.end());
  p.constraints.resize(0, 2);
  p.row_lower.resize(0);
  p.row_upper.resize(0);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("minimize x^2 subject to x >= 3") {
  ProblemBuilder b;
  const int x = b.add_var(3.0, kInf);
  b.add_quadratic(x, 1.0);
  const QpSolution s = solve_builder(b);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.primal[x] == doctest::Approx(3.0).epsilon(1e-7));
  CHECK(s.objective == doctest::Approx(9.0).epsilon(1e-6));
}

TEST_CASE("minimize x over the unit interval") {
  ProblemBuilder b;
  const int x = b.add_var(0.0, 1.0);
  b.add_linear(x, 1.0);
  const QpSolution s = solve_builder(b);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(std::abs(s.primal[x]) < 1e-8);
  CHECK(std::abs(s.objective) < 1e-8);
}

TEST_CASE("equality-constrained least squares lands on (0, 1)") {
  // minimize (x-1)^2 + (y-2)^2 subject to x + y = 1
  ProblemBuilder b;
  const int x = b.add_var();
  const int y = b.add_var();
  b.add_quadratic(x, 1.0);
  b.add_linear(x, -2.0);
  b.add_quadratic(y, 1.0);
  b.add_linear(y, -4.0);
  const int r = b.begin_row(1.0, 1.0);
  b.coeff(r, x, 1.0);
  b.coeff(r, y, 1.0);
  const QpProblem p = b.finish();
  const QpSolution s = solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.primal[x] == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(s.primal[y] == doctest::Approx(1.0).epsilon(1e-7));
  const double dx = s.primal[x] - 1.0, dy = s.primal[y] - 2.0;
  CHECK(dx * dx + dy * dy == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::abs(s.primal[x] + s.primal[y] - 1.0) <= 1e-6);
  CHECK(s.objective == doctest::Approx(p.objective_at(s.primal)).epsilon(1e-6));
}

TEST_CASE("same problem twice gives the same objective") {
  ProblemBuilder b;
  const int x = b.add_var(-2.0, 7.0);
  const int y = b.add_var(-2.0, 7.0);
  b.add_quadratic(x, 1.5);
  b.add_quadratic(y, 0.5);
  b.add_linear(x, -3.0);
  b.add_linear(y, 1.0);
  const int r = b.begin_row(-kInf, 4.0);
  b.coeff(r, x, 1.0);
  b.coeff(r, y, -1.0);
  const QpProblem p = b.finish();
  const QpSolution s1 = solve(p);
  const QpSolution s2 = solve(p);
  REQUIRE(s1.status == SolveStatus::Optimal);
  REQUIRE(s2.status == SolveStatus::Optimal);
  CHECK(std::abs(s1.objective - s2.objective) <=
        1e-9 * std::max(1.0, std::abs(s1.objective)));
  CHECK((s1.primal - s2.primal).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("separable box QP clamps the unconstrained minimizer") {
  // min sum x_i^2 + c_i x_i over boxes; minimizer is -c/2 clamped.
  const double c[5] = {-4.0, 3.0, 0.5, -10.0, 2.0};
  const double lo[5] = {0.0, -1.0, -2.0, 0.0, -0.5};
  const double hi[5] = {3.0, 1.0, 2.0, 4.0, 0.5};
  const double expect[5] = {2.0, -1.0, -0.25, 4.0, -0.5};
  ProblemBuilder b;
  for (int i = 0; i < 5; ++i) {
    const int v = b.add_var(lo[i], hi[i]);
    b.add_quadratic(v, 1.0);
    b.add_linear(v, c[i]);
  }
  const QpSolution s = solve_builder(b);
  REQUIRE(s.status == SolveStatus::Optimal);
  for (int i = 0; i < 5; ++i) CHECK(s.primal[i] == doctest::Approx(expect[i]).epsilon(1e-7));
  CHECK(s.objective == doctest::Approx(-30.8125).epsilon(1e-8));
}

TEST_CASE("active row constraint splits the load evenly") {
  // min x^2 + y^2 subject to x + y >= 2; optimum (1, 1), row dual -2.
  ProblemBuilder b;
  const int x = b.add_var();
  const int y = b.add_var();
  b.add_quadratic(x, 1.0);
  b.add_quadratic(y, 1.0);
  const int r = b.begin_row(2.0, kInf);
  b.coeff(r, x, 1.0);
  b.coeff(r, y, 1.0);
  const QpSolution s = solve_builder(b);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.primal[x] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(s.primal[y] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(s.objective == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(s.row_duals[r] == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("lower-bound row dual reports with a negative sign") {
  // min x^2 with the bound written as a row: x >= 3. Stationarity gives
  // 2x + y = 0 at x = 3, so y = -6.
  ProblemBuilder b;
  const int x = b.add_var();
  b.add_quadratic(x, 1.0);
  const int r = b.begin_row(3.0, kInf);
  b.coeff(r, x, 1.0);
  const QpSolution s = solve_builder(b);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.primal[x] == doctest::Approx(3.0).epsilon(1e-7));
  CHECK(s.row_duals[r] == doctest::Approx(-6.0).epsilon(1e-6));
}

TEST_CASE("pure equality system solves in one shot") {
  // min 0.5*||x||^2 subject to x1 + x2 = 2 and x1 - x2 = 0.
  ProblemBuilder b;
  const int x1 = b.add_var();
  const int x2 = b.add_var();
  b.add_quadratic(x1, 0.5);
  b.add_quadratic(x2, 0.5);
  const int r1 = b.begin_row(2.0, 2.0);
  b.coeff(r1, x1, 1.0);
  b.coeff(r1, x2, 1.0);
  const int r2 = b.begin_row(0.0, 0.0);
  b.coeff(r2, x1, 1.0);
  b.coeff(r2, x2, -1.0);
  const QpSolution s = solve_builder(b);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.primal[x1] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.primal[x2] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.row_duals[r1] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(std::abs(s.row_duals[r2]) < 1e-6);
}

TEST_CASE("pinned variable is honored exactly") {
  ProblemBuilder b;
  const int x = b.add_var(1.5, 1.5);
  const int y = b.add_var(-10.0, 10.0);
  b.add_quadratic(x, 1.0);
  b.add_linear(x, -6.0);   // pull toward 3, pin wins
  b.add_quadratic(y, 1.0);
  const int r = b.begin_row(2.0, kInf);
  b.coeff(r, x, 1.0);
  b.coeff(r, y, 1.0);
  const QpSolution s = solve_builder(b);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.primal[x] == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(s.primal[y] == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("conflicting bounds are reported infeasible") {
  ProblemBuilder b;
  const int x = b.add_var(2.0, kInf);
  b.add_quadratic(x, 1.0);
  const int r = b.begin_row(-kInf, 1.0);
  b.coeff(r, x, 1.0);
  const QpSolution s = solve_builder(b);
  CHECK(s.status == SolveStatus::Infeasible);
}

TEST_CASE("descent direction without a floor is unbounded") {
  ProblemBuilder b;
  const int x = b.add_var(0.0, kInf);
  b.add_linear(x, -1.0);
  const QpSolution s = solve_builder(b);
  CHECK(s.status == SolveStatus::Unbounded);
}

TEST_CASE("unconstrained linear slope is unbounded") {
  ProblemBuilder b;
  const int x = b.add_var();
  b.add_linear(x, 1.0);
  const QpSolution s = solve_builder(b);
  CHECK(s.status == SolveStatus::Unbounded);
}

TEST_CASE("iteration cap surfaces as IterLimit") {
  ProblemBuilder b;
  const int x = b.add_var(3.0, kInf);
  b.add_quadratic(x, 1.0);
  SolveOptions opts;
  opts.max_iters = 0;
  const QpSolution s = solve(b.finish(), opts);
  CHECK(s.status == SolveStatus::IterLimit);
}

TEST_CASE("rows with no finite bounds are ignored") {
  ProblemBuilder b;
  const int x = b.add_var(0.0, 2.0);
  b.add_linear(x, 1.0);
  const int r = b.begin_row(-kInf, kInf);
  b.coeff(r, x, 5.0);
  const QpSolution s = solve_builder(b);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(std::abs(s.primal[x]) < 1e-8);
  CHECK(s.row_duals[r] == 0.0);
}

TEST_CASE("tighten only narrows variable bounds") {
  ProblemBuilder b;
  const int x = b.add_var(0.0, 10.0);
  b.tighten_var_bounds(x, -5.0, 4.0);
  b.tighten_var_bounds(x, 1.0, 8.0);
  const QpProblem p = b.finish();
  CHECK(p.var_lower[x] == 1.0);
  CHECK(p.var_upper[x] == 4.0);
}

TEST_CASE("prepared problem resolves after cost and bound edits") {
  ProblemBuilder b;
  const int x = b.add_var(-10.0, 10.0);
  const int y = b.add_var(-10.0, 10.0);
  b.add_quadratic(x, 1.0);
  b.add_quadratic(y, 1.0);
  b.add_linear(x, -2.0);
  const int r = b.begin_row(1.0, 1.0);
  b.coeff(r, x, 1.0);
  b.coeff(r, y, 1.0);
  QpProblem p = b.finish();
  PreparedQp prep(p);
  const QpSolution s1 = prep.solve();
  REQUIRE(s1.status == SolveStatus::Optimal);

  Eigen::VectorXd c2(2);
  c2 << 0.0, -4.0;
  prep.set_linear_cost(c2);
  const QpSolution s2 = prep.solve();
  p.linear_cost = c2;
  const QpSolution fresh = solve(p);
  REQUIRE(s2.status == SolveStatus::Optimal);
  CHECK(s2.objective ==
        doctest::Approx(fresh.objective).epsilon(1e-9));
  CHECK((s2.primal - fresh.primal).cwiseAbs().maxCoeff() < 1e-7);

  Eigen::VectorXd rl(1), ru(1);
  rl << 3.0;
  ru << 3.0;
  prep.set_row_bounds(rl, ru);
  const QpSolution s3 = prep.solve();
  REQUIRE(s3.status == SolveStatus::Optimal);
  CHECK(s3.primal[x] + s3.primal[y] == doctest::Approx(3.0).epsilon(1e-7));
}

TEST_CASE("prepared problem rejects structural changes") {
  ProblemBuilder b;
  const int x = b.add_var(0.0, 1.0);
  b.add_quadratic(x, 1.0);
  const int r = b.begin_row(0.0, 2.0);
  b.coeff(r, x, 1.0);
  PreparedQp prep(b.finish());
  Eigen::VectorXd rl(1), ru(1);
  rl << 0.0;
  ru << kInf;   // upper side becomes free: different structure
  CHECK_THROWS_AS(prep.set_row_bounds(rl, ru), std::invalid_argument);
  Eigen::VectorXd vlo(1), vup(1);
  vlo << 0.5;
  vup << 0.5;   // pinning a previously ranged variable
  CHECK_THROWS_AS(prep.set_var_bounds(vlo, vup), std::invalid_argument);
}

TEST_CASE("problem dump carries all sections") {
  ProblemBuilder b;
  const int x = b.add_var(0.0, 1.0);
  b.add_quadratic(x, 1.0);
  const int r = b.begin_row(0.0, 2.0);
  b.coeff(r, x, 1.0);
  std::ostringstream os;
  dump_problem(b.finish(), os);
  const std::string text = os.str();
  CHECK(text.find("qp 1 1") != std::string::npos);
  CHECK(text.find("rows") != std::string::npos);
  CHECK(text.find("vars") != std::string::npos);
}
