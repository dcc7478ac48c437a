#pragma once

#include <memory>

#include "cascade/qp/types.hpp"

namespace cascade::qp {

struct SolveOptions {
  double eps_primal = 1e-9;
  double eps_dual = 1e-9;
  double eps_gap = 1e-9;
  int max_iters = 100;
  bool polish = true;
  int scaling_iters = 10;     // Ruiz equilibration passes, 0 disables
  double static_reg = 1e-9;   // KKT regularization added to both blocks
  int refine_steps = 6;       // iterative refinement rounds per KKT solve
};

// Interior-point solve of one problem. Convex QP with row and variable
// bounds; P must be positive semidefinite.
QpSolution solve(const QpProblem& problem, const SolveOptions& opts = {});

// Keeps the symbolic factorization and scaling between solves so that a
// sequence of problems differing only in cost vector or bound values can be
// resolved cheaply. Structure (matrix patterns, which rows are equalities,
// which bounds are finite) must not change through the setters.
class PreparedQp {
 public:
  explicit PreparedQp(QpProblem problem, SolveOptions opts = {});
  ~PreparedQp();
  PreparedQp(PreparedQp&&) noexcept;
  PreparedQp& operator=(PreparedQp&&) noexcept;

  void set_linear_cost(const Eigen::VectorXd& c);
  void set_row_bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& up);
  void set_var_bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& up);
  const QpProblem& problem() const;

  QpSolution solve();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cascade::qp
