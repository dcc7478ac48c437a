#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace cascade::qp {

// Sentinel for an unbounded side of a constraint or variable. Builders
// emit this (never NaN, never IEEE inf) so bound vectors stay orderable.
inline constexpr double kInf = 1e30;

inline bool is_finite_bound(double v) { return v > -kInf && v < kInf; }

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Convex QP in standard form:
//   minimize   1/2 x'Px + c'x
//   subject to row_lower <= A x <= row_upper
//              var_lower <=   x <= var_upper
// Equalities are encoded as row_lower == row_upper. P must be symmetric PSD.
struct QpProblem {
  int num_vars = 0;
  SpMat quadratic_cost;   // P, num_vars x num_vars
  Eigen::VectorXd linear_cost;
  SpMat constraints;      // A, num_rows x num_vars
  Eigen::VectorXd row_lower;
  Eigen::VectorXd row_upper;
  Eigen::VectorXd var_lower;
  Eigen::VectorXd var_upper;

  int num_rows() const { return static_cast<int>(constraints.rows()); }

  double objective_at(const Eigen::VectorXd& x) const;

  // Throws std::invalid_argument naming the violated invariant
  // (dimension mismatch, lower > upper, asymmetric P).
  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterLimit, NumericalError };

const char* to_string(SolveStatus s);

struct QpSolution {
  Eigen::VectorXd primal;          // best iterate, meaningful for Optimal and IterLimit
  Eigen::VectorXd row_duals;       // one multiplier per constraint row, positive when pushing at the upper bound
  double objective = 0.0;
  SolveStatus status = SolveStatus::NumericalError;
  double solve_time = 0.0;         // seconds
  int iterations = 0;
  double primal_residual = 0.0;    // worst constraint violation at primal
  double dual_residual = 0.0;      // stationarity residual at (primal, duals)
};

// Structured key identifying one scalar decision variable of a model:
// a symbol kind plus (plant, scenario, period) coordinates. Coordinates
// that do not apply to a symbol are set to -1.
struct VarKey {
  std::int16_t kind = 0;
  std::int16_t plant = -1;
  std::int32_t scenario = -1;
  std::int32_t period = -1;

  bool operator==(const VarKey&) const = default;
};

struct VarKeyHash {
  std::size_t operator()(const VarKey& k) const {
    std::uint64_t v = (std::uint64_t(std::uint16_t(k.kind)) << 48) ^
                      (std::uint64_t(std::uint16_t(k.plant)) << 32) ^
                      (std::uint64_t(std::uint32_t(k.scenario)) << 16) ^
                      std::uint64_t(std::uint32_t(k.period));
    v ^= v >> 33;
    v *= 0xff51afd7ed558ccdULL;
    v ^= v >> 33;
    return static_cast<std::size_t>(v);
  }
};

// Bijective map from structured keys to dense variable indices [0, size).
class VariableRegistry {
 public:
  // Returns a fresh dense index. Throws std::invalid_argument if the key
  // is already registered.
  int add(const VarKey& key);

  // Throws std::out_of_range if the key was never registered.
  int index_of(const VarKey& key) const;

  bool contains(const VarKey& key) const { return map_.count(key) > 0; }
  const VarKey& key_at(int index) const { return keys_.at(index); }
  int size() const { return static_cast<int>(keys_.size()); }

 private:
  std::unordered_map<VarKey, int, VarKeyHash> map_;
  std::vector<VarKey> keys_;
};

// Incremental assembly of a QpProblem. Rows and variables are appended;
// finish() freezes everything into the sparse standard form.
class ProblemBuilder {
 public:
  int add_var(double lb = -kInf, double ub = kInf);
  void set_var_bounds(int var, double lb, double ub);
  void tighten_var_bounds(int var, double lb, double ub);

  // Quadratic cost contribution q*x_i^2 (adds 2q to P_ii).
  void add_quadratic(int var, double q);
  void add_linear(int var, double c);

  // Starts a row with bounds [lo, up]; returns its index.
  int begin_row(double lo, double up);
  void coeff(int row, int var, double value);

  int num_vars() const { return static_cast<int>(var_lo_.size()); }
  int num_rows() const { return static_cast<int>(row_lo_.size()); }

  QpProblem finish() const;

 private:
  std::vector<double> var_lo_, var_up_, lin_, quad_diag_;
  std::vector<double> row_lo_, row_up_;
  std::vector<Triplet> coeffs_;
};

// Text dump of a problem in a matrix-market-like triplet layout, for
// offline inspection. Sections: header, P triplets, c, A triplets,
// row bounds, variable bounds.
void dump_problem(const QpProblem& p, std::ostream& os);

}  // namespace cascade::qp
