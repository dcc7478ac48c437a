#include "cascade/qp/types.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace cascade::qp {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::IterLimit: return "IterLimit";
    case SolveStatus::NumericalError: return "NumericalError";
  }
  return "Unknown";
}

double QpProblem::objective_at(const Eigen::VectorXd& x) const {
  double quad = 0.0;
  if (quadratic_cost.nonZeros() > 0) {
    quad = 0.5 * x.dot(quadratic_cost * x);
  }
  return quad + linear_cost.dot(x);
}

void QpProblem::validate() const {
  if (num_vars < 0) throw std::invalid_argument("QpProblem: negative num_vars");
  if (linear_cost.size() != num_vars)
    throw std::invalid_argument("QpProblem: linear_cost dimension != num_vars");
  if (quadratic_cost.rows() != num_vars || quadratic_cost.cols() != num_vars)
    throw std::invalid_argument("QpProblem: quadratic_cost must be num_vars x num_vars");
  if (constraints.cols() != num_vars)
    throw std::invalid_argument("QpProblem: constraints column count != num_vars");
  const auto m = constraints.rows();
  if (row_lower.size() != m || row_upper.size() != m)
    throw std::invalid_argument("QpProblem: row bound dimension != row count");
  if (var_lower.size() != num_vars || var_upper.size() != num_vars)
    throw std::invalid_argument("QpProblem: var bound dimension != num_vars");
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::isnan(row_lower[i]) || std::isnan(row_upper[i]))
      throw std::invalid_argument("QpProblem: NaN in row bounds");
    if (row_lower[i] > row_upper[i])
      throw std::invalid_argument("QpProblem: row_lower > row_upper at row " + std::to_string(i));
  }
  for (int i = 0; i < num_vars; ++i) {
    if (std::isnan(var_lower[i]) || std::isnan(var_upper[i]))
      throw std::invalid_argument("QpProblem: NaN in var bounds");
    if (var_lower[i] > var_upper[i])
      throw std::invalid_argument("QpProblem: var_lower > var_upper at var " + std::to_string(i));
  }
  // P symmetry check on the sparse pattern
  SpMat diff = SpMat(quadratic_cost.transpose()) - quadratic_cost;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SpMat::InnerIterator it(diff, k); it; ++it) {
      if (std::abs(it.value()) > 1e-12)
        throw std::invalid_argument("QpProblem: quadratic_cost is not symmetric");
    }
  }
}

int VariableRegistry::add(const VarKey& key) {
  auto [it, inserted] = map_.emplace(key, static_cast<int>(keys_.size()));
  if (!inserted)
    throw std::invalid_argument("VariableRegistry: duplicate key (kind=" +
                                std::to_string(key.kind) + ", plant=" + std::to_string(key.plant) +
                                ", scenario=" + std::to_string(key.scenario) +
                                ", period=" + std::to_string(key.period) + ")");
  keys_.push_back(key);
  return it->second;
}

int VariableRegistry::index_of(const VarKey& key) const {
  auto it = map_.find(key);
  if (it == map_.end())
    throw std::out_of_range("VariableRegistry: unregistered key (kind=" +
                            std::to_string(key.kind) + ", plant=" + std::to_string(key.plant) +
                            ", scenario=" + std::to_string(key.scenario) +
                            ", period=" + std::to_string(key.period) + ")");
  return it->second;
}

int ProblemBuilder::add_var(double lb, double ub) {
  var_lo_.push_back(lb);
  var_up_.push_back(ub);
  lin_.push_back(0.0);
  quad_diag_.push_back(0.0);
  return static_cast<int>(var_lo_.size()) - 1;
}

void ProblemBuilder::set_var_bounds(int var, double lb, double ub) {
  var_lo_.at(var) = lb;
  var_up_.at(var) = ub;
}

void ProblemBuilder::tighten_var_bounds(int var, double lb, double ub) {
  var_lo_.at(var) = std::max(var_lo_.at(var), lb);
  var_up_.at(var) = std::min(var_up_.at(var), ub);
}

void ProblemBuilder::add_quadratic(int var, double q) { quad_diag_.at(var) += 2.0 * q; }

void ProblemBuilder::add_linear(int var, double c) { lin_.at(var) += c; }

int ProblemBuilder::begin_row(double lo, double up) {
  row_lo_.push_back(lo);
  row_up_.push_back(up);
  return static_cast<int>(row_lo_.size()) - 1;
}

void ProblemBuilder::coeff(int row, int var, double value) {
  if (value == 0.0) return;
  coeffs_.emplace_back(row, var, value);
}

QpProblem ProblemBuilder::finish() const {
  QpProblem p;
  const int n = num_vars();
  const int m = num_rows();
  p.num_vars = n;
  p.linear_cost = Eigen::Map<const Eigen::VectorXd>(lin_.data(), n);
  p.var_lower = Eigen::Map<const Eigen::VectorXd>(var_lo_.data(), n);
  p.var_upper = Eigen::Map<const Eigen::VectorXd>(var_up_.data(), n);
  p.row_lower = Eigen::Map<const Eigen::VectorXd>(row_lo_.data(), m);
  p.row_upper = Eigen::Map<const Eigen::VectorXd>(row_up_.data(), m);

  std::vector<Triplet> ptrip;
  for (int i = 0; i < n; ++i) {
    if (quad_diag_[i] != 0.0) ptrip.emplace_back(i, i, quad_diag_[i]);
  }
  p.quadratic_cost.resize(n, n);
  p.quadratic_cost.setFromTriplets(ptrip.begin(), ptrip.end());

  p.constraints.resize(m, n);
  p.constraints.setFromTriplets(coeffs_.begin(), coeffs_.end());
  p.constraints.makeCompressed();
  return p;
}

void dump_problem(const QpProblem& p, std::ostream& os) {
  os << "qp " << p.num_vars << " " << p.num_rows() << "\n";
  os << "P " << p.quadratic_cost.nonZeros() << "\n";
  for (int k = 0; k < p.quadratic_cost.outerSize(); ++k)
    for (SpMat::InnerIterator it(p.quadratic_cost, k); it; ++it)
      os << it.row() << " " << it.col() << " " << it.value() << "\n";
  os << "c\n";
  for (int i = 0; i < p.num_vars; ++i) os << p.linear_cost[i] << "\n";
  os << "A " << p.constraints.nonZeros() << "\n";
  for (int k = 0; k < p.constraints.outerSize(); ++k)
    for (SpMat::InnerIterator it(p.constraints, k); it; ++it)
      os << it.row() << " " << it.col() << " " << it.value() << "\n";
  os << "rows\n";
  for (int i = 0; i < p.num_rows(); ++i) os << p.row_lower[i] << " " << p.row_upper[i] << "\n";
  os << "vars\n";
  for (int i = 0; i < p.num_vars; ++i) os << p.var_lower[i] << " " << p.var_upper[i] << "\n";
}

}  // namespace cascade::qp
