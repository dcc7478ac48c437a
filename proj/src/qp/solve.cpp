#include "cascade/qp/solve.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cascade::qp {
namespace {

bool near_equal_bounds(double lo, double up) {
  return up - lo <= 1e-12 * std::max({1.0, std::abs(lo), std::abs(up)});
}

double inf_norm(const Eigen::VectorXd& v) {
  if (v.size() == 0) return 0.0;
  // Propagate non-finite entries instead of letting maxCoeff skip them, so a
  // poisoned iterate is seen by every residual-based guard.
  if (!v.allFinite()) return std::numeric_limits<double>::quiet_NaN();
  return v.cwiseAbs().maxCoeff();
}

double clamp_interior(double t, double lo, double up, bool has_lo, bool has_up) {
  if (has_lo && has_up) {
    const double margin = std::min(1.0, 0.25 * (up - lo));
    return std::min(std::max(t, lo + margin), up - margin);
  }
  if (has_lo) return std::max(t, lo + 1.0);
  if (has_up) return std::min(t, up - 1.0);
  return t;
}

// Largest alpha in (0, 1] keeping value + alpha*step >= 0.
void limit_step(double value, double step, double& alpha) {
  if (step < 0.0) alpha = std::min(alpha, -value / step);
}

}  // namespace

struct PreparedQp::Impl {
  QpProblem orig;
  SolveOptions opts;

  int n = 0;    // variables
  int ma = 0;   // rows of the user's A
  int m = 0;    // internal rows: kept A rows, then one row per pinned variable

  std::vector<int> row_map;        // user row -> internal row, -1 when dropped (both sides free)
  std::vector<int> pinned_vars;    // variables with equal bounds, each turned into an equality row
  std::vector<std::uint8_t> is_eq, has_lo, has_up;   // per internal row
  std::vector<std::uint8_t> vhas_lo, vhas_up;        // per variable (pinned ones cleared)

  Eigen::VectorXd dcol, erow;      // Ruiz scalings: x = dcol .* x_scaled, rows premultiplied by erow

  SpMat P;        // scaled, full symmetric
  SpMat A;        // scaled, m x n
  Eigen::SparseMatrix<double, Eigen::RowMajor> Arow;   // row-major copy for polish row extraction
  Eigen::VectorXd pdiag;
  Eigen::VectorXd c, rl, ru, vl, vu;   // scaled cost and bounds

  SpMat kkt;                            // lower triangle of [P+wv, A'; A, -dd]
  std::vector<std::ptrdiff_t> diag1_pos, diag2_pos;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt;

  int ncomp = 0;   // number of finite one-sided bounds overall

  void setup();
  void refresh_vectors();
  void update_kkt_values(const Eigen::VectorXd& wv, const Eigen::VectorXd& dd, double reg);
  bool factorize(const Eigen::VectorXd& wv, const Eigen::VectorXd& dd);
  void apply_kkt(const Eigen::VectorXd& wv, const Eigen::VectorXd& dd,
                 const Eigen::VectorXd& z, Eigen::VectorXd& out) const;
  Eigen::VectorXd solve_kkt(const Eigen::VectorXd& rhs, const Eigen::VectorXd& wv,
                            const Eigen::VectorXd& dd) const;
  QpSolution run();
  bool polish(Eigen::VectorXd& x, const Eigen::VectorXd& s, const Eigen::VectorXd& zl,
              const Eigen::VectorXd& zu, const Eigen::VectorXd& wl, const Eigen::VectorXd& wu,
              Eigen::VectorXd& y_int, Eigen::VectorXd& wv_s, double ipm_err);
  void finalize(QpSolution& sol, const Eigen::VectorXd& x, const Eigen::VectorXd& y_int,
                const Eigen::VectorXd& wv_s) const;
};

void PreparedQp::Impl::setup() {
  orig.validate();
  n = orig.num_vars;
  ma = orig.num_rows();

  pinned_vars.clear();
  std::vector<std::uint8_t> pinned(n, 0);
  for (int j = 0; j < n; ++j) {
    if (is_finite_bound(orig.var_lower[j]) && is_finite_bound(orig.var_upper[j]) &&
        near_equal_bounds(orig.var_lower[j], orig.var_upper[j])) {
      pinned[j] = 1;
      pinned_vars.push_back(j);
    }
  }

  row_map.assign(ma, -1);
  is_eq.clear();
  has_lo.clear();
  has_up.clear();
  m = 0;
  for (int i = 0; i < ma; ++i) {
    const bool lo = is_finite_bound(orig.row_lower[i]);
    const bool up = is_finite_bound(orig.row_upper[i]);
    if (!lo && !up) continue;
    row_map[i] = m++;
    const bool eq = lo && up && near_equal_bounds(orig.row_lower[i], orig.row_upper[i]);
    is_eq.push_back(eq);
    has_lo.push_back(lo);
    has_up.push_back(up);
  }
  for (std::size_t t = 0; t < pinned_vars.size(); ++t) {
    is_eq.push_back(1);
    has_lo.push_back(1);
    has_up.push_back(1);
  }
  const int first_pin_row = m;
  m += static_cast<int>(pinned_vars.size());

  vhas_lo.assign(n, 0);
  vhas_up.assign(n, 0);
  for (int j = 0; j < n; ++j) {
    if (pinned[j]) continue;
    vhas_lo[j] = is_finite_bound(orig.var_lower[j]);
    vhas_up[j] = is_finite_bound(orig.var_upper[j]);
  }

  ncomp = 0;
  for (int i = 0; i < m; ++i)
    if (!is_eq[i]) ncomp += int(has_lo[i]) + int(has_up[i]);
  for (int j = 0; j < n; ++j) ncomp += int(vhas_lo[j]) + int(vhas_up[j]);

  // Internal A: kept user rows plus a unit row per pinned variable.
  std::vector<Triplet> atrip;
  atrip.reserve(orig.constraints.nonZeros() + pinned_vars.size());
  for (int k = 0; k < orig.constraints.outerSize(); ++k) {
    for (SpMat::InnerIterator it(orig.constraints, k); it; ++it) {
      const int ir = row_map[static_cast<int>(it.row())];
      if (ir >= 0) atrip.emplace_back(ir, static_cast<int>(it.col()), it.value());
    }
  }
  for (std::size_t t = 0; t < pinned_vars.size(); ++t)
    atrip.emplace_back(first_pin_row + static_cast<int>(t), pinned_vars[t], 1.0);
  A.resize(m, n);
  A.setFromTriplets(atrip.begin(), atrip.end());
  A.makeCompressed();
  P = orig.quadratic_cost;
  P.makeCompressed();

  // Ruiz equilibration of the stacked symmetric matrix [P A'; A 0].
  dcol = Eigen::VectorXd::Ones(n);
  erow = Eigen::VectorXd::Ones(m);
  for (int pass = 0; pass < opts.scaling_iters; ++pass) {
    Eigen::VectorXd cn = Eigen::VectorXd::Zero(n), rn = Eigen::VectorXd::Zero(m);
    for (int k = 0; k < P.outerSize(); ++k)
      for (SpMat::InnerIterator it(P, k); it; ++it) {
        const double a = std::abs(it.value());
        cn[it.col()] = std::max(cn[it.col()], a);
        cn[it.row()] = std::max(cn[it.row()], a);
      }
    for (int k = 0; k < A.outerSize(); ++k)
      for (SpMat::InnerIterator it(A, k); it; ++it) {
        const double a = std::abs(it.value());
        cn[it.col()] = std::max(cn[it.col()], a);
        rn[it.row()] = std::max(rn[it.row()], a);
      }
    Eigen::VectorXd dj(n), ei(m);
    for (int j = 0; j < n; ++j) dj[j] = cn[j] > 1e-12 ? 1.0 / std::sqrt(cn[j]) : 1.0;
    for (int i = 0; i < m; ++i) ei[i] = rn[i] > 1e-12 ? 1.0 / std::sqrt(rn[i]) : 1.0;
    for (int k = 0; k < P.outerSize(); ++k)
      for (SpMat::InnerIterator it(P, k); it; ++it)
        it.valueRef() *= dj[it.row()] * dj[it.col()];
    for (int k = 0; k < A.outerSize(); ++k)
      for (SpMat::InnerIterator it(A, k); it; ++it)
        it.valueRef() *= ei[it.row()] * dj[it.col()];
    dcol = dcol.cwiseProduct(dj);
    erow = erow.cwiseProduct(ei);
  }
  Arow = A;
  pdiag = P.diagonal();
  refresh_vectors();

  // KKT pattern: strict lower of P, both diagonals, A block. The two
  // diagonals are the only slots rewritten between factorizations.
  std::vector<Triplet> ktrip;
  ktrip.reserve(P.nonZeros() + A.nonZeros() + n + m);
  for (int k = 0; k < P.outerSize(); ++k)
    for (SpMat::InnerIterator it(P, k); it; ++it)
      if (it.row() > it.col()) ktrip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int j = 0; j < n; ++j) ktrip.emplace_back(j, j, 1.0);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      ktrip.emplace_back(n + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int i = 0; i < m; ++i) ktrip.emplace_back(n + i, n + i, -1.0);
  kkt.resize(n + m, n + m);
  kkt.setFromTriplets(ktrip.begin(), ktrip.end());
  kkt.makeCompressed();

  diag1_pos.assign(n, -1);
  diag2_pos.assign(m, -1);
  const auto* outer = kkt.outerIndexPtr();
  const auto* inner = kkt.innerIndexPtr();
  for (int col = 0; col < n + m; ++col) {
    for (auto p = outer[col]; p < outer[col + 1]; ++p) {
      if (inner[p] == col) {
        if (col < n)
          diag1_pos[col] = p;
        else
          diag2_pos[col - n] = p;
        break;
      }
    }
  }
  ldlt.analyzePattern(kkt);
}

void PreparedQp::Impl::refresh_vectors() {
  c = dcol.cwiseProduct(orig.linear_cost);
  rl.resize(m);
  ru.resize(m);
  for (int i = 0; i < ma; ++i) {
    const int ir = row_map[i];
    if (ir < 0) continue;
    if (is_eq[ir]) {
      const double mid = 0.5 * (orig.row_lower[i] + orig.row_upper[i]);
      rl[ir] = ru[ir] = erow[ir] * mid;
    } else {
      rl[ir] = has_lo[ir] ? erow[ir] * orig.row_lower[i] : -kInf;
      ru[ir] = has_up[ir] ? erow[ir] * orig.row_upper[i] : kInf;
    }
  }
  const int first_pin_row = m - static_cast<int>(pinned_vars.size());
  for (std::size_t t = 0; t < pinned_vars.size(); ++t) {
    const int j = pinned_vars[t];
    const int ir = first_pin_row + static_cast<int>(t);
    const double mid = 0.5 * (orig.var_lower[j] + orig.var_upper[j]);
    rl[ir] = ru[ir] = erow[ir] * mid;
  }
  vl.resize(n);
  vu.resize(n);
  for (int j = 0; j < n; ++j) {
    vl[j] = vhas_lo[j] ? orig.var_lower[j] / dcol[j] : -kInf;
    vu[j] = vhas_up[j] ? orig.var_upper[j] / dcol[j] : kInf;
  }
}

void PreparedQp::Impl::update_kkt_values(const Eigen::VectorXd& wv, const Eigen::VectorXd& dd,
                                         double reg) {
  auto* vals = kkt.valuePtr();
  for (int j = 0; j < n; ++j) vals[diag1_pos[j]] = pdiag[j] + wv[j] + reg;
  for (int i = 0; i < m; ++i) vals[diag2_pos[i]] = -dd[i] - reg;
}

bool PreparedQp::Impl::factorize(const Eigen::VectorXd& wv, const Eigen::VectorXd& dd) {
  double reg = opts.static_reg;
  for (int attempt = 0; attempt < 4; ++attempt) {
    update_kkt_values(wv, dd, reg);
    ldlt.factorize(kkt);
    if (ldlt.info() == Eigen::Success) return true;
    reg *= 100.0;
  }
  return false;
}

void PreparedQp::Impl::apply_kkt(const Eigen::VectorXd& wv, const Eigen::VectorXd& dd,
                                 const Eigen::VectorXd& z, Eigen::VectorXd& out) const {
  const auto z1 = z.head(n);
  const auto z2 = z.tail(m);
  out.resize(n + m);
  out.head(n) = P * z1 + wv.cwiseProduct(z1) + A.transpose() * z2;
  out.tail(m) = A * z1 - dd.cwiseProduct(z2);
}

Eigen::VectorXd PreparedQp::Impl::solve_kkt(const Eigen::VectorXd& rhs, const Eigen::VectorXd& wv,
                                            const Eigen::VectorXd& dd) const {
  Eigen::VectorXd z = ldlt.solve(rhs);
  Eigen::VectorXd mz;
  for (int k = 0; k < opts.refine_steps; ++k) {
    apply_kkt(wv, dd, z, mz);
    Eigen::VectorXd r = rhs - mz;
    if (inf_norm(r) <= 1e-14 * (1.0 + inf_norm(rhs))) break;
    z += ldlt.solve(r);
  }
  return z;
}

void PreparedQp::Impl::finalize(QpSolution& sol, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& y_int, const Eigen::VectorXd& wv_s) const {
  sol.primal = dcol.cwiseProduct(x);
  sol.row_duals = Eigen::VectorXd::Zero(ma);
  for (int i = 0; i < ma; ++i)
    if (row_map[i] >= 0) sol.row_duals[i] = erow[row_map[i]] * y_int[row_map[i]];
  sol.objective = orig.objective_at(sol.primal);

  // Residuals of the user's problem at the unscaled point.
  double pres = 0.0;
  Eigen::VectorXd ax = orig.constraints * sol.primal;
  for (int i = 0; i < ma; ++i) {
    if (is_finite_bound(orig.row_lower[i])) pres = std::max(pres, orig.row_lower[i] - ax[i]);
    if (is_finite_bound(orig.row_upper[i])) pres = std::max(pres, ax[i] - orig.row_upper[i]);
  }
  for (int j = 0; j < n; ++j) {
    if (is_finite_bound(orig.var_lower[j])) pres = std::max(pres, orig.var_lower[j] - sol.primal[j]);
    if (is_finite_bound(orig.var_upper[j])) pres = std::max(pres, sol.primal[j] - orig.var_upper[j]);
  }
  sol.primal_residual = pres;

  Eigen::VectorXd wv_orig = wv_s.cwiseQuotient(dcol);
  const int first_pin_row = m - static_cast<int>(pinned_vars.size());
  for (std::size_t t = 0; t < pinned_vars.size(); ++t) {
    const int ir = first_pin_row + static_cast<int>(t);
    wv_orig[pinned_vars[t]] += erow[ir] * y_int[ir];
  }
  Eigen::VectorXd y_users = Eigen::VectorXd::Zero(ma);
  for (int i = 0; i < ma; ++i)
    if (row_map[i] >= 0) y_users[i] = sol.row_duals[i];
  Eigen::VectorXd stat = orig.quadratic_cost * sol.primal + orig.linear_cost +
                         orig.constraints.transpose() * y_users + wv_orig;
  sol.dual_residual = inf_norm(stat);
}

bool PreparedQp::Impl::polish(Eigen::VectorXd& x, const Eigen::VectorXd& s,
                              const Eigen::VectorXd& zl, const Eigen::VectorXd& zu,
                              const Eigen::VectorXd& wl, const Eigen::VectorXd& wu,
                              Eigen::VectorXd& y_int, Eigen::VectorXd& wv_s, double ipm_err) {
  // Active set guess: in the equilibrated data a bound side is active when
  // its multiplier exceeds its slack; at an interior-point solution exactly
  // one of the two dominates because their product is the barrier size.
  // rhs +1 selects the lower side, -1 the upper, 0 inactive.
  std::vector<int> row_side(m, 0);
  std::vector<int> var_side(n, 0);
  for (int i = 0; i < m; ++i) {
    if (is_eq[i]) {
      row_side[i] = 1;
      continue;
    }
    const double score_lo = has_lo[i] ? zl[i] - (s[i] - rl[i]) : -kInf;
    const double score_up = has_up[i] ? zu[i] - (ru[i] - s[i]) : -kInf;
    if (score_lo > 0.0 || score_up > 0.0) row_side[i] = score_lo >= score_up ? 1 : -1;
  }
  for (int j = 0; j < n; ++j) {
    if (vhas_lo[j] && vhas_up[j] && vl[j] == vu[j]) {
      var_side[j] = 1;
      continue;
    }
    const double score_lo = vhas_lo[j] ? wl[j] - (x[j] - vl[j]) : -kInf;
    const double score_up = vhas_up[j] ? wu[j] - (vu[j] - x[j]) : -kInf;
    if (score_lo > 0.0 || score_up > 0.0) var_side[j] = score_lo >= score_up ? 1 : -1;
  }

  const double reg = opts.static_reg;
  std::vector<Triplet> ptrips;
  for (int k = 0; k < P.outerSize(); ++k)
    for (SpMat::InnerIterator it(P, k); it; ++it)
      if (it.row() > it.col())
        ptrips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int j = 0; j < n; ++j) ptrips.emplace_back(j, j, pdiag[j]);

  // Solve on the guessed active set, then re-add whichever constraints the
  // candidate point violates; a few rounds settle the set.
  Eigen::VectorXd xp, yp;
  std::vector<int> act_row, act_var;
  for (int round = 0; round < 4; ++round) {
    act_row.clear();
    act_var.clear();
    for (int i = 0; i < m; ++i)
      if (row_side[i] != 0) act_row.push_back(i);
    for (int j = 0; j < n; ++j)
      if (var_side[j] != 0) act_var.push_back(j);
    const int mact = static_cast<int>(act_row.size() + act_var.size());

    std::vector<Triplet> base = ptrips;
    std::vector<Triplet> gact_trips;
    for (std::size_t t = 0; t < act_row.size(); ++t) {
      const int r = act_row[t];
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Arow, r); it; ++it) {
        base.emplace_back(n + static_cast<int>(t), static_cast<int>(it.col()), it.value());
        gact_trips.emplace_back(static_cast<int>(t), static_cast<int>(it.col()), it.value());
      }
    }
    for (std::size_t t = 0; t < act_var.size(); ++t) {
      const int r = static_cast<int>(act_row.size() + t);
      base.emplace_back(n + r, act_var[t], 1.0);
      gact_trips.emplace_back(r, act_var[t], 1.0);
    }
    SpMat Gact(mact, n);
    Gact.setFromTriplets(gact_trips.begin(), gact_trips.end());

    // The refinement below targets the unshifted system, so the shift can
    // grow until the factorization holds without costing accuracy.
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower> fac;
    bool factored = false;
    for (double shift : {reg, 1e-7, 1e-5, 1e-3}) {
      std::vector<Triplet> trips = base;
      for (int j = 0; j < n; ++j) trips.emplace_back(j, j, shift);
      for (int r = 0; r < mact; ++r) trips.emplace_back(n + r, n + r, -shift);
      SpMat K(n + mact, n + mact);
      K.setFromTriplets(trips.begin(), trips.end());
      fac.compute(K);
      if (fac.info() == Eigen::Success) {
        factored = true;
        break;
      }
    }
    if (!factored) return false;

    Eigen::VectorXd rhs(n + mact);
    rhs.head(n) = -c;
    for (std::size_t t = 0; t < act_row.size(); ++t) {
      const int i = act_row[t];
      rhs[n + static_cast<int>(t)] = row_side[i] > 0 ? rl[i] : ru[i];
    }
    for (std::size_t t = 0; t < act_var.size(); ++t) {
      const int j = act_var[t];
      rhs[n + static_cast<int>(act_row.size() + t)] = var_side[j] > 0 ? vl[j] : vu[j];
    }

    Eigen::VectorXd z = fac.solve(rhs);
    for (int k = 0; k < 8; ++k) {
      Eigen::VectorXd r(n + mact);
      r.head(n) = rhs.head(n) - (P * z.head(n) + Gact.transpose() * z.tail(mact));
      r.tail(mact) = rhs.tail(mact) - Gact * z.head(n);
      if (inf_norm(r) <= 1e-15 * (1.0 + inf_norm(rhs))) break;
      z += fac.solve(r);
    }
    xp = z.head(n);
    yp = z.tail(mact);

    bool added = false;
    Eigen::VectorXd axp = A * xp;
    for (int i = 0; i < m; ++i) {
      if (row_side[i] != 0) continue;
      const double tol = 1e-11 * (1.0 + std::abs(axp[i]));
      if (has_lo[i] && axp[i] < rl[i] - tol) {
        row_side[i] = 1;
        added = true;
      } else if (has_up[i] && axp[i] > ru[i] + tol) {
        row_side[i] = -1;
        added = true;
      }
    }
    for (int j = 0; j < n; ++j) {
      if (var_side[j] != 0) continue;
      const double tol = 1e-11 * (1.0 + std::abs(xp[j]));
      if (vhas_lo[j] && xp[j] < vl[j] - tol) {
        var_side[j] = 1;
        added = true;
      } else if (vhas_up[j] && xp[j] > vu[j] + tol) {
        var_side[j] = -1;
        added = true;
      }
    }
    if (!added) break;
  }

  double pres = 0.0;
  Eigen::VectorXd axp = A * xp;
  for (int i = 0; i < m; ++i) {
    if (has_lo[i]) pres = std::max(pres, rl[i] - axp[i]);
    if (has_up[i]) pres = std::max(pres, axp[i] - ru[i]);
  }
  for (int j = 0; j < n; ++j) {
    if (vhas_lo[j]) pres = std::max(pres, vl[j] - xp[j]);
    if (vhas_up[j]) pres = std::max(pres, xp[j] - vu[j]);
  }
  std::vector<Triplet> gact_trips;
  for (std::size_t t = 0; t < act_row.size(); ++t) {
    const int r = act_row[t];
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Arow, r); it; ++it)
      gact_trips.emplace_back(static_cast<int>(t), static_cast<int>(it.col()), it.value());
  }
  for (std::size_t t = 0; t < act_var.size(); ++t)
    gact_trips.emplace_back(static_cast<int>(act_row.size() + t), act_var[t], 1.0);
  SpMat Gact(static_cast<int>(act_row.size() + act_var.size()), n);
  Gact.setFromTriplets(gact_trips.begin(), gact_trips.end());
  const double dres = inf_norm(Eigen::VectorXd(P * xp + c + Gact.transpose() * yp));
  if (std::max(pres, dres) > ipm_err) return false;

  x = xp;
  y_int = Eigen::VectorXd::Zero(m);
  for (std::size_t t = 0; t < act_row.size(); ++t) y_int[act_row[t]] = yp[static_cast<int>(t)];
  wv_s = Eigen::VectorXd::Zero(n);
  for (std::size_t t = 0; t < act_var.size(); ++t)
    wv_s[act_var[t]] = yp[static_cast<int>(act_row.size() + t)];
  return true;
}

QpSolution PreparedQp::Impl::run() {
  const auto t0 = std::chrono::steady_clock::now();
  QpSolution sol;
  auto stamp_time = [&] {
    sol.solve_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  if (n == 0) {
    sol.primal.resize(0);
    sol.row_duals = Eigen::VectorXd::Zero(ma);
    sol.status = SolveStatus::Optimal;
    stamp_time();
    return sol;
  }

  Eigen::VectorXd wv0 = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd dd0 = Eigen::VectorXd::Ones(m);

  // No inequality structure at all: one refined Newton solve settles it.
  if (ncomp == 0) {
    Eigen::VectorXd wvz = Eigen::VectorXd::Zero(n), ddz = Eigen::VectorXd::Zero(m);
    if (!factorize(wvz, ddz)) {
      sol.status = SolveStatus::NumericalError;
      stamp_time();
      return sol;
    }
    Eigen::VectorXd rhs(n + m);
    rhs.head(n) = -c;
    for (int i = 0; i < m; ++i) rhs[n + i] = rl[i];
    Eigen::VectorXd z = solve_kkt(rhs, wvz, ddz);
    Eigen::VectorXd x = z.head(n), y = z.tail(m);
    const double pres = m == 0 ? 0.0 : inf_norm(Eigen::VectorXd(A * x - rl));
    const double dres = inf_norm(Eigen::VectorXd(P * x + c + A.transpose() * y)) /
                        std::max(1.0, inf_norm(c));
    sol.iterations = 1;
    sol.status = pres > 1e-6 * std::max(1.0, inf_norm(rl))
                     ? SolveStatus::Infeasible
                     : (dres > 1e-6 ? SolveStatus::Unbounded : SolveStatus::Optimal);
    finalize(sol, x, y, Eigen::VectorXd::Zero(n));
    stamp_time();
    return sol;
  }

  // Starting point: regularized least-squares solve toward bound midpoints,
  // then shift into the strict interior.
  Eigen::VectorXd x(n), s(m), zl, zu, wl, wu, yeq;
  {
    if (!factorize(wv0, dd0)) {
      sol.status = SolveStatus::NumericalError;
      stamp_time();
      return sol;
    }
    Eigen::VectorXd rhs(n + m);
    rhs.head(n) = -c;
    for (int i = 0; i < m; ++i) {
      if (is_eq[i])
        rhs[n + i] = rl[i];
      else if (has_lo[i] && has_up[i])
        rhs[n + i] = 0.5 * (rl[i] + ru[i]);
      else
        rhs[n + i] = has_lo[i] ? rl[i] : ru[i];
    }
    Eigen::VectorXd z = ldlt.solve(rhs);
    x = z.head(n);
    yeq = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i)
      if (is_eq[i]) yeq[i] = z[n + i];
    for (int j = 0; j < n; ++j) x[j] = clamp_interior(x[j], vl[j], vu[j], vhas_lo[j], vhas_up[j]);
    Eigen::VectorXd ax = A * x;
    for (int i = 0; i < m; ++i)
      s[i] = is_eq[i] ? rl[i] : clamp_interior(ax[i], rl[i], ru[i], has_lo[i], has_up[i]);
    // Duals are chosen so every complementarity product starts at the same
    // value; slacks at this point span many orders of magnitude, and uniform
    // duals would hand the first Newton direction a wildly off-center point.
    double mu0 = 0.0;
    for (int i = 0; i < m; ++i) {
      if (is_eq[i]) continue;
      if (has_lo[i]) mu0 += s[i] - rl[i];
      if (has_up[i]) mu0 += ru[i] - s[i];
    }
    for (int j = 0; j < n; ++j) {
      if (vhas_lo[j]) mu0 += x[j] - vl[j];
      if (vhas_up[j]) mu0 += vu[j] - x[j];
    }
    mu0 = std::min(1e6, std::max(1e-2, mu0 / ncomp));
    auto centered_dual = [&](double slack) {
      return std::min(1e8, std::max(1e-8, mu0 / slack));
    };
    zl = Eigen::VectorXd::Zero(m);
    zu = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) {
      if (is_eq[i]) continue;
      if (has_lo[i]) zl[i] = centered_dual(s[i] - rl[i]);
      if (has_up[i]) zu[i] = centered_dual(ru[i] - s[i]);
    }
    wl = Eigen::VectorXd::Zero(n);
    wu = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
      if (vhas_lo[j]) wl[j] = centered_dual(x[j] - vl[j]);
      if (vhas_up[j]) wu[j] = centered_dual(vu[j] - x[j]);
    }
  }

  Eigen::VectorXd y(m), rx(n), ry(m);
  Eigen::VectorXd f(m), g(m), fv(n), gv(n);
  Eigen::VectorXd wv(n), dd(m), wrow(m);
  Eigen::VectorXd rcl(m), rcu(m), rcvl(n), rcvu(n);
  Eigen::VectorXd b(n + m);
  double pres_abs = 0.0, dres_abs = 0.0;
  double best_pres = kInf;
  double best_mu = kInf;
  int stalled = 0;
  sol.status = SolveStatus::IterLimit;

  // Best iterate seen, by worst scaled residual; restored if a later
  // iteration breaks down numerically instead of improving.
  struct Snapshot {
    Eigen::VectorXd x, s, zl, zu, wl, wu, yeq;
    double merit = kInf, pres_abs = 0.0, dres_abs = 0.0;
    double pres_rel = kInf, dres_rel = kInf, gap_rel = kInf;
  } best;

  // A step can land a slack exactly on its bound in floating point; the floor
  // keeps the barrier divisions finite, gluing such a pair to its bound with
  // an enormous but representable weight.
  constexpr double kSlackFloor = 1e-30;
  for (int iter = 0; iter <= opts.max_iters; ++iter) {
    for (int i = 0; i < m; ++i) {
      f[i] = (!is_eq[i] && has_lo[i]) ? std::max(s[i] - rl[i], kSlackFloor) : 1.0;
      g[i] = (!is_eq[i] && has_up[i]) ? std::max(ru[i] - s[i], kSlackFloor) : 1.0;
    }
    for (int j = 0; j < n; ++j) {
      fv[j] = vhas_lo[j] ? std::max(x[j] - vl[j], kSlackFloor) : 1.0;
      gv[j] = vhas_up[j] ? std::max(vu[j] - x[j], kSlackFloor) : 1.0;
    }
    for (int i = 0; i < m; ++i) y[i] = is_eq[i] ? yeq[i] : zu[i] - zl[i];

    Eigen::VectorXd ax = A * x;
    Eigen::VectorXd px = P * x;
    Eigen::VectorXd aty = A.transpose() * y;
    rx = px + c + aty + (wu - wl);
    ry = ax - s;

    double mu = 0.0;
    for (int i = 0; i < m; ++i) {
      if (is_eq[i]) continue;
      if (has_lo[i]) mu += zl[i] * f[i];
      if (has_up[i]) mu += zu[i] * g[i];
    }
    for (int j = 0; j < n; ++j) {
      if (vhas_lo[j]) mu += wl[j] * fv[j];
      if (vhas_up[j]) mu += wu[j] * gv[j];
    }
    mu /= ncomp;
    best_mu = std::min(best_mu, mu);

    pres_abs = inf_norm(ry);
    dres_abs = inf_norm(rx);
    const double pscale = std::max({1.0, inf_norm(ax), inf_norm(s)});
    const double dscale = std::max({1.0, inf_norm(px), inf_norm(aty), inf_norm(c)});
    const double obj = 0.5 * x.dot(px) + c.dot(x);
    const double pres_rel = pres_abs / pscale;
    const double dres_rel = dres_abs / dscale;
    const double gap_rel = mu / std::max(1.0, std::abs(obj));

    const double merit = std::max({pres_rel, dres_rel, gap_rel});
    if (!std::isfinite(merit)) {
      // Numerical breakdown (typically complementarity underflow after the
      // iterate has already converged); fall back to the best iterate.
      sol.iterations = iter;
      sol.status = SolveStatus::NumericalError;
      break;
    }
    if (merit < best.merit) {
      best = Snapshot{x, s, zl, zu, wl, wu, yeq, merit,   pres_abs,
                      dres_abs, pres_rel, dres_rel, gap_rel};
    }

    if (pres_rel <= opts.eps_primal && dres_rel <= opts.eps_dual && gap_rel <= opts.eps_gap) {
      sol.status = SolveStatus::Optimal;
      sol.iterations = iter;
      break;
    }

    if (pres_abs < 0.9 * best_pres) {
      best_pres = pres_abs;
      stalled = 0;
    } else {
      ++stalled;
    }
    // Infeasibility needs stagnation evidence, not a one-iteration signal:
    // tiny complementarity or large multipliers also occur transiently on
    // feasible problems with extreme cost scales.
    const double dual_mag = std::max({inf_norm(zl), inf_norm(zu), inf_norm(wl), inf_norm(wu),
                                      inf_norm(yeq)});
    const bool pres_stuck = pres_rel > std::max(1e-6, 1e3 * opts.eps_primal);
    if (dual_mag > 1e10 && pres_stuck && stalled > 5 && iter > 10) {
      sol.status = SolveStatus::Infeasible;
      sol.iterations = iter;
      break;
    }
    if (stalled > 25 && iter > 40 && pres_stuck) {
      sol.status = SolveStatus::Infeasible;
      sol.iterations = iter;
      break;
    }
    if (inf_norm(x) > 1e9 && obj < -1e9 && pres_rel < 1e-6) {
      sol.status = SolveStatus::Unbounded;
      sol.iterations = iter;
      break;
    }
    if (iter == opts.max_iters) {
      sol.iterations = iter;
      break;
    }

    for (int j = 0; j < n; ++j) {
      wv[j] = 0.0;
      if (vhas_lo[j]) wv[j] += wl[j] / fv[j];
      if (vhas_up[j]) wv[j] += wu[j] / gv[j];
    }
    for (int i = 0; i < m; ++i) {
      if (is_eq[i]) {
        wrow[i] = 0.0;
        dd[i] = 0.0;
      } else {
        wrow[i] = 0.0;
        if (has_lo[i]) wrow[i] += zl[i] / f[i];
        if (has_up[i]) wrow[i] += zu[i] / g[i];
        // Both duals of a row can underflow to zero at once; keep the
        // inverted weight finite so the direction stays representable.
        dd[i] = 1.0 / std::max(wrow[i], kSlackFloor);
      }
    }
    if (!factorize(wv, dd)) {
      sol.status = SolveStatus::NumericalError;
      sol.iterations = iter;
      break;
    }

    auto build_rhs = [&](const Eigen::VectorXd& pcl, const Eigen::VectorXd& pcu,
                         const Eigen::VectorXd& pcvl, const Eigen::VectorXd& pcvu) {
      for (int j = 0; j < n; ++j) {
        double rwv = 0.0;
        if (vhas_lo[j]) rwv += pcvl[j] / fv[j];
        if (vhas_up[j]) rwv -= pcvu[j] / gv[j];
        b[j] = -rx[j] - rwv;
      }
      for (int i = 0; i < m; ++i) {
        if (is_eq[i]) {
          b[n + i] = -ry[i];
        } else {
          double rw = 0.0;
          if (has_lo[i]) rw += pcl[i] / f[i];
          if (has_up[i]) rw -= pcu[i] / g[i];
          b[n + i] = -ry[i] - dd[i] * rw;
        }
      }
    };
    auto recover = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& pcl,
                       const Eigen::VectorXd& pcu, const Eigen::VectorXd& pcvl,
                       const Eigen::VectorXd& pcvu, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                       Eigen::VectorXd& ds, Eigen::VectorXd& dzl, Eigen::VectorXd& dzu,
                       Eigen::VectorXd& dwl, Eigen::VectorXd& dwu) {
      dx = z.head(n);
      dy = z.tail(m);
      ds.setZero(m);
      dzl.setZero(m);
      dzu.setZero(m);
      dwl.setZero(n);
      dwu.setZero(n);
      for (int i = 0; i < m; ++i) {
        if (is_eq[i]) continue;
        double rw = 0.0;
        if (has_lo[i]) rw += pcl[i] / f[i];
        if (has_up[i]) rw -= pcu[i] / g[i];
        ds[i] = dd[i] * (dy[i] - rw);
        if (has_lo[i]) dzl[i] = (-pcl[i] - zl[i] * ds[i]) / f[i];
        if (has_up[i]) dzu[i] = (-pcu[i] + zu[i] * ds[i]) / g[i];
      }
      for (int j = 0; j < n; ++j) {
        if (vhas_lo[j]) dwl[j] = (-pcvl[j] - wl[j] * dx[j]) / fv[j];
        if (vhas_up[j]) dwu[j] = (-pcvu[j] + wu[j] * dx[j]) / gv[j];
      }
    };
    auto step_limits = [&](const Eigen::VectorXd& dx, const Eigen::VectorXd& ds,
                           const Eigen::VectorXd& dzl, const Eigen::VectorXd& dzu,
                           const Eigen::VectorXd& dwl, const Eigen::VectorXd& dwu, double& ap,
                           double& ad) {
      ap = 1.0;
      ad = 1.0;
      for (int i = 0; i < m; ++i) {
        if (is_eq[i]) continue;
        if (has_lo[i]) {
          limit_step(f[i], ds[i], ap);
          limit_step(zl[i], dzl[i], ad);
        }
        if (has_up[i]) {
          limit_step(g[i], -ds[i], ap);
          limit_step(zu[i], dzu[i], ad);
        }
      }
      for (int j = 0; j < n; ++j) {
        if (vhas_lo[j]) {
          limit_step(fv[j], dx[j], ap);
          limit_step(wl[j], dwl[j], ad);
        }
        if (vhas_up[j]) {
          limit_step(gv[j], -dx[j], ap);
          limit_step(wu[j], dwu[j], ad);
        }
      }
    };

    // Affine scaling step.
    for (int i = 0; i < m; ++i) {
      rcl[i] = (!is_eq[i] && has_lo[i]) ? zl[i] * f[i] : 0.0;
      rcu[i] = (!is_eq[i] && has_up[i]) ? zu[i] * g[i] : 0.0;
    }
    for (int j = 0; j < n; ++j) {
      rcvl[j] = vhas_lo[j] ? wl[j] * fv[j] : 0.0;
      rcvu[j] = vhas_up[j] ? wu[j] * gv[j] : 0.0;
    }
    build_rhs(rcl, rcu, rcvl, rcvu);
    Eigen::VectorXd z = solve_kkt(b, wv, dd);
    Eigen::VectorXd dx, dy, ds, dzl, dzu, dwl, dwu;
    recover(z, rcl, rcu, rcvl, rcvu, dx, dy, ds, dzl, dzu, dwl, dwu);

    // Certificate check: a direction of strict cost descent with no
    // curvature that stays feasible for every row and bound proves the
    // problem unbounded below.
    {
      const double dn = inf_norm(dx);
      if (dn > 0.0) {
        const double tol = 1e-9 * dn;
        bool ray = c.dot(dx) < -1e-9 * std::max(1.0, inf_norm(c)) * dn &&
                   inf_norm(Eigen::VectorXd(P * dx)) <= tol;
        if (ray) {
          Eigen::VectorXd adx = A * dx;
          for (int i = 0; i < m && ray; ++i) {
            if (is_eq[i] || (has_lo[i] && has_up[i]))
              ray = std::abs(adx[i]) <= tol;
            else if (has_lo[i])
              ray = adx[i] >= -tol;
            else if (has_up[i])
              ray = adx[i] <= tol;
          }
          for (int j = 0; j < n && ray; ++j) {
            if (vhas_lo[j] && dx[j] < -tol) ray = false;
            if (vhas_up[j] && dx[j] > tol) ray = false;
          }
        }
        if (ray) {
          sol.status = SolveStatus::Unbounded;
          sol.iterations = iter;
          break;
        }
      }
    }

    double ap, ad;
    step_limits(dx, ds, dzl, dzu, dwl, dwu, ap, ad);

    double mu_aff = 0.0;
    for (int i = 0; i < m; ++i) {
      if (is_eq[i]) continue;
      if (has_lo[i]) mu_aff += (f[i] + ap * ds[i]) * (zl[i] + ad * dzl[i]);
      if (has_up[i]) mu_aff += (g[i] - ap * ds[i]) * (zu[i] + ad * dzu[i]);
    }
    for (int j = 0; j < n; ++j) {
      if (vhas_lo[j]) mu_aff += (fv[j] + ap * dx[j]) * (wl[j] + ad * dwl[j]);
      if (vhas_up[j]) mu_aff += (gv[j] - ap * dx[j]) * (wu[j] + ad * dwu[j]);
    }
    mu_aff = std::max(mu_aff / ncomp, 0.0);
    double sigma = std::pow(mu_aff / std::max(mu, 1e-300), 3.0);
    sigma = std::min(std::max(sigma, 1e-8), 1.0 - 1e-8);

    // Corrector with centering. The second-order terms use the reachable
    // affine step, not the raw direction: near a degenerate corner the raw
    // products dwarf the barrier and would poison the corrected direction.
    const double cp = ap, cd = ad;
    for (int i = 0; i < m; ++i) {
      if (is_eq[i]) continue;
      if (has_lo[i]) rcl[i] += -sigma * mu + cp * ds[i] * cd * dzl[i];
      if (has_up[i]) rcu[i] += -sigma * mu - cp * ds[i] * cd * dzu[i];
    }
    for (int j = 0; j < n; ++j) {
      if (vhas_lo[j]) rcvl[j] += -sigma * mu + cp * dx[j] * cd * dwl[j];
      if (vhas_up[j]) rcvu[j] += -sigma * mu - cp * dx[j] * cd * dwu[j];
    }
    build_rhs(rcl, rcu, rcvl, rcvu);
    z = solve_kkt(b, wv, dd);
    recover(z, rcl, rcu, rcvl, rcvu, dx, dy, ds, dzl, dzu, dwl, dwu);
    step_limits(dx, ds, dzl, dzu, dwl, dwu, ap, ad);
    ap = std::min(1.0, 0.995 * ap);
    ad = std::min(1.0, 0.995 * ad);

    // Unequal primal/dual step lengths can inflate complementarity products
    // whose primal factor is blocked while the dual factor runs; an equal
    // step cannot, to first order. Fall back to the equal step when the
    // split one would raise the barrier, and cap growth against the best
    // level already reached so bad directions cannot compound.
    auto trial_mu = [&](double a_p, double a_d) {
      double acc = 0.0;
      for (int i = 0; i < m; ++i) {
        if (is_eq[i]) continue;
        if (has_lo[i]) acc += (zl[i] + a_d * dzl[i]) * (s[i] + a_p * ds[i] - rl[i]);
        if (has_up[i]) acc += (zu[i] + a_d * dzu[i]) * (ru[i] - s[i] - a_p * ds[i]);
      }
      for (int j = 0; j < n; ++j) {
        if (vhas_lo[j]) acc += (wl[j] + a_d * dwl[j]) * (x[j] + a_p * dx[j] - vl[j]);
        if (vhas_up[j]) acc += (wu[j] + a_d * dwu[j]) * (vu[j] - x[j] - a_p * dx[j]);
      }
      return acc / ncomp;
    };
    if (trial_mu(ap, ad) > 1.05 * mu) ap = ad = std::min(ap, ad);
    const double mu_cap = std::max(10.0 * best_mu, 1e-10);
    for (int back = 0; back < 30 && trial_mu(ap, ad) > mu_cap; ++back) {
      ap *= 0.5;
      ad *= 0.5;
    }

    if (ap < 1e-12 && ad < 1e-12) {
      sol.status = pres_rel > 1e-6 ? SolveStatus::Infeasible : SolveStatus::NumericalError;
      sol.iterations = iter;
      break;
    }

    x += ap * dx;
    for (int i = 0; i < m; ++i)
      if (!is_eq[i]) s[i] += ap * ds[i];
    zl += ad * dzl;
    zu += ad * dzu;
    wl += ad * dwl;
    wu += ad * dwu;
    for (int i = 0; i < m; ++i)
      if (is_eq[i]) yeq[i] += ad * dy[i];
  }

  if ((sol.status == SolveStatus::NumericalError || sol.status == SolveStatus::IterLimit) &&
      best.merit < kInf) {
    x = best.x;
    s = best.s;
    zl = best.zl;
    zu = best.zu;
    wl = best.wl;
    wu = best.wu;
    yeq = best.yeq;
    pres_abs = best.pres_abs;
    dres_abs = best.dres_abs;
    if (best.pres_rel <= opts.eps_primal && best.dres_rel <= opts.eps_dual &&
        best.gap_rel <= opts.eps_gap)
      sol.status = SolveStatus::Optimal;
  }

  Eigen::VectorXd y_int(m), wv_s(n);
  for (int i = 0; i < m; ++i) y_int[i] = is_eq[i] ? yeq[i] : zu[i] - zl[i];
  wv_s = wu - wl;
  if (sol.status == SolveStatus::Optimal && opts.polish) {
    polish(x, s, zl, zu, wl, wu, y_int, wv_s, std::max({pres_abs, dres_abs, 1e-9}));
  }
  finalize(sol, x, y_int, wv_s);
  stamp_time();
  return sol;
}

PreparedQp::PreparedQp(QpProblem problem, SolveOptions opts) : impl_(new Impl) {
  impl_->orig = std::move(problem);
  impl_->opts = opts;
  impl_->setup();
}

PreparedQp::~PreparedQp() = default;
PreparedQp::PreparedQp(PreparedQp&&) noexcept = default;
PreparedQp& PreparedQp::operator=(PreparedQp&&) noexcept = default;

const QpProblem& PreparedQp::problem() const { return impl_->orig; }

void PreparedQp::set_linear_cost(const Eigen::VectorXd& c) {
  if (c.size() != impl_->n) throw std::invalid_argument("PreparedQp: linear_cost size mismatch");
  impl_->orig.linear_cost = c;
  impl_->refresh_vectors();
}

void PreparedQp::set_row_bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& up) {
  Impl& im = *impl_;
  if (lo.size() != im.ma || up.size() != im.ma)
    throw std::invalid_argument("PreparedQp: row bound size mismatch");
  for (int i = 0; i < im.ma; ++i) {
    const bool flo = is_finite_bound(lo[i]);
    const bool fup = is_finite_bound(up[i]);
    const int ir = im.row_map[i];
    if (ir < 0) {
      if (flo || fup)
        throw std::invalid_argument("PreparedQp: row " + std::to_string(i) +
                                    " changed from free to bounded");
      continue;
    }
    if (flo != bool(im.has_lo[ir]) || fup != bool(im.has_up[ir]))
      throw std::invalid_argument("PreparedQp: finite-bound pattern changed at row " +
                                  std::to_string(i));
    const bool eq = flo && fup && near_equal_bounds(lo[i], up[i]);
    if (eq != bool(im.is_eq[ir]))
      throw std::invalid_argument("PreparedQp: equality structure changed at row " +
                                  std::to_string(i));
    if (flo && lo[i] > up[i])
      throw std::invalid_argument("PreparedQp: row_lower > row_upper at row " + std::to_string(i));
  }
  im.orig.row_lower = lo;
  im.orig.row_upper = up;
  im.refresh_vectors();
}

void PreparedQp::set_var_bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& up) {
  Impl& im = *impl_;
  if (lo.size() != im.n || up.size() != im.n)
    throw std::invalid_argument("PreparedQp: var bound size mismatch");
  std::vector<std::uint8_t> pinned(im.n, 0);
  for (int j : im.pinned_vars) pinned[j] = 1;
  for (int j = 0; j < im.n; ++j) {
    const bool flo = is_finite_bound(lo[j]);
    const bool fup = is_finite_bound(up[j]);
    const bool pin = flo && fup && near_equal_bounds(lo[j], up[j]);
    if (pin != bool(pinned[j]))
      throw std::invalid_argument("PreparedQp: pinned structure changed at var " +
                                  std::to_string(j));
    if (!pin && (flo != bool(im.vhas_lo[j]) || fup != bool(im.vhas_up[j])))
      throw std::invalid_argument("PreparedQp: finite-bound pattern changed at var " +
                                  std::to_string(j));
    if (flo && fup && lo[j] > up[j])
      throw std::invalid_argument("PreparedQp: var_lower > var_upper at var " + std::to_string(j));
  }
  im.orig.var_lower = lo;
  im.orig.var_upper = up;
  im.refresh_vectors();
}

QpSolution PreparedQp::solve() { return impl_->run(); }

QpSolution solve(const QpProblem& problem, const SolveOptions& opts) {
  PreparedQp prepared(problem, opts);
  return prepared.solve();
}

}  // namespace cascade::qp
