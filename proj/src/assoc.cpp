// SPDX-License-Identifier: Apache-2.0
#include "movesort/assoc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace movesort {

std::string_view to_string(CostMode mode) { return mode == CostMode::kIou ? "iou" : "hybrid"; }

CostMode parse_cost_mode(std::string_view name) {
  if (name == "iou") return CostMode::kIou;
  if (name == "hybrid") return CostMode::kHybrid;
  throw std::invalid_argument("unknown cost mode: " + std::string(name));
}

CostMatrix build_costs(std::span<const Box> priors, std::span<const Box> dets, double lambda,
                       double iou_min, CostMode mode) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("build_costs: lambda must be nonnegative");
  if (!(iou_min >= 0.0 && iou_min <= 1.0)) throw std::invalid_argument("build_costs: iou_min outside [0, 1]");
  const auto R = static_cast<Eigen::Index>(priors.size());
  const auto C = static_cast<Eigen::Index>(dets.size());
  CostMatrix m;
  m.cost.resize(R, C);
  m.allowed.resize(R, C);
  m.lambda = mode == CostMode::kHybrid ? lambda : 0.0;
  for (Eigen::Index r = 0; r < R; ++r) {
    for (Eigen::Index c = 0; c < C; ++c) {
      const Box& p = priors[static_cast<std::size_t>(r)];
      const Box& d = dets[static_cast<std::size_t>(c)];
      const double overlap = iou(p, d);
      double cost = -overlap;
      if (mode == CostMode::kHybrid) cost += lambda * l1_distance(p, d);
      m.cost(r, c) = cost;
      m.allowed(r, c) = overlap >= iou_min;
    }
  }
  return m;
}

double sentinel_cost(const CostMatrix& m) {
  double max_abs = 0.0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (m.allowed(r, c)) max_abs = std::max(max_abs, std::abs(m.cost(r, c)));
    }
  }
  return 10.0 * (max_abs + 4.0 * m.lambda + 1.0);
}

namespace {

using Pairs = std::vector<std::pair<int, int>>;

// Potentials method over a rows <= cols matrix, 1-based with a virtual column 0.
// Returns row potentials u and column potentials v with cost(i, j) >= u[i] + v[j].
Pairs solve_with_duals(const Eigen::MatrixXd& cost, std::vector<double>& row_dual,
                       std::vector<double>& col_dual) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  row_dual.assign(u.begin() + 1, u.end());
  col_dual.assign(v.begin() + 1, v.end());
  Pairs out;
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) out.emplace_back(p[j] - 1, j - 1);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Pairs solve_any_shape(const Eigen::MatrixXd& cost, std::vector<double>& row_dual, std::vector<double>& col_dual) {
  if (cost.rows() == 0 || cost.cols() == 0) {
    row_dual.assign(static_cast<std::size_t>(cost.rows()), 0.0);
    col_dual.assign(static_cast<std::size_t>(cost.cols()), 0.0);
    return {};
  }
  if (cost.rows() <= cost.cols()) return solve_with_duals(cost, row_dual, col_dual);
  Pairs t = solve_with_duals(cost.transpose(), col_dual, row_dual);
  for (auto& pr : t) std::swap(pr.first, pr.second);
  std::sort(t.begin(), t.end());
  return t;
}

double total_of(const Eigen::MatrixXd& cost, const Pairs& pairs) {
  double total = 0.0;
  for (const auto& [r, c] : pairs) total += cost(r, c);
  return total;
}

// Among the minimum-cost matchings, the one whose sorted (row, col) list is
// lexicographically smallest. Each row in turn takes the lowest column that
// still admits an optimal completion; the dual bound rules out most columns
// without a re-solve.
Pairs lexicographic_optimum(const Eigen::MatrixXd& cost) {
  std::vector<double> u, v;
  Pairs witness = solve_any_shape(cost, u, v);
  const auto R = static_cast<int>(cost.rows());
  const auto C = static_cast<int>(cost.cols());
  if (witness.empty()) return witness;
  const std::size_t cardinality = witness.size();
  const double best = total_of(cost, witness);
  double magnitude = 1.0;
  for (const auto& [r, c] : witness) magnitude += std::abs(cost(r, c));
  const double total_tol = 1e-12 * magnitude;
  const double dual_tol = 1e-9 * (1.0 + cost.cwiseAbs().maxCoeff());

  std::vector<int> witness_col(static_cast<std::size_t>(R), -1);
  for (const auto& [r, c] : witness) witness_col[static_cast<std::size_t>(r)] = c;
  std::vector<char> row_done(static_cast<std::size_t>(R), 0), col_taken(static_cast<std::size_t>(C), 0);
  Pairs fixed;
  double fixed_total = 0.0;

  for (int r = 0; r < R && fixed.size() < cardinality; ++r) {
    row_done[static_cast<std::size_t>(r)] = 1;
    for (int c = 0; c < C; ++c) {
      if (col_taken[static_cast<std::size_t>(c)]) continue;
      const bool in_witness = c == witness_col[static_cast<std::size_t>(r)];
      if (!in_witness && cost(r, c) - u[static_cast<std::size_t>(r)] - v[static_cast<std::size_t>(c)] > dual_tol) continue;
      if (in_witness) {
        fixed.emplace_back(r, c);
        fixed_total += cost(r, c);
        col_taken[static_cast<std::size_t>(c)] = 1;
        break;
      }
      std::vector<int> rows, cols;
      for (int i = 0; i < R; ++i) {
        if (!row_done[static_cast<std::size_t>(i)]) rows.push_back(i);
      }
      for (int j = 0; j < C; ++j) {
        if (!col_taken[static_cast<std::size_t>(j)] && j != c) cols.push_back(j);
      }
      Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cost(rows[i], cols[j]);
      }
      std::vector<double> su, sv;
      Pairs rest = solve_any_shape(sub, su, sv);
      if (fixed.size() + 1 + rest.size() != cardinality) continue;
      if (fixed_total + cost(r, c) + total_of(sub, rest) > best + total_tol) continue;
      fixed.emplace_back(r, c);
      fixed_total += cost(r, c);
      col_taken[static_cast<std::size_t>(c)] = 1;
      std::fill(witness_col.begin(), witness_col.end(), -1);
      for (const auto& [i, j] : rest) witness_col[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])] = cols[static_cast<std::size_t>(j)];
      break;
    }
  }
  return fixed;
}

}  // namespace

std::vector<std::pair<int, int>> hungarian(const Eigen::MatrixXd& cost) {
  std::vector<double> u, v;
  return solve_any_shape(cost, u, v);
}

Assignment solve_assignment(const CostMatrix& m) {
  Assignment a;
  Eigen::MatrixXd work = m.cost;
  const double sentinel = sentinel_cost(m);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!m.allowed(r, c)) work(r, c) = sentinel;
    }
  }
  std::vector<char> row_used(static_cast<std::size_t>(m.rows())), col_used(static_cast<std::size_t>(m.cols()));
  for (const auto& [r, c] : lexicographic_optimum(work)) {
    if (!m.allowed(r, c)) continue;
    a.pairs.emplace_back(r, c);
    row_used[static_cast<std::size_t>(r)] = 1;
    col_used[static_cast<std::size_t>(c)] = 1;
  }
  for (std::size_t r = 0; r < row_used.size(); ++r) {
    if (!row_used[r]) a.unmatched_rows.push_back(static_cast<int>(r));
  }
  for (std::size_t c = 0; c < col_used.size(); ++c) {
    if (!col_used[c]) a.unmatched_cols.push_back(static_cast<int>(c));
  }
  return a;
}

}  // namespace movesort
