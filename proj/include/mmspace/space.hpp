#pragma once

// Finite metric-measure spaces, couplings between them and the pulled-back
// semi-distance pairs the box and observable distances operate on.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mmspace/errors.hpp"

namespace mmspace {

/// Absolute tolerance for mass and metric invariants.
inline constexpr double kInvariantTol = 1e-12;
/// Tolerance for postconditions of computed results.
inline constexpr double kResultTol = 1e-9;

/// Tolerance scaled to the magnitude of a mass total.
inline double mass_tol(double total) { return kInvariantTol * std::max(1.0, std::abs(total)); }

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.front().size();
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      if (rows[i].size() != c) throw DomainError("ragged matrix rows");
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * c));
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> data() const { return data_; }

  std::vector<std::vector<double>> to_rows() const {
    std::vector<std::vector<double>> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i].assign(row(i).begin(), row(i).end());
    return out;
  }

  double row_sum(std::size_t r) const {
    auto s = row(r);
    return std::accumulate(s.begin(), s.end(), 0.0);
  }
  double col_sum(std::size_t c) const {
    double s = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) s += (*this)(r, c);
    return s;
  }
  double sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// A finite mm-space (X, d_X, mu_X): labelled atoms with masses and a
/// (pseudo)metric. Zero-mass atoms are kept but are not part of the support.
class FiniteMMSpace {
 public:
  FiniteMMSpace() = default;
  FiniteMMSpace(std::vector<std::string> labels, std::vector<double> weights, Matrix dist)
      : labels_(std::move(labels)), weights_(std::move(weights)), dist_(std::move(dist)) {}

  std::size_t size() const { return weights_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<double>& weights() const { return weights_; }
  const Matrix& dist() const { return dist_; }
  double weight(std::size_t i) const { return weights_[i]; }
  double d(std::size_t i, std::size_t j) const { return dist_(i, j); }

  double total_mass() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

  std::vector<std::size_t> support() const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < weights_.size(); ++i)
      if (weights_[i] > 0.0) s.push_back(i);
    return s;
  }

  friend bool operator==(const FiniteMMSpace&, const FiniteMMSpace&) = default;

 private:
  std::vector<std::string> labels_;
  std::vector<double> weights_;
  Matrix dist_;
};

/// Default labels x0, x1, ...
inline std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = "x" + std::to_string(i);
  return out;
}

/// Convenience constructor with generated labels.
inline FiniteMMSpace make_space(std::vector<double> weights, const std::vector<std::vector<double>>& dist) {
  auto n = weights.size();
  return FiniteMMSpace(default_labels(n), std::move(weights), Matrix::from_rows(dist));
}

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline ValidationReport validate(const FiniteMMSpace& space) {
  ValidationReport report;
  auto fail = [&](const std::string& msg) { report.violations.push_back(msg); };
  const std::size_t n = space.size();
  const Matrix& d = space.dist();

  if (n == 0) fail("space has no points");
  if (space.labels().size() != n)
    fail("labels length " + std::to_string(space.labels().size()) + " != weights length " + std::to_string(n));
  if (d.rows() != n || d.cols() != n) {
    fail("dist is " + std::to_string(d.rows()) + "x" + std::to_string(d.cols()) + ", expected " +
         std::to_string(n) + "x" + std::to_string(n));
    return report;
  }
  std::set<std::string> seen;
  for (const auto& l : space.labels())
    if (!seen.insert(l).second) fail("duplicate label '" + l + "'");

  for (std::size_t i = 0; i < n; ++i) {
    const double w = space.weight(i);
    if (!std::isfinite(w) || w < 0.0) fail("weight[" + std::to_string(i) + "] is negative or not finite");
  }
  if (n > 0 && !(space.total_mass() > 0.0)) fail("total mass is not positive");

  for (std::size_t i = 0; i < n; ++i) {
    if (d(i, i) != 0.0) fail("dist[" + std::to_string(i) + "][" + std::to_string(i) + "] is not zero");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = d(i, j);
      if (!std::isfinite(v) || v < 0.0)
        fail("dist[" + std::to_string(i) + "][" + std::to_string(j) + "] is negative or not finite");
      if (j > i && std::abs(v - d(j, i)) > kInvariantTol)
        fail("asymmetry: dist[" + std::to_string(i) + "][" + std::to_string(j) + "] != dist[" +
             std::to_string(j) + "][" + std::to_string(i) + "]");
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (d(i, k) > d(i, j) + d(j, k) + kInvariantTol) {
          fail("triangle inequality fails for (" + std::to_string(i) + "," + std::to_string(j) + "," +
               std::to_string(k) + ")");
          return report;
        }
  return report;
}

/// Throws ValidationError listing every violation.
inline const FiniteMMSpace& require_valid(const FiniteMMSpace& space) {
  auto report = validate(space);
  if (!report.ok()) {
    std::ostringstream msg;
    msg << "invalid mm-space:";
    for (const auto& v : report.violations) msg << "\n  " << v;
    throw ValidationError(msg.str());
  }
  return space;
}

/// (alpha X) = (X, d_X, alpha mu_X).
inline FiniteMMSpace scale_measure(const FiniteMMSpace& space, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("scale_measure: alpha must be positive");
  std::vector<double> w = space.weights();
  for (auto& x : w) x *= alpha;
  return FiniteMMSpace(space.labels(), std::move(w), space.dist());
}

/// Same points and metric, new masses.
inline FiniteMMSpace with_weights(const FiniteMMSpace& space, std::vector<double> weights) {
  if (weights.size() != space.size()) throw DomainError("with_weights: length mismatch");
  return FiniteMMSpace(space.labels(), std::move(weights), space.dist());
}

inline bool same_mass(double a, double b) { return std::abs(a - b) <= mass_tol(std::max(a, b)); }

/// A nonnegative n_X x n_Y matrix whose marginals are the weights of X and Y.
class Coupling {
 public:
  Coupling() = default;
  explicit Coupling(Matrix pi) : pi_(std::move(pi)) {}

  const Matrix& matrix() const { return pi_; }
  double operator()(std::size_t x, std::size_t y) const { return pi_(x, y); }
  double total_mass() const { return pi_.sum(); }

  /// Largest marginal deviation from the given weights.
  double marginal_error(std::span<const double> wx, std::span<const double> wy) const {
    if (pi_.rows() != wx.size() || pi_.cols() != wy.size()) return INFINITY;
    double err = 0.0;
    for (std::size_t i = 0; i < wx.size(); ++i) err = std::max(err, std::abs(pi_.row_sum(i) - wx[i]));
    for (std::size_t j = 0; j < wy.size(); ++j) err = std::max(err, std::abs(pi_.col_sum(j) - wy[j]));
    for (double v : pi_.data())
      if (v < 0.0) err = std::max(err, -v);
    return err;
  }

 private:
  Matrix pi_;
};

/// Throws DomainError unless pi couples the weights of X and Y.
inline Coupling make_coupling(const FiniteMMSpace& X, const FiniteMMSpace& Y, Matrix pi) {
  Coupling c(std::move(pi));
  const double err = c.marginal_error(X.weights(), Y.weights());
  if (!(err <= mass_tol(X.total_mass())))
    throw DomainError("coupling marginals do not match the weights (error " + std::to_string(err) + ")");
  return c;
}

inline Coupling product_coupling(const FiniteMMSpace& X, const FiniteMMSpace& Y) {
  const double m = X.total_mass();
  Matrix pi(X.size(), Y.size());
  for (std::size_t i = 0; i < X.size(); ++i)
    for (std::size_t j = 0; j < Y.size(); ++j) pi(i, j) = X.weight(i) * Y.weight(j) / m;
  return Coupling(std::move(pi));
}

/// Diagonal self-coupling of X.
inline Coupling diagonal_coupling(const FiniteMMSpace& X) {
  Matrix pi(X.size(), X.size());
  for (std::size_t i = 0; i < X.size(); ++i) pi(i, i) = X.weight(i);
  return Coupling(std::move(pi));
}

/// North-west corner rule over the given visiting orders; yields a vertex
/// of the transportation polytope.
inline Matrix northwest_corner(std::span<const double> supply, std::span<const double> demand,
                               std::span<const std::size_t> row_order, std::span<const std::size_t> col_order) {
  Matrix pi(supply.size(), demand.size());
  std::vector<double> s(supply.begin(), supply.end());
  std::vector<double> t(demand.begin(), demand.end());
  std::size_t a = 0, b = 0;
  while (a < row_order.size() && b < col_order.size()) {
    const std::size_t i = row_order[a], j = col_order[b];
    const double q = std::min(s[i], t[j]);
    if (q > 0.0) pi(i, j) += q;
    s[i] -= q;
    t[j] -= q;
    if (s[i] <= 0.0)
      ++a;
    else
      ++b;
  }
  return pi;
}

inline std::vector<std::size_t> iota_order(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

/// Extends a partial flow (row sums <= supply, column sums <= demand, equal
/// deficits) to a full coupling by north-west filling of the residuals.
inline Matrix complete_coupling(const Matrix& partial, std::span<const double> supply, std::span<const double> demand) {
  std::vector<double> rs(supply.size()), cs(demand.size());
  for (std::size_t i = 0; i < supply.size(); ++i) rs[i] = std::max(0.0, supply[i] - partial.row_sum(i));
  for (std::size_t j = 0; j < demand.size(); ++j) cs[j] = std::max(0.0, demand[j] - partial.col_sum(j));
  auto ro = iota_order(supply.size());
  auto co = iota_order(demand.size());
  Matrix fill = northwest_corner(rs, cs, ro, co);
  Matrix out = partial;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += fill(i, j);
  return out;
}

/// Index cell (x, y) of a coupling.
struct Cell {
  std::size_t x = 0;
  std::size_t y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Two symmetric semi-distances on a common finite weighted index set.
struct SemiDistancePair {
  std::vector<double> weights;
  Matrix d1;
  Matrix d2;
  /// Provenance of each index when built from a coupling (may be empty).
  std::vector<Cell> cells;

  std::size_t size() const { return weights.size(); }
  double total_mass() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }
  std::vector<std::size_t> support() const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < weights.size(); ++i)
      if (weights[i] > 0.0) s.push_back(i);
    return s;
  }
};

/// Shape and symmetry checks for a pair (triangle inequality not required).
inline ValidationReport validate(const SemiDistancePair& pair) {
  ValidationReport report;
  const std::size_t n = pair.size();
  for (const Matrix* d : {&pair.d1, &pair.d2}) {
    if (d->rows() != n || d->cols() != n) {
      report.violations.push_back("distance matrix shape does not match the index set");
      return report;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if ((*d)(i, i) != 0.0) report.violations.push_back("nonzero diagonal at " + std::to_string(i));
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::abs((*d)(i, j) - (*d)(j, i)) > kInvariantTol || (*d)(i, j) < 0.0)
          report.violations.push_back("asymmetric or negative entry at (" + std::to_string(i) + "," +
                                      std::to_string(j) + ")");
    }
  }
  for (double w : pair.weights)
    if (!(w >= 0.0)) report.violations.push_back("negative weight");
  return report;
}

/// The pair (phi_X^* d_X, phi_Y^* d_Y) for parameters whose joint cell
/// structure is the coupling: one index per cell with positive mass.
inline SemiDistancePair pullback_pair(const FiniteMMSpace& X, const FiniteMMSpace& Y, const Coupling& pi) {
  const double err = pi.marginal_error(X.weights(), Y.weights());
  if (!(err <= mass_tol(X.total_mass())))
    throw DomainError("pullback_pair: coupling marginals do not match the weights");
  SemiDistancePair out;
  for (std::size_t x = 0; x < X.size(); ++x)
    for (std::size_t y = 0; y < Y.size(); ++y)
      if (pi(x, y) > 0.0) {
        out.cells.push_back({x, y});
        out.weights.push_back(pi(x, y));
      }
  const std::size_t n = out.cells.size();
  out.d1 = Matrix(n, n);
  out.d2 = Matrix(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      out.d1(a, b) = X.d(out.cells[a].x, out.cells[b].x);
      out.d2(a, b) = Y.d(out.cells[a].y, out.cells[b].y);
    }
  return out;
}

}  // namespace mmspace
