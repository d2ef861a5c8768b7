#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "quadrature.hpp"

namespace ebdg {

inline constexpr int kMaxOrder = 4;

inline int num_basis(Shape shape, int p) {
  switch (shape) {
    case Shape::line: return p + 1;
    case Shape::quad: return (p + 1) * (p + 1);
    case Shape::triangle: return (p + 1) * (p + 2) / 2;
  }
  return 0;
}

/// Legendre polynomials P_0..P_n and their derivatives at x.
inline void legendre_table(int n, double x, double* P, double* dP) {
  P[0] = 1.0;
  dP[0] = 0.0;
  if (n == 0) return;
  P[1] = x;
  dP[1] = 1.0;
  for (int k = 2; k <= n; ++k) {
    P[k] = ((2.0 * k - 1.0) * x * P[k - 1] - (k - 1.0) * P[k - 2]) / k;
    dP[k] = dP[k - 2] + (2.0 * k - 1.0) * P[k - 1];
  }
}

/// Polynomial generators spanning the degree-p space of a shape, ordered by degree.
/// quad: P_i(2x-1) P_j(2y-1) with max(i,j) <= p; triangle: P_i(r) P_j(s), i+j <= p.
inline std::vector<std::array<int, 2>> generator_exponents(Shape shape, int p) {
  std::vector<std::array<int, 2>> e;
  switch (shape) {
    case Shape::line:
      for (int i = 0; i <= p; ++i) e.push_back({i, 0});
      break;
    case Shape::quad:
      for (int d = 0; d <= 2 * p; ++d)
        for (int i = std::max(0, d - p); i <= std::min(d, p); ++i) e.push_back({i, d - i});
      break;
    case Shape::triangle:
      for (int d = 0; d <= p; ++d)
        for (int i = d; i >= 0; --i) e.push_back({i, d - i});
      break;
  }
  return e;
}

/// Generator values and reference gradients at r. grad may be null.
inline void eval_generators(Shape shape, int p, const RefPoint& r, double* val,
                            std::array<double, 2>* grad) {
  double Px[kMaxOrder + 8], dPx[kMaxOrder + 8], Py[kMaxOrder + 8], dPy[kMaxOrder + 8];
  double x = r[0], y = r[1], sx = 1.0, sy = 1.0;
  if (shape == Shape::quad) {
    x = 2.0 * r[0] - 1.0;
    y = 2.0 * r[1] - 1.0;
    sx = sy = 2.0;
  }
  legendre_table(p, x, Px, dPx);
  if (shape != Shape::line) legendre_table(p, y, Py, dPy);
  int m = 0;
  for (const auto& ij : generator_exponents(shape, p)) {
    if (shape == Shape::line) {
      val[m] = Px[ij[0]];
      if (grad) grad[m] = {dPx[ij[0]], 0.0};
    } else {
      val[m] = Px[ij[0]] * Py[ij[1]];
      if (grad) grad[m] = {sx * dPx[ij[0]] * Py[ij[1]], sy * Px[ij[0]] * dPy[ij[1]]};
    }
    ++m;
  }
}

/// Orthonormal modal basis on a reference element with the quadrature tables used by
/// the DG operator, plus the change of basis between modal coefficients and values at
/// N_p interpolation points chosen among the volume quadrature points.
class ReferenceElement {
 public:
  /// volume_order < 0 selects the default volume rule of degree 2p + 1.
  ReferenceElement(Shape shape, int p, std::optional<std::vector<int>> interpolation_subset = std::nullopt,
                   int volume_order = -1)
      : shape_(shape), p_(p) {
    if (p < 0 || p > kMaxOrder) throw std::invalid_argument("ReferenceElement: order " + std::to_string(p) + " unsupported");
    np_ = ebdg::num_basis(shape, p);
    volume_ = ebdg::volume_rule(shape, volume_order < 0 ? 2 * p + 1 : volume_order);
    if (static_cast<int>(volume_.size()) < np_) {
      throw std::invalid_argument("ReferenceElement: volume rule has fewer points than basis functions");
    }
    surface_ = ebdg::surface_rules(shape, 2 * p + 1);
    build_orthonormal();
    tabulate();
    choose_interpolation_points(std::move(interpolation_subset));
  }

  Shape shape() const { return shape_; }
  int order() const { return p_; }
  int num_basis() const { return np_; }
  const QuadratureRule& volume_rule() const { return volume_; }
  const SurfaceQuadratureSet& surface_rules() const { return surface_; }
  int num_volume_points() const { return static_cast<int>(volume_.size()); }
  int num_edges() const { return static_cast<int>(surface_.edges.size()); }
  int num_edge_points(int k) const { return static_cast<int>(surface_.edges[k].rule.size()); }
  int num_surface_points() const { return static_cast<int>(surface_.total_points()); }
  /// Flat index of surface point q on edge k.
  int surface_index(int k, int q) const { return edge_offset_[k] + q; }

  std::vector<double> eval_basis(const RefPoint& r) const {
    if (!inside_reference(shape_, r)) throw std::out_of_range("eval_basis: point outside reference " + to_string(shape_));
    std::vector<double> out(np_);
    eval_basis_unchecked(r, out.data(), nullptr);
    return out;
  }

  std::vector<std::array<double, 2>> eval_gradient(const RefPoint& r) const {
    if (!inside_reference(shape_, r)) throw std::out_of_range("eval_gradient: point outside reference " + to_string(shape_));
    std::vector<double> v(np_);
    std::vector<std::array<double, 2>> g(np_);
    eval_basis_unchecked(r, v.data(), g.data());
    return g;
  }

  void eval_basis_unchecked(const RefPoint& r, double* val, std::array<double, 2>* grad) const {
    double gv[64];
    std::array<double, 2> gg[64];
    eval_generators(shape_, p_, r, gv, grad ? gg : nullptr);
    for (int m = 0; m < np_; ++m) {
      double s = 0.0, sx = 0.0, sy = 0.0;
      for (int j = 0; j <= m; ++j) {
        const double c = coef_(m, j);
        s += c * gv[j];
        if (grad) {
          sx += c * gg[j][0];
          sy += c * gg[j][1];
        }
      }
      val[m] = s;
      if (grad) grad[m] = {sx, sy};
    }
  }

  /// phi_m at volume point v.
  double phi_volume(int v, int m) const { return phi_vol_[v * np_ + m]; }
  const std::array<double, 2>& grad_volume(int v, int m) const { return grad_vol_[v * np_ + m]; }
  /// phi_m at flat surface point s.
  double phi_surface(int s, int m) const { return phi_surf_[s * np_ + m]; }
  std::span<const double> phi_surface_row(int s) const { return {phi_surf_.data() + s * np_, static_cast<std::size_t>(np_)}; }
  std::span<const double> phi_volume_row(int v) const { return {phi_vol_.data() + v * np_, static_cast<std::size_t>(np_)}; }
  const RefPoint& surface_point(int s) const { return surf_points_[s]; }
  double surface_weight(int s) const { return surf_weights_[s]; }
  int surface_edge(int s) const { return surf_edge_[s]; }

  /// Reference mass matrix; the identity up to rounding for this basis.
  Eigen::MatrixXd mass_matrix() const {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(np_, np_);
    for (int v = 0; v < num_volume_points(); ++v)
      for (int i = 0; i < np_; ++i)
        for (int j = 0; j < np_; ++j) M(i, j) += volume_.weights[v] * phi_volume(v, i) * phi_volume(v, j);
    return M;
  }

  const std::vector<int>& interpolation_points() const { return interp_; }
  /// A(m, n) = phi_m(y_n).
  const Eigen::MatrixXd& interpolation_matrix() const { return interp_matrix_; }
  const Eigen::MatrixXd& interpolation_matrix_inverse() const { return interp_inverse_; }

  /// Lagrange basis at r built on the interpolation points: A^{-1} phi(r).
  Eigen::VectorXd lagrange(const RefPoint& r) const {
    std::vector<double> phi(np_);
    eval_basis_unchecked(r, phi.data(), nullptr);
    return interp_inverse_ * Eigen::Map<const Eigen::VectorXd>(phi.data(), np_);
  }

  /// Values at the interpolation points from modal coefficients.
  template <class T>
  std::vector<T> to_point_values(std::span<const T> coeffs) const {
    check_size(coeffs.size());
    std::vector<T> out(np_);
    for (int n = 0; n < np_; ++n) {
      T acc = coeffs[0] * interp_matrix_(0, n);
      for (int m = 1; m < np_; ++m) acc += coeffs[m] * interp_matrix_(m, n);
      out[n] = acc;
    }
    return out;
  }

  /// Modal coefficients from values at the interpolation points.
  template <class T>
  std::vector<T> from_point_values(std::span<const T> values) const {
    check_size(values.size());
    // c = A^{-T} values
    std::vector<T> out(np_);
    for (int m = 0; m < np_; ++m) {
      T acc = values[0] * interp_inverse_(0, m);
      for (int n = 1; n < np_; ++n) acc += values[n] * interp_inverse_(n, m);
      out[m] = acc;
    }
    return out;
  }

  /// Coefficient vector of the constant function 1.
  double constant_coefficient() const { return 1.0 / phi_vol_[0]; }

 private:
  void check_size(std::size_t n) const {
    if (static_cast<int>(n) != np_) throw std::invalid_argument("coefficient vector has wrong length");
  }

  void build_orthonormal() {
    // Gram matrix of the generators under the reference inner product, then two passes
    // of Cholesky orthonormalization.
    const QuadratureRule q = ebdg::volume_rule(shape_, std::min(2 * p_, kMaxQuadratureOrder));
    Eigen::MatrixXd G(np_, q.size());
    double gv[64];
    for (std::size_t v = 0; v < q.size(); ++v) {
      eval_generators(shape_, p_, q.points[v], gv, nullptr);
      for (int m = 0; m < np_; ++m) G(m, v) = gv[m];
    }
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(q.weights.data(), q.size());
    coef_ = Eigen::MatrixXd::Identity(np_, np_);
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::MatrixXd B = coef_ * G;
      const Eigen::MatrixXd gram = B * w.asDiagonal() * B.transpose();
      Eigen::LLT<Eigen::MatrixXd> llt(gram);
      if (llt.info() != Eigen::Success) throw std::runtime_error("ReferenceElement: generator Gram matrix not SPD");
      const Eigen::MatrixXd L = llt.matrixL();
      coef_ = L.triangularView<Eigen::Lower>().solve(coef_);
    }
    // Keep the lower-triangular structure exact so phi_m depends on generators 0..m only.
    for (int i = 0; i < np_; ++i)
      for (int j = i + 1; j < np_; ++j) coef_(i, j) = 0.0;
  }

  void tabulate() {
    const int nv = num_volume_points();
    phi_vol_.resize(nv * np_);
    grad_vol_.resize(nv * np_);
    for (int v = 0; v < nv; ++v) eval_basis_unchecked(volume_.points[v], &phi_vol_[v * np_], &grad_vol_[v * np_]);
    edge_offset_.clear();
    int s = 0;
    for (int k = 0; k < num_edges(); ++k) {
      edge_offset_.push_back(s);
      const auto& rule = surface_.edges[k].rule;
      for (std::size_t q = 0; q < rule.size(); ++q, ++s) {
        surf_points_.push_back(rule.points[q]);
        surf_weights_.push_back(rule.weights[q]);
        surf_edge_.push_back(k);
      }
    }
    phi_surf_.resize(s * np_);
    for (int i = 0; i < s; ++i) eval_basis_unchecked(surf_points_[i], &phi_surf_[i * np_], nullptr);
  }

  Eigen::MatrixXd matrix_for_subset(const std::vector<int>& subset) const {
    Eigen::MatrixXd A(np_, np_);
    for (int n = 0; n < np_; ++n)
      for (int m = 0; m < np_; ++m) A(m, n) = phi_volume(subset[n], m);
    return A;
  }

  static double condition_number(const Eigen::MatrixXd& A) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) <= 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / s(s.size() - 1);
  }

  void choose_interpolation_points(std::optional<std::vector<int>> subset) {
    constexpr double kMaxCondition = 1e8;
    const int nv = num_volume_points();
    if (subset) {
      if (static_cast<int>(subset->size()) != np_) throw std::invalid_argument("interpolation subset must have N_p points");
      for (int i : *subset)
        if (i < 0 || i >= nv) throw std::invalid_argument("interpolation subset index out of range");
      const Eigen::MatrixXd A = matrix_for_subset(*subset);
      if (condition_number(A) > kMaxCondition) {
        throw std::invalid_argument("interpolation subset gives a singular [phi_m(y_n)]; choose different points");
      }
      interp_ = *subset;
    } else {
      std::vector<int> first(np_);
      for (int i = 0; i < np_; ++i) first[i] = i;
      if (condition_number(matrix_for_subset(first)) <= kMaxCondition) {
        interp_ = first;
      } else {
        // Greedy: column-pivoted QR on the basis-by-point table picks well-spread points.
        Eigen::MatrixXd P(np_, nv);
        for (int v = 0; v < nv; ++v)
          for (int m = 0; m < np_; ++m) P(m, v) = phi_volume(v, m);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(P);
        std::vector<int> picked(np_);
        for (int i = 0; i < np_; ++i) picked[i] = qr.colsPermutation().indices()(i);
        std::sort(picked.begin(), picked.end());
        if (condition_number(matrix_for_subset(picked)) > kMaxCondition) {
          throw std::runtime_error("no well-conditioned interpolation subset among the volume points");
        }
        interp_ = picked;
      }
    }
    interp_matrix_ = matrix_for_subset(interp_);
    interp_inverse_ = interp_matrix_.inverse();
  }

  Shape shape_;
  int p_;
  int np_ = 0;
  QuadratureRule volume_;
  SurfaceQuadratureSet surface_;
  Eigen::MatrixXd coef_;
  std::vector<double> phi_vol_;
  std::vector<std::array<double, 2>> grad_vol_;
  std::vector<double> phi_surf_;
  std::vector<RefPoint> surf_points_;
  std::vector<double> surf_weights_;
  std::vector<int> surf_edge_;
  std::vector<int> edge_offset_;
  std::vector<int> interp_;
  Eigen::MatrixXd interp_matrix_;
  Eigen::MatrixXd interp_inverse_;
};

}  // namespace ebdg
