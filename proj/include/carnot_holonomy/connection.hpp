#pragma once

// Levi-Civita connection of the left-invariant metric g(E_a, E_b) = delta_ab
// on G, expressed in the orthonormal frame. All coefficients are constant in
// this frame, so covariant derivatives, curvature and its derivatives reduce
// to matrix algebra on N x N operators acting on frame coefficients.

#include "carnot.hpp"

#include <cmath>
#include <vector>

namespace carnot {

/// N x N matrix acting on frame coefficients; skew-symmetric for every
/// operator produced here (curvature, wedge, holonomy algebra elements).
using SkewOperator = Eigen::MatrixXd;

inline bool is_skew(const Matrix& m, double tol = 1e-12) {
  return m.rows() == m.cols() && (m + m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

/// (a ^ b) z = <a,z> b - <b,z> a, i.e. the matrix b a^T - a b^T.
inline SkewOperator wedge(const FrameVector& a, const FrameVector& b) {
  return b * a.transpose() - a * b.transpose();
}

/// Christoffel data in the frame. direction(a) is the matrix C_a whose column b
/// holds the coefficients of nabla_{E_a} E_b.
class ConnectionTable {
 public:
  ConnectionTable(CarnotModel model, std::vector<Matrix> slices)
      : model_(std::move(model)), slices_(std::move(slices)) {}

  const CarnotModel& model() const { return model_; }
  int dim() const { return model_.dim(); }

  const Matrix& direction(int a) const {
    model_.check_slot(a);
    return slices_[static_cast<std::size_t>(a)];
  }

  /// Coefficient of E_c in nabla_{E_a} E_b.
  double operator()(int a, int b, int c) const { return direction(a)(c, b); }

  FrameVector covariant(int a, int b) const { return direction(a).col(b); }

  /// C(u) = sum_a u_a C_a, the operator Z -> nabla_u Z on frame coefficients.
  Matrix along(const FrameVector& u) const {
    Matrix out = Matrix::Zero(dim(), dim());
    for (int a = 0; a < dim(); ++a) {
      if (u(a) != 0.0) out += u(a) * slices_[static_cast<std::size_t>(a)];
    }
    return out;
  }

 private:
  CarnotModel model_;
  std::vector<Matrix> slices_;
};

/// Koszul's formula in an orthonormal left-invariant frame:
///   g(nabla_a E_b, E_c) = 1/2 (g([a,b],c) - g([a,c],b) - g([b,c],a)).
inline FrameVector koszul(const CarnotModel& model, int a, int b) {
  const int N = model.dim();
  const FrameVector ab = frame_bracket(model, a, b);
  FrameVector out = model.zero();
  for (int c = 0; c < N; ++c) {
    const double ac_b = frame_bracket(model, a, c)(b);
    const double bc_a = frame_bracket(model, b, c)(a);
    out(c) = 0.5 * (ab(c) - ac_b - bc_a);
  }
  return out;
}

inline ConnectionTable koszul_table(const CarnotModel& model) {
  const int N = model.dim();
  std::vector<Matrix> slices(static_cast<std::size_t>(N), Matrix::Zero(N, N));
  for (int a = 0; a < N; ++a) {
    for (int b = 0; b < N; ++b) slices[static_cast<std::size_t>(a)].col(b) = koszul(model, a, b);
  }
  return {model, std::move(slices)};
}

/// Closed-form connection:
///   nabla_{X_h} X_k = 1/2 Omega_{h,k},
///   nabla_{X_l} Omega_{h,k} = nabla_{Omega_{h,k}} X_l = 1/2 (delta_kl X_h - delta_hl X_k),
///   nabla_Omega Omega = 0.
inline ConnectionTable nabla_table(const CarnotModel& model) {
  const int N = model.dim();
  const int m = model.m();
  std::vector<Matrix> slices(static_cast<std::size_t>(N), Matrix::Zero(N, N));
  for (int h = 1; h <= m; ++h) {
    for (int k = 1; k <= m; ++k) {
      slices[static_cast<std::size_t>(h - 1)].col(k - 1) = 0.5 * model.Omega(h, k);
    }
  }
  for (const IndexPair& p : model.index_pairs()) {
    const int g = model.gamma_slot(p.h, p.k);
    for (int l = 1; l <= m; ++l) {
      FrameVector v = model.zero();
      if (p.k == l) v += 0.5 * model.X(p.h);
      if (p.h == l) v -= 0.5 * model.X(p.k);
      slices[static_cast<std::size_t>(l - 1)].col(g) = v;
      slices[static_cast<std::size_t>(g)].col(l - 1) = v;
    }
  }
  return {model, std::move(slices)};
}

// ---------------------------------------------------------------------------
// Curvature

/// R(u,w) = [C(u), C(w)] - C([u,w]) from the connection table alone.
inline SkewOperator curvature_direct(const ConnectionTable& table, const FrameVector& u,
                                     const FrameVector& w) {
  const Matrix Cu = table.along(u);
  const Matrix Cw = table.along(w);
  return Cu * Cw - Cw * Cu - table.along(frame_bracket(table.model(), u, w));
}

inline SkewOperator curvature_direct(const ConnectionTable& table, int a, int b) {
  const CarnotModel& model = table.model();
  return curvature_direct(table, model.unit(a), model.unit(b));
}

namespace detail {

inline double kd(int a, int b) { return a == b ? 1.0 : 0.0; }

// Closed-form curvature on the symbols X_h, Omega_{h,k} (any 1-based indices).
inline SkewOperator curv_xx(const CarnotModel& M, int h, int k) {
  SkewOperator r = 0.75 * wedge(M.X(h), M.X(k));
  for (int j = 1; j <= M.m(); ++j) r += 0.25 * wedge(M.Omega(h, j), M.Omega(k, j));
  return r;
}

inline SkewOperator curv_xo(const CarnotModel& M, int l, int h, int k) {
  return 0.25 * (wedge(M.X(h), M.Omega(k, l)) + wedge(M.X(k), M.Omega(l, h)));
}

inline SkewOperator curv_oo(const CarnotModel& M, int i, int j, int h, int k) {
  return 0.25 * (kd(i, k) * wedge(M.X(h), M.X(j)) + kd(j, k) * wedge(M.X(i), M.X(h)) +
                 kd(i, h) * wedge(M.X(j), M.X(k)) + kd(j, h) * wedge(M.X(k), M.X(i)));
}

// nabla_{X_t} R(., .)
inline SkewOperator dcurv_x_xx(const CarnotModel& M, int t, int h, int k) {
  SkewOperator r = -curv_xo(M, t, h, k);
  for (int j = 1; j <= M.m(); ++j) {
    r += 0.125 * (kd(k, t) * wedge(M.X(j), M.Omega(h, j)) -
                  kd(h, t) * wedge(M.X(j), M.Omega(k, j)));
  }
  return r;
}

inline SkewOperator dcurv_x_xo(const CarnotModel& M, int t, int l, int h, int k) {
  return 0.125 * (wedge(M.Omega(t, h), M.Omega(k, l)) + wedge(M.Omega(t, k), M.Omega(l, h)) +
                  2.0 * kd(l, t) * wedge(M.X(h), M.X(k)) + kd(h, t) * wedge(M.X(k), M.X(l)) -
                  kd(k, t) * wedge(M.X(h), M.X(l)));
}

// Every X_a ^ X_b term of R(Omega_ij, Omega_hk) differentiates along X_t to
// -1/2 R(X_t, Omega_{a,b}) (with the 1/4 prefactor absorbed).
inline SkewOperator dcurv_x_oo(const CarnotModel& M, int t, int i, int j, int h, int k) {
  return -0.5 * (kd(i, k) * curv_xo(M, t, h, j) + kd(j, k) * curv_xo(M, t, i, h) +
                 kd(i, h) * curv_xo(M, t, j, k) + kd(j, h) * curv_xo(M, t, k, i));
}

// nabla_{Omega_{s,t}} R(., .)
inline SkewOperator dcurv_o_xx(const CarnotModel& M, int s, int t, int h, int k) {
  return 0.375 * (kd(t, h) * wedge(M.X(s), M.X(k)) - kd(s, h) * wedge(M.X(t), M.X(k)) +
                  kd(t, k) * wedge(M.X(h), M.X(s)) - kd(s, k) * wedge(M.X(h), M.X(t)));
}

inline SkewOperator dcurv_o_xo(const CarnotModel& M, int s, int t, int l, int h, int k) {
  return 0.125 * (kd(t, h) * wedge(M.X(s), M.Omega(k, l)) - kd(s, h) * wedge(M.X(t), M.Omega(k, l)) +
                  kd(t, k) * wedge(M.X(s), M.Omega(l, h)) - kd(s, k) * wedge(M.X(t), M.Omega(l, h)));
}

inline SkewOperator dcurv_o_oo(const CarnotModel& M, int s, int t, int i, int j, int h, int k) {
  auto W = [&](int a, int b) { return wedge(M.X(a), M.X(b)); };
  return 0.125 *
         ((kd(i, h) * kd(t, k) - kd(i, k) * kd(t, h)) * W(j, s) +
          (kd(i, k) * kd(j, t) - kd(j, k) * kd(t, i)) * W(h, s) +
          (kd(j, h) * kd(t, i) - kd(i, h) * kd(t, j)) * W(k, s) +
          (kd(j, k) * kd(t, h) - kd(j, h) * kd(t, k)) * W(i, s) -
          (kd(i, k) * kd(j, s) - kd(j, k) * kd(i, s)) * W(h, t) -
          (kd(j, k) * kd(s, h) - kd(j, h) * kd(s, k)) * W(i, t) -
          (kd(j, h) * kd(s, i) - kd(i, h) * kd(s, j)) * W(k, t) -
          (kd(i, h) * kd(s, k) - kd(i, k) * kd(s, h)) * W(j, t));
}

}  // namespace detail

/// Closed-form curvature R(E_a, E_b) on frame slots:
///   R(X_h,X_k)         = 3/4 X_h^X_k + 1/4 sum_j Omega_{h,j}^Omega_{k,j}
///   R(X_l,Omega_{h,k}) = 1/4 (X_h^Omega_{k,l} + X_k^Omega_{l,h})
///   R(Omega_{i,j},Omega_{h,k}) = 1/4 (d_ik X_h^X_j + d_jk X_i^X_h + d_ih X_j^X_k + d_jh X_k^X_i)
inline SkewOperator curvature_closed(const CarnotModel& model, int a, int b) {
  const bool ha = model.is_horizontal(a);
  const bool hb = model.is_horizontal(b);
  if (ha && hb) return detail::curv_xx(model, a + 1, b + 1);
  if (ha) {
    const IndexPair p = model.pair_of(b);
    return detail::curv_xo(model, a + 1, p.h, p.k);
  }
  if (hb) {
    const IndexPair p = model.pair_of(a);
    return -detail::curv_xo(model, b + 1, p.h, p.k);
  }
  const IndexPair p = model.pair_of(a);
  const IndexPair q = model.pair_of(b);
  return detail::curv_oo(model, p.h, p.k, q.h, q.k);
}

/// Closed-form nabla_{E_t} R(E_a, E_b). Here nabla_Z R(X,Y) is the derivative
/// of the endomorphism field R(X,Y) with X, Y held as frame fields:
///   (nabla_Z R(X,Y)) W = nabla_Z (R(X,Y) W) - R(X,Y) nabla_Z W.
inline SkewOperator nabla_curvature(const CarnotModel& model, int t, int a, int b) {
  const bool ha = model.is_horizontal(a);
  const bool hb = model.is_horizontal(b);
  if (!ha && hb) return -nabla_curvature(model, t, b, a);

  if (model.is_horizontal(t)) {
    const int tt = t + 1;
    if (ha && hb) return detail::dcurv_x_xx(model, tt, a + 1, b + 1);
    if (ha) {
      const IndexPair p = model.pair_of(b);
      return detail::dcurv_x_xo(model, tt, a + 1, p.h, p.k);
    }
    const IndexPair p = model.pair_of(a);
    const IndexPair q = model.pair_of(b);
    return detail::dcurv_x_oo(model, tt, p.h, p.k, q.h, q.k);
  }

  const IndexPair st = model.pair_of(t);
  if (ha && hb) return detail::dcurv_o_xx(model, st.h, st.k, a + 1, b + 1);
  if (ha) {
    const IndexPair p = model.pair_of(b);
    return detail::dcurv_o_xo(model, st.h, st.k, a + 1, p.h, p.k);
  }
  const IndexPair p = model.pair_of(a);
  const IndexPair q = model.pair_of(b);
  return detail::dcurv_o_oo(model, st.h, st.k, p.h, p.k, q.h, q.k);
}

/// Two-term derivative built from the table: [C(z), R(u,w)].
inline SkewOperator nabla_curvature_direct(const ConnectionTable& table, const FrameVector& z,
                                           const FrameVector& u, const FrameVector& w) {
  const Matrix Cz = table.along(z);
  const SkewOperator R = curvature_direct(table, u, w);
  return Cz * R - R * Cz;
}

inline SkewOperator nabla_curvature_direct(const ConnectionTable& table, int t, int a, int b) {
  const CarnotModel& model = table.model();
  return nabla_curvature_direct(table, model.unit(t), model.unit(a), model.unit(b));
}

/// Torsion T(u,w) = nabla_u w - nabla_w u - [u,w].
inline FrameVector torsion(const ConnectionTable& table, const FrameVector& u,
                           const FrameVector& w) {
  return table.along(u) * w - table.along(w) * u - frame_bracket(table.model(), u, w);
}

}  // namespace carnot
