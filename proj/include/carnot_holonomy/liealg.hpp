#pragma once

// Matrix Lie algebra machinery: the horizontal-holonomy generators A_h and
// B_{h,k}, commutator closure with singular-value rank control, center and
// Killing form diagnostics, and principal logarithms on SO(N) and SE(N).

#include "carnot.hpp"
#include "connection.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace carnot {

inline Matrix bracket(const Matrix& x, const Matrix& y) { return x * y - y * x; }

/// A_h = sum_j X_j ^ Omega_{h,j}, B_{h,k} = X_h ^ X_k + sum_j Omega_{h,j} ^ Omega_{k,j},
/// with B extended to all (h,k) by B_{h,k} = -B_{k,h}, B_{h,h} = 0.
class GeneratorSet {
 public:
  explicit GeneratorSet(const CarnotModel& model) : model_(model) {
    const int m = model.m();
    const int N = model.dim();
    A_.reserve(static_cast<std::size_t>(m));
    for (int h = 1; h <= m; ++h) {
      SkewOperator a = SkewOperator::Zero(N, N);
      for (int j = 1; j <= m; ++j) a += wedge(model.X(j), model.Omega(h, j));
      A_.push_back(std::move(a));
    }
    B_.assign(static_cast<std::size_t>(m * m), SkewOperator::Zero(N, N));
    for (int h = 1; h <= m; ++h) {
      for (int k = 1; k <= m; ++k) {
        if (h == k) continue;
        SkewOperator b = wedge(model.X(h), model.X(k));
        for (int j = 1; j <= m; ++j) b += wedge(model.Omega(h, j), model.Omega(k, j));
        B_[index(h, k)] = std::move(b);
      }
    }
  }

  const CarnotModel& model() const { return model_; }

  const SkewOperator& A(int h) const {
    model_.check_index(h);
    return A_[static_cast<std::size_t>(h - 1)];
  }

  const SkewOperator& B(int h, int k) const {
    model_.check_index(h);
    model_.check_index(k);
    return B_[index(h, k)];
  }

  /// A_1..A_m followed by B_{h,k} over the index pairs.
  std::vector<SkewOperator> basis() const {
    std::vector<SkewOperator> out(A_);
    for (const IndexPair& p : model_.index_pairs()) out.push_back(B(p.h, p.k));
    return out;
  }

  std::vector<SkewOperator> b_part() const {
    std::vector<SkewOperator> out;
    for (const IndexPair& p : model_.index_pairs()) out.push_back(B(p.h, p.k));
    return out;
  }

 private:
  std::size_t index(int h, int k) const {
    return static_cast<std::size_t>((h - 1) * model_.m() + (k - 1));
  }

  CarnotModel model_;
  std::vector<SkewOperator> A_;
  std::vector<SkewOperator> B_;
};

inline GeneratorSet make_generators(const CarnotModel& model) { return GeneratorSet(model); }

struct StructureReport {
  double aa = 0.0;  // max |[A_i,A_j] - B_{i,j}|
  double ab = 0.0;  // max |[A_i,B_{h,k}] - (d_ki A_h - d_hi A_k)|
  double bb = 0.0;  // max |[B_{l,t},B_{h,k}] - (...)|
  double tol = 1e-12;
  double max_residual() const { return std::max({aa, ab, bb}); }
  bool pass() const { return max_residual() < tol; }
};

/// Checks the three structure relations over every index combination.
inline StructureReport verify_structure(const GeneratorSet& gens, double tol = 1e-12) {
  const int m = gens.model().m();
  auto kd = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  auto maxabs = [](const Matrix& x) { return x.cwiseAbs().maxCoeff(); };
  StructureReport rep;
  rep.tol = tol;
  for (int i = 1; i <= m; ++i) {
    for (int j = 1; j <= m; ++j) {
      rep.aa = std::max(rep.aa, maxabs(bracket(gens.A(i), gens.A(j)) - gens.B(i, j)));
    }
    for (int h = 1; h <= m; ++h) {
      for (int k = 1; k <= m; ++k) {
        const Matrix rhs = kd(k, i) * gens.A(h) - kd(h, i) * gens.A(k);
        rep.ab = std::max(rep.ab, maxabs(bracket(gens.A(i), gens.B(h, k)) - rhs));
      }
    }
  }
  for (int l = 1; l <= m; ++l) {
    for (int t = 1; t <= m; ++t) {
      for (int h = 1; h <= m; ++h) {
        for (int k = 1; k <= m; ++k) {
          const Matrix rhs = kd(k, l) * gens.B(h, t) + kd(h, l) * gens.B(t, k) +
                             kd(t, k) * gens.B(l, h) + kd(h, t) * gens.B(k, l);
          rep.bb = std::max(rep.bb, maxabs(bracket(gens.B(l, t), gens.B(h, k)) - rhs));
        }
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Subspaces of matrices

/// Subspace of rows x cols matrices with a basis orthonormal under
/// <X,Y> = trace(X^T Y). Carries the singular-value spectrum of the last
/// rank decision so borderline ranks can be audited.
struct MatrixSubspace {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<Matrix> basis;
  double tol = 1e-8;
  std::vector<double> singular_values;
  /// sigma_r / sigma_{r+1} at the cutoff; +inf when nothing lies below it.
  double rank_gap = std::numeric_limits<double>::infinity();
  int iterations = 0;

  int dim() const { return static_cast<int>(basis.size()); }

  /// Orthonormal coordinates of x in the basis.
  Vector coordinates(const Matrix& x) const {
    Vector c(dim());
    for (int i = 0; i < dim(); ++i) {
      c(i) = (basis[static_cast<std::size_t>(i)].array() * x.array()).sum();
    }
    return c;
  }

  Matrix project(const Matrix& x) const {
    Matrix p = Matrix::Zero(rows, cols);
    const Vector c = coordinates(x);
    for (int i = 0; i < dim(); ++i) p += c(i) * basis[static_cast<std::size_t>(i)];
    return p;
  }

  /// Frobenius norm of the component of x orthogonal to the subspace.
  double residual(const Matrix& x) const { return (x - project(x)).norm(); }
};

namespace detail {

inline Matrix stack_rows(const std::vector<Matrix>& mats) {
  const Eigen::Index sz = mats.front().size();
  Matrix M(static_cast<Eigen::Index>(mats.size()), sz);
  for (std::size_t i = 0; i < mats.size(); ++i) {
    M.row(static_cast<Eigen::Index>(i)) = mats[i].reshaped().transpose();
  }
  return M;
}

// Orthonormal basis of span(mats) using a relative singular-value cutoff.
inline MatrixSubspace orthonormalize(const std::vector<Matrix>& mats, double tol) {
  MatrixSubspace S;
  S.rows = mats.front().rows();
  S.cols = mats.front().cols();
  S.tol = tol;
  const Matrix M = stack_rows(mats);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinV);
  const Vector sv = svd.singularValues();
  S.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  int r = 0;
  if (smax > 0.0) {
    while (r < sv.size() && sv(r) > tol * smax) ++r;
  }
  S.rank_gap = std::numeric_limits<double>::infinity();
  if (r > 0 && r < sv.size() && sv(r) > 0.0) S.rank_gap = sv(r - 1) / sv(r);
  for (int i = 0; i < r; ++i) {
    S.basis.push_back(svd.matrixV().col(i).reshaped(S.rows, S.cols));
  }
  return S;
}

}  // namespace detail

/// Orthonormal span of the given matrices (no bracket closure).
inline MatrixSubspace span_of(const std::vector<Matrix>& mats, double tol = 1e-8) {
  if (mats.empty()) throw std::invalid_argument("span_of: empty set");
  return detail::orthonormalize(mats, tol);
}

/// Smallest commutator-closed subspace containing the seed. Each round stacks
/// the current orthonormal basis with all pairwise brackets (newest basis
/// vectors first) and re-orthonormalizes; stops when the rank is unchanged.
inline MatrixSubspace bracket_closure(const std::vector<Matrix>& seed, double tol = 1e-8) {
  if (seed.empty()) throw std::invalid_argument("bracket_closure: empty seed");
  MatrixSubspace cur = detail::orthonormalize(seed, tol);
  const auto ambient = static_cast<int>(cur.rows * cur.cols);
  for (int round = 1;; ++round) {
    cur.iterations = round;
    if (cur.dim() == 0) return cur;
    std::vector<Matrix> stack(cur.basis);
    const int d = cur.dim();
    for (int i = d - 1; i >= 0; --i) {
      for (int j = i - 1; j >= 0; --j) {
        stack.push_back(bracket(cur.basis[static_cast<std::size_t>(i)],
                                cur.basis[static_cast<std::size_t>(j)]));
      }
    }
    MatrixSubspace next = detail::orthonormalize(stack, tol);
    next.iterations = round;
    if (next.dim() <= d || next.dim() >= ambient) return next;
    cur = std::move(next);
  }
}

/// dim { C in S : [C, b_i] = 0 for all i } from the null space of the stacked
/// linear map c -> ([sum_k c_k b_k, b_i])_i.
inline int center_dim(const MatrixSubspace& S) {
  const int d = S.dim();
  if (d == 0) return 0;
  const Eigen::Index blk = S.rows * S.cols;
  Matrix M(blk * d, d);
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < d; ++i) {
      M.block(blk * i, k, blk, 1) =
          bracket(S.basis[static_cast<std::size_t>(k)], S.basis[static_cast<std::size_t>(i)])
              .reshaped();
    }
  }
  Eigen::JacobiSVD<Matrix> svd(M);
  const Vector sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  if (smax <= 0.0) return d;
  int rank = 0;
  while (rank < sv.size() && sv(rank) > S.tol * smax) ++rank;
  return d - rank;
}

/// ad_x in the orthonormal basis of a bracket-closed S.
inline Matrix adjoint_matrix(const MatrixSubspace& S, const Matrix& x) {
  const int d = S.dim();
  Matrix ad(d, d);
  for (int j = 0; j < d; ++j) ad.col(j) = S.coordinates(bracket(x, S.basis[static_cast<std::size_t>(j)]));
  return ad;
}

/// K_ij = trace(ad_i ad_j).
inline Matrix killing_matrix(const MatrixSubspace& S) {
  const int d = S.dim();
  std::vector<Matrix> ads;
  ads.reserve(static_cast<std::size_t>(d));
  for (const Matrix& b : S.basis) ads.push_back(adjoint_matrix(S, b));
  Matrix K(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      K(i, j) = (ads[static_cast<std::size_t>(i)] * ads[static_cast<std::size_t>(j)]).trace();
    }
  }
  return K;
}

enum class KillingVerdict { negative_definite, degenerate, indefinite };

inline const char* to_string(KillingVerdict v) {
  switch (v) {
    case KillingVerdict::negative_definite: return "negative_definite";
    case KillingVerdict::degenerate: return "degenerate";
    case KillingVerdict::indefinite: return "indefinite";
  }
  return "?";
}

struct CompactnessReport {
  /// max |k([x,y],z) + k(y,[x,z])| over sampled triples, k(X,Y) = -trace(XY).
  double ad_invariance_residual = 0.0;
  Vector killing_eigenvalues;
  /// Largest Killing eigenvalue divided by the largest magnitude (0 if K = 0).
  double max_normalized_eigenvalue = 0.0;
  KillingVerdict verdict = KillingVerdict::degenerate;
};

inline CompactnessReport compactness_check(const MatrixSubspace& S, int samples = 64,
                                           std::uint64_t seed = 7) {
  CompactnessReport rep;
  const int d = S.dim();
  if (d == 0) {
    rep.killing_eigenvalues = Vector(0);
    return rep;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  auto sample = [&] {
    Matrix x = Matrix::Zero(S.rows, S.cols);
    for (const Matrix& b : S.basis) x += gauss(rng) * b;
    return x;
  };
  auto k = [](const Matrix& a, const Matrix& b) { return -(a * b).trace(); };
  for (int s = 0; s < samples; ++s) {
    const Matrix x = sample();
    const Matrix y = sample();
    const Matrix z = sample();
    rep.ad_invariance_residual =
        std::max(rep.ad_invariance_residual, std::abs(k(bracket(x, y), z) + k(y, bracket(x, z))));
  }

  const Matrix K = killing_matrix(S);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (K + K.transpose()), Eigen::EigenvaluesOnly);
  rep.killing_eigenvalues = eig.eigenvalues();
  const double scale = rep.killing_eigenvalues.cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    rep.max_normalized_eigenvalue = 0.0;
    rep.verdict = KillingVerdict::degenerate;
    return rep;
  }
  const double lo = rep.killing_eigenvalues.minCoeff() / scale;
  const double hi = rep.killing_eigenvalues.maxCoeff() / scale;
  rep.max_normalized_eigenvalue = hi;
  constexpr double kEigTol = 1e-6;
  if (hi < -kEigTol) {
    rep.verdict = KillingVerdict::negative_definite;
  } else if (hi > kEigTol && lo < -kEigTol) {
    rep.verdict = KillingVerdict::indefinite;
  } else {
    rep.verdict = KillingVerdict::degenerate;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Logarithms

class LogDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline double spectral_distance_to_identity(const Matrix& R) {
  const Matrix D = R - Matrix::Identity(R.rows(), R.cols());
  return Eigen::JacobiSVD<Matrix>(D).singularValues()(0);
}

/// Principal logarithm of a rotation with ||R - I||_2 < 1, returned exactly skew.
inline SkewOperator log_rotation(const Matrix& R) {
  if (R.rows() != R.cols()) throw std::invalid_argument("log_rotation: matrix is not square");
  const double dist = spectral_distance_to_identity(R);
  if (!(dist < 1.0)) {
    throw LogDomainError("log_rotation: ||R - I||_2 = " + std::to_string(dist) +
                         " outside the principal-log domain; rescale the loop");
  }
  const Matrix L = R.log();
  return 0.5 * (L - L.transpose());
}

/// Rigid motion z -> rotation z + translation; product (v,L)(u,K) = (Lu + v, LK).
struct SEElement {
  Matrix rotation;
  Vector translation;

  static SEElement identity(int N) { return {Matrix::Identity(N, N), Vector::Zero(N)}; }

  int dim() const { return static_cast<int>(rotation.rows()); }

  Matrix homogeneous() const {
    const int N = dim();
    Matrix H = Matrix::Identity(N + 1, N + 1);
    H.topLeftCorner(N, N) = rotation;
    H.topRightCorner(N, 1) = translation;
    return H;
  }

  SEElement operator*(const SEElement& o) const {
    return {rotation * o.rotation, rotation * o.translation + translation};
  }

  SEElement inverse() const {
    const Matrix Rt = rotation.transpose();
    return {Rt, -Rt * translation};
  }
};

/// (N+1) x (N+1) embedding [[omega, v], [0, 0]] of an se(N) element.
inline Matrix se_embed(const SkewOperator& omega, const Vector& v) {
  const Eigen::Index N = omega.rows();
  Matrix X = Matrix::Zero(N + 1, N + 1);
  X.topLeftCorner(N, N) = omega;
  X.topRightCorner(N, 1) = v;
  return X;
}

inline SEElement exp_se(const SkewOperator& omega, const Vector& v) {
  const Eigen::Index N = omega.rows();
  const Matrix E = se_embed(omega, v).exp();
  return {E.topLeftCorner(N, N), E.topRightCorner(N, 1)};
}

inline std::pair<SkewOperator, Vector> log_se(const SEElement& g) {
  const int N = g.dim();
  const double dist = spectral_distance_to_identity(g.rotation);
  if (!(dist < 1.0)) {
    throw LogDomainError("log_se: ||R - I||_2 = " + std::to_string(dist) +
                         " outside the principal-log domain; rescale the loop");
  }
  const Matrix L = g.homogeneous().log();
  const Matrix w = L.topLeftCorner(N, N);
  return {0.5 * (w - w.transpose()), L.topRightCorner(N, 1)};
}

}  // namespace carnot
