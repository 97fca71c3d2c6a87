#pragma once

// Free step-two homogeneous Carnot group G = (R^{m+n}, *) in exponential
// coordinates, with its dilations, left-invariant (Jacobian) frame and the
// orthonormal frame ordering used throughout the library.
//
// Frame ordering: slots 0..m-1 are X_1..X_m, slots m..N-1 are Gamma_{h,k}
// for (h,k) in the index set, sorted by ascending h then ascending k.
// Indices h,k handed to the public API are 1-based to match the usual
// notation; slots are 0-based.

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace carnot {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Tangent vector given by its N coefficients in the orthonormal frame.
using FrameVector = Eigen::VectorXd;

/// Pair (h,k) with 1 <= k < h <= m.
struct IndexPair {
  int h = 0;
  int k = 0;
  friend bool operator==(const IndexPair&, const IndexPair&) = default;
};

/// Result of omega_index: Omega_{h,k} = sign * Gamma_{slot}; sign 0 means Omega_{h,k} = 0.
struct SignedSlot {
  int slot = -1;
  int sign = 0;
  bool is_zero() const { return sign == 0; }
};

class CarnotModel {
 public:
  explicit CarnotModel(int m) : m_(m) {
    if (m < 2) {
      throw std::invalid_argument("CarnotModel: need m >= 2 generators, got " +
                                  std::to_string(m));
    }
    n_ = m * (m - 1) / 2;
    pairs_.reserve(static_cast<std::size_t>(n_));
    for (int h = 1; h <= m; ++h) {
      for (int k = 1; k < h; ++k) pairs_.push_back({h, k});
    }
  }

  int m() const { return m_; }
  int n() const { return n_; }
  /// Total dimension N = m + n.
  int dim() const { return m_ + n_; }

  const std::vector<IndexPair>& index_pairs() const { return pairs_; }

  int x_slot(int h) const {
    check_index(h);
    return h - 1;
  }

  /// Slot of Gamma_{h,k}; requires h > k.
  int gamma_slot(int h, int k) const {
    check_index(h);
    check_index(k);
    if (h <= k) {
      throw std::invalid_argument("gamma_slot: need h > k");
    }
    return m_ + (h - 1) * (h - 2) / 2 + (k - 1);
  }

  bool is_horizontal(int slot) const {
    check_slot(slot);
    return slot < m_;
  }

  /// (h,k) of a vertical slot.
  IndexPair pair_of(int slot) const {
    check_slot(slot);
    if (slot < m_) throw std::invalid_argument("pair_of: slot is horizontal");
    return pairs_[static_cast<std::size_t>(slot - m_)];
  }

  FrameVector zero() const { return FrameVector::Zero(dim()); }

  FrameVector unit(int slot) const {
    check_slot(slot);
    FrameVector e = zero();
    e(slot) = 1.0;
    return e;
  }

  /// X_h as a frame vector.
  FrameVector X(int h) const { return unit(x_slot(h)); }

  /// Omega_{h,k}: Gamma_{h,k} if h > k, -Gamma_{k,h} if h < k, 0 if h == k.
  FrameVector Omega(int h, int k) const {
    check_index(h);
    check_index(k);
    FrameVector out = zero();
    if (h > k) out(gamma_slot(h, k)) = 1.0;
    if (h < k) out(gamma_slot(k, h)) = -1.0;
    return out;
  }

  std::string slot_name(int slot) const {
    if (is_horizontal(slot)) return "X" + std::to_string(slot + 1);
    const IndexPair p = pair_of(slot);
    return "G" + std::to_string(p.h) + std::to_string(p.k);
  }

  void check_slot(int slot) const {
    if (slot < 0 || slot >= dim()) {
      throw std::invalid_argument("frame slot " + std::to_string(slot) + " out of range [0," +
                                  std::to_string(dim()) + ")");
    }
  }

  void check_index(int h) const {
    if (h < 1 || h > m_) {
      throw std::invalid_argument("generator index " + std::to_string(h) +
                                  " out of range [1," + std::to_string(m_) + "]");
    }
  }

  friend bool operator==(const CarnotModel& a, const CarnotModel& b) { return a.m_ == b.m_; }

 private:
  int m_;
  int n_ = 0;
  std::vector<IndexPair> pairs_;
};

inline CarnotModel make_model(int m) { return CarnotModel(m); }

/// A point (v, gamma) of G; gamma is indexed like CarnotModel::index_pairs().
struct GroupPoint {
  Vector v;
  Vector gamma;

  static GroupPoint identity(const CarnotModel& model) {
    return {Vector::Zero(model.m()), Vector::Zero(model.n())};
  }

  /// Coordinates packed as (v, gamma), i.e. in frame slot order.
  Vector coords() const {
    Vector out(v.size() + gamma.size());
    out << v, gamma;
    return out;
  }

  static GroupPoint from_coords(const CarnotModel& model, const Vector& c) {
    if (c.size() != model.dim()) {
      throw std::invalid_argument("GroupPoint::from_coords: expected " +
                                  std::to_string(model.dim()) + " coordinates");
    }
    return {c.head(model.m()), c.tail(model.n())};
  }

  bool matches(const CarnotModel& model) const {
    return v.size() == model.m() && gamma.size() == model.n();
  }
};

namespace detail {

inline void check_point(const CarnotModel& model, const GroupPoint& p, const char* what) {
  if (!p.matches(model)) {
    throw std::invalid_argument(std::string(what) + ": point dimensions (" +
                                std::to_string(p.v.size()) + "," +
                                std::to_string(p.gamma.size()) + ") do not match model (" +
                                std::to_string(model.m()) + "," + std::to_string(model.n()) +
                                ")");
  }
}

}  // namespace detail

/// (v,g) * (v',g') = (v + v', g + g' + 1/2 (v_h v'_k - v_k v'_h)).
inline GroupPoint group_mul(const CarnotModel& model, const GroupPoint& p, const GroupPoint& q) {
  detail::check_point(model, p, "group_mul");
  detail::check_point(model, q, "group_mul");
  GroupPoint r{p.v + q.v, p.gamma + q.gamma};
  const auto& pairs = model.index_pairs();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const int h = pairs[i].h - 1;
    const int k = pairs[i].k - 1;
    r.gamma(static_cast<Eigen::Index>(i)) += 0.5 * (p.v(h) * q.v(k) - p.v(k) * q.v(h));
  }
  return r;
}

inline GroupPoint inverse(const CarnotModel& model, const GroupPoint& p) {
  detail::check_point(model, p, "inverse");
  return {-p.v, -p.gamma};
}

/// delta_lambda(v, gamma) = (lambda v, lambda^2 gamma), an automorphism of G.
inline GroupPoint dilation(const CarnotModel& model, double lambda, const GroupPoint& p) {
  detail::check_point(model, p, "dilation");
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("dilation: lambda must be positive");
  }
  return {lambda * p.v, lambda * lambda * p.gamma};
}

inline SignedSlot omega_index(const CarnotModel& model, int h, int k) {
  model.check_index(h);
  model.check_index(k);
  if (h > k) return {model.gamma_slot(h, k), +1};
  if (h < k) return {model.gamma_slot(k, h), -1};
  return {};
}

/// Lie bracket of two frame fields: [X_h, X_k] = Omega_{h,k}; anything with a
/// vertical field vanishes (step two).
inline FrameVector frame_bracket(const CarnotModel& model, int a, int b) {
  model.check_slot(a);
  model.check_slot(b);
  FrameVector out = model.zero();
  if (model.is_horizontal(a) && model.is_horizontal(b)) {
    const SignedSlot s = omega_index(model, a + 1, b + 1);
    if (!s.is_zero()) out(s.slot) = s.sign;
  }
  return out;
}

/// Bilinear extension of frame_bracket to arbitrary frame vectors.
inline FrameVector frame_bracket(const CarnotModel& model, const FrameVector& u,
                                 const FrameVector& w) {
  FrameVector out = model.zero();
  for (int h = 1; h <= model.m(); ++h) {
    for (int k = 1; k < h; ++k) {
      const double c = u(h - 1) * w(k - 1) - u(k - 1) * w(h - 1);
      out(model.gamma_slot(h, k)) += c;
    }
  }
  return out;
}

/// Column a holds the coordinate expression (d/dv, d/dgamma) of frame field a at x.
///   X_h = d/dv_h + 1/2 sum_{(i,j)} (sum_l S^{(i,j)}_{h,l} v_l) d/dgamma_{i,j},
/// where S^{(i,j)} is -1 at (i,j) and +1 at (j,i); Gamma_{h,k} = d/dgamma_{h,k}.
inline Matrix jacobian_frame_at(const CarnotModel& model, const GroupPoint& x) {
  detail::check_point(model, x, "jacobian_frame_at");
  const int N = model.dim();
  Matrix J = Matrix::Identity(N, N);
  for (const IndexPair& p : model.index_pairs()) {
    const int row = model.gamma_slot(p.h, p.k);
    // S^{(h,k)}_{h,k} = -1 contributes to X_h, S^{(h,k)}_{k,h} = +1 to X_k.
    J(row, p.h - 1) += -0.5 * x.v(p.k - 1);
    J(row, p.k - 1) += 0.5 * x.v(p.h - 1);
  }
  return J;
}

}  // namespace carnot
