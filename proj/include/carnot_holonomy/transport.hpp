#pragma once

// Parallel transport along piecewise frame-flow paths.
//
// A path is a list of segments, each following the left-invariant field
// u = sum_a u_a E_a for time dt. The group endpoint of a segment is exact
// (right multiplication by (dt u_v, dt u_gamma)); the frame components of a
// parallel field obey T' = -C(u) T, so each segment contributes exp(-dt C(u)).

#include "carnot.hpp"
#include "connection.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>
#include <vector>

namespace carnot {

struct ControlSegment {
  FrameVector u;
  double dt = 0.0;
  bool horizontal_only = false;

  /// Validating constructor; horizontal_only is derived from u.
  static ControlSegment make(const CarnotModel& model, FrameVector u, double dt) {
    if (u.size() != model.dim()) {
      throw std::invalid_argument("ControlSegment: control has wrong dimension");
    }
    if (!(dt > 0.0)) throw std::invalid_argument("ControlSegment: dt must be positive");
    const bool horizontal = u.tail(model.n()).isZero(0.0);
    return {std::move(u), dt, horizontal};
  }

  /// Segment along a single frame slot with signed unit speed.
  static ControlSegment axis(const CarnotModel& model, int slot, double sign, double dt) {
    return make(model, sign * model.unit(slot), dt);
  }
};

using Path = std::vector<ControlSegment>;

struct LoopSpec {
  GroupPoint base;
  Path segments;
};

struct TransportResult {
  /// Frame-to-frame parallel transport P_0^1 around the path.
  Matrix rotation;
  /// Development endpoint Lambda(1) in R^N.
  Vector translation;
};

inline GroupPoint flow_endpoint(const CarnotModel& model, const GroupPoint& x,
                                const ControlSegment& seg) {
  const Vector step = seg.dt * seg.u;
  return group_mul(model, x, {step.head(model.m()), step.tail(model.n())});
}

inline GroupPoint path_endpoint(const CarnotModel& model, const GroupPoint& base,
                                const Path& segments) {
  GroupPoint x = base;
  for (const ControlSegment& s : segments) x = flow_endpoint(model, x, s);
  return x;
}

/// Max coordinate distance between the path endpoint and its start.
inline double closure_residual(const CarnotModel& model, const GroupPoint& base,
                               const Path& segments) {
  const GroupPoint end = path_endpoint(model, base, segments);
  return (end.coords() - base.coords()).cwiseAbs().maxCoeff();
}

inline constexpr double kLoopClosureTol = 1e-12;

inline SkewOperator connection_matrix(const ConnectionTable& table, const FrameVector& u) {
  return table.along(u);
}

namespace detail {

// exp of [[C, u], [0, 0]] * dt; the top-right column is int_0^dt exp(sC) u ds.
inline Vector integrated_exp_action(const Matrix& C, const Vector& u, double dt) {
  const Eigen::Index N = C.rows();
  Matrix aug = Matrix::Zero(N + 1, N + 1);
  aug.topLeftCorner(N, N) = C * dt;
  aug.topRightCorner(N, 1) = u * dt;
  const Matrix E = aug.exp();
  return E.topRightCorner(N, 1);
}

// Propagators of one segment evaluated at fraction tau of its duration.
struct SegmentStep {
  Matrix transport;  // exp(-tau dt C)
  Vector develop;    // int_0^{tau dt} exp(sC) u ds
};

inline SegmentStep segment_step(const ConnectionTable& table, const ControlSegment& seg,
                                double tau) {
  const Matrix C = table.along(seg.u);
  const double t = tau * seg.dt;
  return {Matrix((-t * C).exp()), integrated_exp_action(C, seg.u, t)};
}

}  // namespace detail

/// Transport and development along an open path (no closure requirement).
inline TransportResult transport_path(const ConnectionTable& table, const Path& segments) {
  const int N = table.dim();
  Matrix T = Matrix::Identity(N, N);
  Vector dev = Vector::Zero(N);
  for (const ControlSegment& seg : segments) {
    const detail::SegmentStep step = detail::segment_step(table, seg, 1.0);
    // P_s^0 = T(s)^T, and within the segment T(s)^T = T0^T exp(sC).
    dev += T.transpose() * step.develop;
    T = step.transport * T;
  }
  return {T, dev};
}

inline TransportResult transport_loop(const ConnectionTable& table, const LoopSpec& loop) {
  const double res = closure_residual(table.model(), loop.base, loop.segments);
  if (!(res <= kLoopClosureTol)) {
    std::ostringstream os;
    os << "transport_loop: path does not close, residual " << res;
    throw std::invalid_argument(os.str());
  }
  return transport_path(table, loop.segments);
}

/// Reversed path: same segments in reverse order with negated controls.
inline Path reversed(const Path& segments) {
  Path out(segments.rbegin(), segments.rend());
  for (ControlSegment& s : out) s.u = -s.u;
  return out;
}

/// Development Lambda(t) = int_0^t P_s^0 gamma'(s) ds sampled at the start and
/// at `samples_per_segment` evenly spaced points inside each segment.
struct DevelopmentCurve {
  std::vector<double> times;
  std::vector<Vector> points;
};

inline DevelopmentCurve develop(const ConnectionTable& table, const Path& path,
                                const GroupPoint& x0, int samples_per_segment = 1) {
  if (!x0.matches(table.model())) {
    throw std::invalid_argument("develop: base point has wrong dimensions");
  }
  if (samples_per_segment < 1) throw std::invalid_argument("develop: need >= 1 sample per segment");
  const int N = table.dim();
  DevelopmentCurve curve;
  Matrix T = Matrix::Identity(N, N);
  Vector dev = Vector::Zero(N);
  double t = 0.0;
  curve.times.push_back(t);
  curve.points.push_back(dev);
  for (const ControlSegment& seg : path) {
    for (int s = 1; s <= samples_per_segment; ++s) {
      const double tau = static_cast<double>(s) / samples_per_segment;
      const detail::SegmentStep step = detail::segment_step(table, seg, tau);
      curve.times.push_back(t + tau * seg.dt);
      curve.points.push_back(dev + T.transpose() * step.develop);
    }
    const detail::SegmentStep full = detail::segment_step(table, seg, 1.0);
    dev += T.transpose() * full.develop;
    T = full.transport * T;
    t += seg.dt;
  }
  return curve;
}

/// A point q = (x, x_hat; A) of the rolling state space against (R^N, flat).
struct RollingState {
  GroupPoint x;
  Vector x_hat;
  Matrix A;
};

struct RollingSample {
  double time = 0.0;
  RollingState state;
  /// Frame velocity of the base curve at this sample (u of the active segment).
  FrameVector velocity;
};

/// Rolling without slipping or spinning: x follows the path,
/// A(t) = A0 P_t^0, x_hat(t) = x_hat0 + A0 Lambda(t).
inline std::vector<RollingSample> rolling_curve(const ConnectionTable& table, const Path& path,
                                                const RollingState& q0,
                                                int samples_per_segment = 1) {
  const CarnotModel& model = table.model();
  const int N = model.dim();
  if (!q0.x.matches(model) || q0.x_hat.size() != N || q0.A.rows() != N || q0.A.cols() != N) {
    throw std::invalid_argument("rolling_curve: initial state has wrong dimensions");
  }
  if (!Eigen::FullPivLU<Matrix>(q0.A).isInvertible()) {
    throw std::invalid_argument("rolling_curve: A0 is singular");
  }
  if (samples_per_segment < 1) {
    throw std::invalid_argument("rolling_curve: need >= 1 sample per segment");
  }

  std::vector<RollingSample> out;
  Matrix T = Matrix::Identity(N, N);
  Vector dev = Vector::Zero(N);
  GroupPoint x = q0.x;
  double t = 0.0;
  out.push_back({t, q0, path.empty() ? model.zero() : path.front().u});
  for (const ControlSegment& seg : path) {
    for (int s = 1; s <= samples_per_segment; ++s) {
      const double tau = static_cast<double>(s) / samples_per_segment;
      const detail::SegmentStep step = detail::segment_step(table, seg, tau);
      ControlSegment partial = seg;
      partial.dt = tau * seg.dt;
      const Matrix Tt = step.transport * T;
      RollingState q{flow_endpoint(model, x, partial), q0.x_hat + q0.A * (dev + T.transpose() * step.develop),
                     q0.A * Tt.transpose()};
      out.push_back({t + partial.dt, std::move(q), seg.u});
    }
    const detail::SegmentStep full = detail::segment_step(table, seg, 1.0);
    dev += T.transpose() * full.develop;
    T = full.transport * T;
    x = flow_endpoint(model, x, seg);
    t += seg.dt;
  }
  return out;
}

/// Affine action mu((y, C), (x, x_hat; A)) = (x, C x_hat + y; C A).
inline RollingState act(const Vector& y, const Matrix& C, const RollingState& q) {
  return {q.x, C * q.x_hat + y, C * q.A};
}

/// Sign s with X_h(t), X_k(t), -X_h(t), -X_k(t) (h > k) from the identity
/// landing at gamma_{h,k} = s t^2. Evaluated from the group law itself.
inline int commutator_sign(const CarnotModel& model) {
  GroupPoint x = GroupPoint::identity(model);
  const int h = 2;
  const int k = 1;
  for (auto [slot, sign] : {std::pair{h - 1, 1.0}, {k - 1, 1.0}, {h - 1, -1.0}, {k - 1, -1.0}}) {
    x = flow_endpoint(model, x, ControlSegment::axis(model, slot, sign, 1.0));
  }
  return x.gamma(0) > 0.0 ? 1 : -1;
}

/// Axis-aligned rectangle in the (e_h, e_k) plane adding `delta` to gamma_{h,k}.
/// From any point, it leaves v and every other vertical coordinate unchanged.
inline Path rectangle(const CarnotModel& model, int h, int k, double delta) {
  Path out;
  if (delta == 0.0) return out;
  const double side = std::sqrt(std::abs(delta));
  const bool forward = (delta > 0.0) == (commutator_sign(model) > 0);
  const int first = forward ? h : k;
  const int second = forward ? k : h;
  out.push_back(ControlSegment::axis(model, first - 1, 1.0, side));
  out.push_back(ControlSegment::axis(model, second - 1, 1.0, side));
  out.push_back(ControlSegment::axis(model, first - 1, -1.0, side));
  out.push_back(ControlSegment::axis(model, second - 1, -1.0, side));
  return out;
}

/// Closes a horizontal path into a horizontal loop at `base`: one straight
/// segment restores v, then one rectangle per index pair (in index order)
/// cancels the vertical residual.
inline LoopSpec close_loop(const CarnotModel& model, const Path& segments,
                           const GroupPoint& base) {
  detail::check_point(model, base, "close_loop");
  for (const ControlSegment& s : segments) {
    if (!s.horizontal_only || !s.u.tail(model.n()).isZero(0.0)) {
      throw std::invalid_argument("close_loop: segments must be horizontal");
    }
  }
  LoopSpec loop{base, segments};
  GroupPoint x = path_endpoint(model, base, segments);

  Vector back = model.zero();
  back.head(model.m()) = base.v - x.v;
  if (!back.isZero(0.0)) {
    loop.segments.push_back(ControlSegment::make(model, back, 1.0));
    x = flow_endpoint(model, x, loop.segments.back());
  }
  const auto& pairs = model.index_pairs();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    for (const ControlSegment& s :
         rectangle(model, pairs[i].h, pairs[i].k, base.gamma(idx) - x.gamma(idx))) {
      loop.segments.push_back(s);
      x = flow_endpoint(model, x, s);
    }
  }
  return loop;
}

inline LoopSpec close_loop(const CarnotModel& model, const Path& segments) {
  return close_loop(model, segments, GroupPoint::identity(model));
}

/// Closes an arbitrary path with a horizontal return segment followed by a
/// single vertical segment canceling the remaining gamma offset.
inline LoopSpec close_loop_vertical(const CarnotModel& model, const Path& segments,
                                    const GroupPoint& base) {
  detail::check_point(model, base, "close_loop_vertical");
  LoopSpec loop{base, segments};
  GroupPoint x = path_endpoint(model, base, segments);
  Vector back = model.zero();
  back.head(model.m()) = base.v - x.v;
  if (!back.isZero(0.0)) {
    loop.segments.push_back(ControlSegment::make(model, back, 1.0));
    x = flow_endpoint(model, x, loop.segments.back());
  }
  Vector up = model.zero();
  up.tail(model.n()) = base.gamma - x.gamma;
  if (!up.isZero(0.0)) loop.segments.push_back(ControlSegment::make(model, up, 1.0));
  return loop;
}

inline LoopSpec close_loop_vertical(const CarnotModel& model, const Path& segments) {
  return close_loop_vertical(model, segments, GroupPoint::identity(model));
}

}  // namespace carnot
