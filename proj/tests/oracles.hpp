#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls the closed-form paths it is used to check: vector fields are written
// from the branch formulas for X_h, transport and development are integrated
// with classical RK4 from the Koszul table.

#include "carnot_holonomy/carnot.hpp"
#include "carnot_holonomy/connection.hpp"
#include "carnot_holonomy/transport.hpp"

#include <random>
#include <vector>

namespace oracle {

using carnot::CarnotModel;
using carnot::Matrix;
using carnot::Vector;

/// Coordinate components of sum_a u_a E_a at packed coordinates x = (v, gamma):
///   X_h = d/dv_h + 1/2 sum_{i>h} v_i d/dgamma_{i,h} - 1/2 sum_{j<h} v_j d/dgamma_{h,j}.
inline Vector frame_field(const CarnotModel& model, const Vector& x, const Vector& u) {
  const int m = model.m();
  Vector dx = Vector::Zero(model.dim());
  for (int h = 1; h <= m; ++h) {
    const double c = u(h - 1);
    if (c == 0.0) continue;
    dx(h - 1) += c;
    for (int i = h + 1; i <= m; ++i) dx(model.gamma_slot(i, h)) += 0.5 * c * x(i - 1);
    for (int j = 1; j < h; ++j) dx(model.gamma_slot(h, j)) -= 0.5 * c * x(j - 1);
  }
  dx.tail(model.n()) += u.tail(model.n());
  return dx;
}

template <class F>
Vector rk4(F&& f, Vector y, double T, int steps) {
  const double h = T / steps;
  for (int s = 0; s < steps; ++s) {
    const Vector k1 = f(y);
    const Vector k2 = f(y + 0.5 * h * k1);
    const Vector k3 = f(y + 0.5 * h * k2);
    const Vector k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

inline Vector flow(const CarnotModel& model, const Vector& x0, const Vector& u, double dt,
                   int steps = 64) {
  return rk4([&](const Vector& x) { return frame_field(model, x, u); }, x0, dt, steps);
}

struct TransportOracle {
  Matrix rotation;
  Vector translation;
};

/// RK4 on the joint state (T, Lambda): T' = -C(u) T, Lambda' = T^T u, with
/// C(u) assembled from the Koszul table.
inline TransportOracle transport(const CarnotModel& model, const carnot::Path& path,
                                 int steps_per_segment = 200) {
  const carnot::ConnectionTable kos = carnot::koszul_table(model);
  const int N = model.dim();
  Vector y(N * N + N);
  y.head(N * N) = Matrix::Identity(N, N).reshaped();
  y.tail(N).setZero();
  for (const carnot::ControlSegment& seg : path) {
    Matrix C = Matrix::Zero(N, N);
    for (int a = 0; a < N; ++a) C += seg.u(a) * kos.direction(a);
    auto f = [&](const Vector& s) {
      const Matrix T = s.head(N * N).reshaped(N, N);
      Vector ds(N * N + N);
      ds.head(N * N) = (-C * T).reshaped();
      ds.tail(N) = T.transpose() * seg.u;
      return ds;
    };
    y = rk4(f, y, seg.dt, steps_per_segment);
  }
  return {y.head(N * N).reshaped(N, N), y.tail(N)};
}

inline carnot::Path random_path(const CarnotModel& model, std::mt19937_64& rng, int segments,
                                double scale, bool horizontal) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> dt(0.2, 1.0);
  carnot::Path p;
  for (int s = 0; s < segments; ++s) {
    Vector u = model.zero();
    const int active = horizontal ? model.m() : model.dim();
    for (int a = 0; a < active; ++a) u(a) = scale * g(rng);
    p.push_back(carnot::ControlSegment::make(model, u, dt(rng)));
  }
  return p;
}

}  // namespace oracle
