#include "carnot_holonomy/transport.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace carnot;

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Path horizontal_prefix(const CarnotModel& model, std::mt19937_64& rng, int segments) {
  return oracle::random_path(model, rng, segments, 1.0, true);
}

Matrix random_orthogonal(int N, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix M(N, N);
  for (int i = 0; i < M.size(); ++i) M.data()[i] = g(rng);
  Eigen::HouseholderQR<Matrix> qr(M);
  return qr.householderQ();
}

GroupPoint random_point(const CarnotModel& model, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  GroupPoint p = GroupPoint::identity(model);
  for (int i = 0; i < model.m(); ++i) p.v(i) = g(rng);
  for (int i = 0; i < model.n(); ++i) p.gamma(i) = g(rng);
  return p;
}

}  // namespace

TEST(ControlSegment, Validation) {
  const CarnotModel model(2);
  EXPECT_THROW(ControlSegment::make(model, model.X(1), 0.0), std::invalid_argument);
  EXPECT_THROW(ControlSegment::make(model, Vector::Zero(2), 1.0), std::invalid_argument);
  EXPECT_TRUE(ControlSegment::axis(model, 0, 1.0, 1.0).horizontal_only);
  EXPECT_FALSE(ControlSegment::axis(model, 2, 1.0, 1.0).horizontal_only);
}

TEST(FlowEndpoint, StraightHorizontal) {
  const CarnotModel model(3);
  const GroupPoint x =
      flow_endpoint(model, GroupPoint::identity(model), ControlSegment::axis(model, 0, 1.0, 1.0));
  EXPECT_EQ(x.coords(), model.X(1));
}

TEST(FlowEndpoint, CommutatorPath) {
  const CarnotModel model(2);
  const double t = 0.7;
  GroupPoint x = GroupPoint::identity(model);
  for (auto [slot, sign] : {std::pair{0, 1.0}, {1, 1.0}, {0, -1.0}, {1, -1.0}}) {
    x = flow_endpoint(model, x, ControlSegment::axis(model, slot, sign, t));
  }
  EXPECT_TRUE(x.v.isZero(0.0));
  // X_1 first is the reverse of the orientation commutator_sign records.
  EXPECT_NEAR(x.gamma(0), -commutator_sign(model) * t * t, 1e-15);
  EXPECT_EQ(commutator_sign(model), 1);
}

TEST(FlowEndpoint, MatchesRK4) {
  std::mt19937_64 rng(17);
  for (int m = 2; m <= 4; ++m) {
    const CarnotModel model(m);
    for (int i = 0; i < 20; ++i) {
      const GroupPoint x0 = random_point(model, rng);
      const Path p = oracle::random_path(model, rng, 3, 1.0, false);
      Vector y = x0.coords();
      for (const ControlSegment& s : p) y = oracle::flow(model, y, s.u, s.dt);
      EXPECT_LE((path_endpoint(model, x0, p).coords() - y).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(ConnectionMatrix, Examples) {
  std::mt19937_64 rng(2);
  for (int m = 2; m <= 4; ++m) {
    const CarnotModel model(m);
    const ConnectionTable t = nabla_table(model);
    const Matrix C1 = connection_matrix(t, model.X(1));
    EXPECT_TRUE(is_skew(C1, 0.0));
    for (int i = 0; i < C1.size(); ++i) {
      const double c = std::abs(C1.data()[i]);
      EXPECT_TRUE(c == 0.0 || c == 0.5);
    }
    EXPECT_TRUE(connection_matrix(t, model.zero()).isZero(0.0));
    std::normal_distribution<double> g;
    FrameVector u = model.zero();
    for (int a = 0; a < model.dim(); ++a) u(a) = g(rng);
    EXPECT_TRUE(is_skew(connection_matrix(t, u), 1e-15));
  }
}

TEST(Transport, EmptyLoopIsIdentity) {
  const CarnotModel model(3);
  const TransportResult r = transport_loop(nabla_table(model), {GroupPoint::identity(model), {}});
  EXPECT_EQ(r.rotation, Matrix::Identity(6, 6));
  EXPECT_TRUE(r.translation.isZero(0.0));
}

TEST(Transport, LoopThenReversalIsIdentity) {
  std::mt19937_64 rng(5);
  for (int m = 2; m <= 4; ++m) {
    const CarnotModel model(m);
    const ConnectionTable t = nabla_table(model);
    for (int i = 0; i < 10; ++i) {
      const LoopSpec loop = close_loop(model, horizontal_prefix(model, rng, 5));
      Path there_back = loop.segments;
      const Path rev = reversed(loop.segments);
      there_back.insert(there_back.end(), rev.begin(), rev.end());
      const TransportResult r = transport_loop(t, {loop.base, there_back});
      EXPECT_LE(max_abs(r.rotation - Matrix::Identity(model.dim(), model.dim())), 1e-10);
      EXPECT_LE(r.translation.cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Transport, VerticalOutAndBack) {
  const CarnotModel model(2);
  const int g21 = model.gamma_slot(2, 1);
  const LoopSpec loop{GroupPoint::identity(model),
                      {ControlSegment::axis(model, g21, 1.0, 0.8),
                       ControlSegment::axis(model, g21, -1.0, 0.8)}};
  const TransportResult r = transport_loop(nabla_table(model), loop);
  EXPECT_LE(max_abs(r.rotation - Matrix::Identity(3, 3)), 1e-15);
}

TEST(Transport, NonClosingLoopThrows) {
  const CarnotModel model(2);
  const LoopSpec loop{GroupPoint::identity(model), {ControlSegment::axis(model, 0, 1.0, 1.0)}};
  try {
    transport_loop(nabla_table(model), loop);
    FAIL() << "expected invalid_argument";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos);
  }
}

TEST(Transport, RotationIsSpecialOrthogonal) {
  std::mt19937_64 rng(6);
  for (int m = 2; m <= 4; ++m) {
    const CarnotModel model(m);
    const ConnectionTable t = nabla_table(model);
    const int N = model.dim();
    for (int i = 0; i < 10; ++i) {
      const Matrix P = transport_path(t, oracle::random_path(model, rng, 6, 1.0, false)).rotation;
      EXPECT_LE(max_abs(P.transpose() * P - Matrix::Identity(N, N)), 1e-12);
      EXPECT_NEAR(P.determinant(), 1.0, 1e-12);
    }
  }
}

TEST(Transport, MatchesRK4Oracle) {
  std::mt19937_64 rng(7);
  for (int m = 2; m <= 3; ++m) {
    const CarnotModel model(m);
    const ConnectionTable t = nabla_table(model);
    for (int i = 0; i < 10; ++i) {
      const Path p = oracle::random_path(model, rng, 5, 1.0, i % 2 == 0);
      const TransportResult r = transport_path(t, p);
      const oracle::TransportOracle o = oracle::transport(model, p);
      EXPECT_LE(max_abs(r.rotation - o.rotation), 1e-8);
      EXPECT_LE((r.translation - o.translation).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(Transport, ConcatenationComposes) {
  std::mt19937_64 rng(8);
  const CarnotModel model(3);
  const ConnectionTable t = nabla_table(model);
  const Path a = oracle::random_path(model, rng, 4, 1.0, false);
  const Path b = oracle::random_path(model, rng, 4, 1.0, false);
  Path ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  const TransportResult ra = transport_path(t, a);
  const TransportResult rb = transport_path(t, b);
  const TransportResult rab = transport_path(t, ab);
  EXPECT_LE(max_abs(rab.rotation - rb.rotation * ra.rotation), 1e-13);
  EXPECT_LE((rab.translation - (ra.translation + ra.rotation.transpose() * rb.translation))
                .cwiseAbs()
                .maxCoeff(),
            1e-13);
}

TEST(Develop, StraightHorizontalLine) {
  const CarnotModel model(3);
  const ConnectionTable t = nabla_table(model);
  const DevelopmentCurve c =
      develop(t, {ControlSegment::axis(model, 0, 1.0, 2.0)}, GroupPoint::identity(model), 8);
  ASSERT_EQ(c.points.size(), 9u);
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    EXPECT_LE((c.points[i] - c.times[i] * model.X(1)).norm(), 1e-14);
  }
}

TEST(Develop, EmptyPathStaysAtOrigin) {
  const CarnotModel model(2);
  const DevelopmentCurve c = develop(nabla_table(model), {}, GroupPoint::identity(model));
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_TRUE(c.points[0].isZero(0.0));
}

TEST(Develop, EndpointEqualsTranslation) {
  std::mt19937_64 rng(9);
  const CarnotModel model(3);
  const ConnectionTable t = nabla_table(model);
  const LoopSpec loop = close_loop(model, horizontal_prefix(model, rng, 6));
  const DevelopmentCurve c = develop(t, loop.segments, loop.base, 3);
  EXPECT_LE((c.points.back() - transport_loop(t, loop).translation).norm(), 1e-14);
}

TEST(Rolling, SingleHorizontalSegment) {
  const CarnotModel model(2);
  const ConnectionTable t = nabla_table(model);
  const int N = model.dim();
  const ControlSegment seg = ControlSegment::axis(model, 0, 1.0, 1.5);
  const RollingState q0{GroupPoint::identity(model), Vector::Zero(N), Matrix::Identity(N, N)};
  const auto curve = rolling_curve(t, {seg}, q0, 5);
  ASSERT_EQ(curve.size(), 6u);
  for (const RollingSample& s : curve) {
    EXPECT_LE((s.state.x_hat - s.time * model.X(1)).norm(), 1e-14);
    if (s.time == 0.0) continue;
    const Matrix T = transport_path(t, {ControlSegment::axis(model, 0, 1.0, s.time)}).rotation;
    EXPECT_LE(max_abs(s.state.A - T.transpose()), 1e-14);
    EXPECT_LE((s.state.x.coords() - s.time * model.X(1)).norm(), 1e-15);
  }
}

TEST(Rolling, NoSlip) {
  // d/dt x_hat = A(t) xdot, with xdot the frame components of the control.
  std::mt19937_64 rng(10);
  const CarnotModel model(3);
  const ConnectionTable t = nabla_table(model);
  const int N = model.dim();
  const Path p = oracle::random_path(model, rng, 3, 1.0, false);
  const RollingState q0{GroupPoint::identity(model), Vector::Zero(N), Matrix::Identity(N, N)};
  auto rolled_at = [&](std::size_t seg, double tau) {
    Path prefix(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(seg));
    ControlSegment part = p[seg];
    part.dt = tau;
    prefix.push_back(part);
    return rolling_curve(t, prefix, q0).back().state;
  };
  const double h = 1e-3;
  for (std::size_t s = 0; s < p.size(); ++s) {
    const double tau = 0.5 * p[s].dt;
    const Vector d = (-rolled_at(s, tau + 2 * h).x_hat + 8 * rolled_at(s, tau + h).x_hat -
                      8 * rolled_at(s, tau - h).x_hat + rolled_at(s, tau - 2 * h).x_hat) /
                     (12 * h);
    EXPECT_LE((d - rolled_at(s, tau).A * p[s].u).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Rolling, Equivariance) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  const CarnotModel model(3);
  const ConnectionTable t = nabla_table(model);
  const int N = model.dim();
  for (int i = 0; i < 10; ++i) {
    const Path p = oracle::random_path(model, rng, 4, 1.0, i % 2 == 0);
    RollingState q0{random_point(model, rng), Vector::Zero(N), random_orthogonal(N, rng)};
    for (int a = 0; a < N; ++a) q0.x_hat(a) = g(rng);
    Vector y(N);
    for (int a = 0; a < N; ++a) y(a) = g(rng);
    const Matrix C = random_orthogonal(N, rng);
    const auto base = rolling_curve(t, p, q0, 2);
    const auto moved = rolling_curve(t, p, act(y, C, q0), 2);
    ASSERT_EQ(base.size(), moved.size());
    for (std::size_t k = 0; k < base.size(); ++k) {
      const RollingState e = act(y, C, base[k].state);
      EXPECT_LE((moved[k].state.x.coords() - e.x.coords()).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((moved[k].state.x_hat - e.x_hat).cwiseAbs().maxCoeff(), 1e-9);
      EXPECT_LE(max_abs(moved[k].state.A - e.A), 1e-9);
    }
  }
}

TEST(Rolling, ConstantPath) {
  const CarnotModel model(2);
  const ConnectionTable t = nabla_table(model);
  const RollingState q0{GroupPoint::identity(model), Vector::Ones(3), 2.0 * Matrix::Identity(3, 3)};
  for (const RollingSample& s : rolling_curve(t, {ControlSegment::make(model, model.zero(), 1.0)}, q0, 4)) {
    EXPECT_EQ(s.state.x.coords(), q0.x.coords());
    EXPECT_EQ(s.state.x_hat, q0.x_hat);
    EXPECT_EQ(s.state.A, q0.A);
  }
  EXPECT_EQ(rolling_curve(t, {}, q0).size(), 1u);
}

TEST(Rolling, SingularFrameThrows) {
  const CarnotModel model(2);
  const RollingState q0{GroupPoint::identity(model), Vector::Zero(3), Matrix::Zero(3, 3)};
  EXPECT_THROW(rolling_curve(nabla_table(model), {}, q0), std::invalid_argument);
}

TEST(CloseLoop, AlreadyClosedIsUnchanged) {
  const CarnotModel model(2);
  Path square;
  for (auto [slot, sign] : {std::pair{0, 1.0}, {1, 1.0}, {0, -1.0}, {1, -1.0},
                            {1, 1.0}, {0, 1.0}, {1, -1.0}, {0, -1.0}}) {
    square.push_back(ControlSegment::axis(model, slot, sign, 0.5));
  }
  ASSERT_EQ(closure_residual(model, GroupPoint::identity(model), square), 0.0);
  EXPECT_EQ(close_loop(model, square).segments.size(), square.size());
}

TEST(CloseLoop, SingleSquareGetsOneRectangle) {
  const CarnotModel model(2);
  Path square;
  for (auto [slot, sign] : {std::pair{0, 1.0}, {1, 1.0}, {0, -1.0}, {1, -1.0}}) {
    square.push_back(ControlSegment::axis(model, slot, sign, 0.5));
  }
  const LoopSpec loop = close_loop(model, square);
  EXPECT_EQ(loop.segments.size(), square.size() + 4);
  EXPECT_LT(closure_residual(model, loop.base, loop.segments), 1e-12);
  for (const ControlSegment& s : loop.segments) EXPECT_TRUE(s.horizontal_only);
}

TEST(CloseLoop, RandomPrefixesCloseAtAnyBase) {
  std::mt19937_64 rng(13);
  for (int m = 2; m <= 5; ++m) {
    const CarnotModel model(m);
    for (int i = 0; i < 25; ++i) {
      const GroupPoint base = random_point(model, rng);
      const LoopSpec loop = close_loop(model, horizontal_prefix(model, rng, 8), base);
      EXPECT_LT(closure_residual(model, base, loop.segments), 1e-12);
      for (const ControlSegment& s : loop.segments) EXPECT_TRUE(s.horizontal_only);
    }
  }
}

TEST(CloseLoop, RejectsVerticalSegments) {
  const CarnotModel model(2);
  EXPECT_THROW(close_loop(model, {ControlSegment::axis(model, 2, 1.0, 1.0)}), std::invalid_argument);
}

TEST(CloseLoop, VerticalClosure) {
  std::mt19937_64 rng(14);
  const CarnotModel model(3);
  const LoopSpec loop = close_loop_vertical(model, oracle::random_path(model, rng, 5, 1.0, false));
  EXPECT_LT(closure_residual(model, loop.base, loop.segments), 1e-12);
}

TEST(Rectangle, ChangesOnlyItsOwnPair) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  const CarnotModel model(4);
  for (const IndexPair& p : model.index_pairs()) {
    const GroupPoint x = random_point(model, rng);
    const double delta = d(rng);
    const GroupPoint y = path_endpoint(model, x, rectangle(model, p.h, p.k, delta));
    Vector expected = x.coords();
    expected(model.gamma_slot(p.h, p.k)) += delta;
    EXPECT_LE((y.coords() - expected).cwiseAbs().maxCoeff(), 1e-14);
  }
  EXPECT_TRUE(rectangle(model, 2, 1, 0.0).empty());
}
