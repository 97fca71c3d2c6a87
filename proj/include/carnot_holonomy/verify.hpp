#pragma once

// Self-check suites for a given m: each suite compares two independent
// routes (closed form vs. first principles, or an identity that must hold)
// and reports its maximum residual against a fixed tolerance.

#include "carnot.hpp"
#include "connection.hpp"
#include "holonomy.hpp"
#include "liealg.hpp"
#include "transport.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace carnot {

struct SuiteResult {
  std::string name;
  double max_residual = 0.0;
  double tol = 0.0;
  std::string detail;
  bool pass() const { return max_residual < tol; }
};

struct VerifyReport {
  int m = 0;
  std::vector<SuiteResult> suites;
  bool pass() const {
    return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.pass(); });
  }
};

namespace detail {

inline GroupPoint random_point(const CarnotModel& model, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g;
  GroupPoint p = GroupPoint::identity(model);
  for (int i = 0; i < model.m(); ++i) p.v(i) = scale * g(rng);
  for (int i = 0; i < model.n(); ++i) p.gamma(i) = scale * g(rng);
  return p;
}

inline FrameVector random_frame_vector(const CarnotModel& model, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  FrameVector u = model.zero();
  for (int i = 0; i < model.dim(); ++i) u(i) = g(rng);
  return u;
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace detail

inline SuiteResult verify_group(const CarnotModel& model, std::mt19937_64& rng) {
  SuiteResult r{"group", 0.0, 1e-13, "associativity, inverse, dilation automorphism (relative)"};
  std::uniform_real_distribution<double> lam(0.1, 3.0);
  for (int i = 0; i < 100; ++i) {
    const GroupPoint p = detail::random_point(model, rng);
    const GroupPoint q = detail::random_point(model, rng);
    const GroupPoint s = detail::random_point(model, rng);
    const Vector lhs = group_mul(model, group_mul(model, p, q), s).coords();
    const Vector rhs = group_mul(model, p, group_mul(model, q, s)).coords();
    const double scale = std::max(1.0, lhs.cwiseAbs().maxCoeff());
    r.max_residual = std::max(r.max_residual, (lhs - rhs).cwiseAbs().maxCoeff() / scale);
    r.max_residual = std::max(
        r.max_residual, group_mul(model, p, inverse(model, p)).coords().cwiseAbs().maxCoeff());
    const double l = lam(rng);
    const Vector a = dilation(model, l, group_mul(model, p, q)).coords();
    const Vector b = group_mul(model, dilation(model, l, p), dilation(model, l, q)).coords();
    r.max_residual = std::max(r.max_residual,
                              (a - b).cwiseAbs().maxCoeff() / std::max(1.0, a.cwiseAbs().maxCoeff()));
    r.max_residual =
        std::max(r.max_residual, std::abs(jacobian_frame_at(model, p).determinant() - 1.0));
  }
  return r;
}

inline SuiteResult verify_connection(const CarnotModel& model) {
  SuiteResult r{"connection", 0.0, 1e-14, "closed-form table vs Koszul, metric compatibility, torsion"};
  const ConnectionTable closed = nabla_table(model);
  const ConnectionTable kos = koszul_table(model);
  const int N = model.dim();
  for (int a = 0; a < N; ++a) {
    r.max_residual = std::max(r.max_residual, detail::max_abs(closed.direction(a) - kos.direction(a)));
    r.max_residual = std::max(
        r.max_residual, detail::max_abs(closed.direction(a) + closed.direction(a).transpose()));
    for (int b = 0; b < N; ++b) {
      r.max_residual = std::max(
          r.max_residual, detail::max_abs(torsion(closed, model.unit(a), model.unit(b))));
    }
  }
  return r;
}

inline SuiteResult verify_curvature(const CarnotModel& model, std::mt19937_64& rng) {
  SuiteResult r{"curvature", 0.0, 1e-13, "closed form vs direct, first Bianchi, pair symmetry"};
  const ConnectionTable table = nabla_table(model);
  const int N = model.dim();
  for (int a = 0; a < N; ++a) {
    for (int b = 0; b < N; ++b) {
      r.max_residual = std::max(r.max_residual, detail::max_abs(curvature_closed(model, a, b) -
                                                                curvature_direct(table, a, b)));
    }
  }
  for (int i = 0; i < 200; ++i) {
    const FrameVector a = detail::random_frame_vector(model, rng);
    const FrameVector b = detail::random_frame_vector(model, rng);
    const FrameVector c = detail::random_frame_vector(model, rng);
    const FrameVector d = detail::random_frame_vector(model, rng);
    const Matrix Rab = curvature_direct(table, a, b);
    const Matrix Rbc = curvature_direct(table, b, c);
    const Matrix Rca = curvature_direct(table, c, a);
    const Matrix Rcd = curvature_direct(table, c, d);
    const double scale = 1.0 + a.norm() * b.norm() * c.norm() * d.norm();
    r.max_residual =
        std::max(r.max_residual, (Rab * c + Rbc * a + Rca * b).cwiseAbs().maxCoeff() / scale);
    r.max_residual =
        std::max(r.max_residual, std::abs(d.dot(Rab * c) - b.dot(Rcd * a)) / scale);
  }
  return r;
}

inline SuiteResult verify_nabla_curvature(const CarnotModel& model) {
  SuiteResult r{"nabla_curvature", 0.0, 1e-13, "closed form vs two-term derivative, all slot triples"};
  const ConnectionTable table = nabla_table(model);
  const int N = model.dim();
  for (int t = 0; t < N; ++t) {
    for (int a = 0; a < N; ++a) {
      for (int b = 0; b < N; ++b) {
        r.max_residual = std::max(r.max_residual,
                                  detail::max_abs(nabla_curvature(model, t, a, b) -
                                                  nabla_curvature_direct(table, t, a, b)));
      }
    }
  }
  return r;
}

inline SuiteResult verify_generators(const CarnotModel& model) {
  const GeneratorSet gens = make_generators(model);
  const StructureReport st = verify_structure(gens);
  const MatrixSubspace L = bracket_closure(gens.basis());
  SuiteResult r{"structure_constants", st.max_residual(), 1e-12,
                "closure dim " + std::to_string(L.dim()) + " (expected " +
                    std::to_string(model.dim()) + ")"};
  if (L.dim() != model.dim()) r.max_residual = std::max(r.max_residual, 1.0);
  return r;
}

inline SuiteResult verify_semisimple(const CarnotModel& model) {
  const MatrixSubspace L = bracket_closure(make_generators(model).basis());
  const int center = center_dim(L);
  const CompactnessReport c = compactness_check(L);
  SuiteResult r{"semisimple", c.ad_invariance_residual, 1e-12,
                std::string("center dim ") + std::to_string(center) + ", Killing " +
                    to_string(c.verdict)};
  if (center != 0 || c.verdict != KillingVerdict::negative_definite) {
    r.max_residual = std::max(r.max_residual, 1.0);
  }
  return r;
}

inline SuiteResult verify_transport(const CarnotModel& model, std::uint64_t seed) {
  SuiteResult r{"transport", 0.0, 1e-10, "SO(N) membership, reversal returns identity"};
  const ConnectionTable table = nabla_table(model);
  const int N = model.dim();
  for (int i = 0; i < 20; ++i) {
    const SampledLoop s = sample_loop(table, LoopKind::horizontal, seed, i, 0.3, 10);
    const Matrix& P = s.transport.rotation;
    r.max_residual = std::max(r.max_residual,
                              detail::max_abs(P.transpose() * P - Matrix::Identity(N, N)));
    r.max_residual = std::max(r.max_residual, std::abs(P.determinant() - 1.0));
    Path there_back = s.loop.segments;
    const Path rev = reversed(s.loop.segments);
    there_back.insert(there_back.end(), rev.begin(), rev.end());
    const TransportResult id = transport_path(table, there_back);
    r.max_residual = std::max(r.max_residual, detail::max_abs(id.rotation - Matrix::Identity(N, N)));
    r.max_residual = std::max(r.max_residual, id.translation.cwiseAbs().maxCoeff());
  }
  return r;
}

inline SuiteResult verify_loop_closure(const CarnotModel& model, std::mt19937_64& rng) {
  SuiteResult r{"loop_closure", 0.0, kLoopClosureTol, "random horizontal prefixes closed by rectangles"};
  std::normal_distribution<double> g;
  for (int i = 0; i < 100; ++i) {
    Path prefix;
    for (int s = 0; s < 10; ++s) {
      FrameVector u = model.zero();
      for (int h = 0; h < model.m(); ++h) u(h) = g(rng);
      prefix.push_back(ControlSegment::make(model, u, 0.5));
    }
    const LoopSpec loop = close_loop(model, prefix);
    r.max_residual = std::max(r.max_residual, closure_residual(model, loop.base, loop.segments));
  }
  return r;
}

inline VerifyReport run_verification(const CarnotModel& model, std::uint64_t seed = 42) {
  std::mt19937_64 rng(seed);
  VerifyReport rep;
  rep.m = model.m();
  rep.suites.push_back(verify_group(model, rng));
  rep.suites.push_back(verify_connection(model));
  rep.suites.push_back(verify_curvature(model, rng));
  rep.suites.push_back(verify_nabla_curvature(model));
  rep.suites.push_back(verify_generators(model));
  rep.suites.push_back(verify_semisimple(model));
  rep.suites.push_back(verify_loop_closure(model, rng));
  rep.suites.push_back(verify_transport(model, seed));
  return rep;
}

inline nlohmann::ordered_json to_json(const VerifyReport& rep) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["m"] = rep.m;
  j["suites"] = nlohmann::ordered_json::array();
  for (const SuiteResult& s : rep.suites) {
    nlohmann::ordered_json e;
    e["name"] = s.name;
    e["pass"] = s.pass();
    e["max_residual"] = s.max_residual;
    e["tol"] = s.tol;
    e["detail"] = s.detail;
    j["suites"].push_back(e);
  }
  j["pass"] = rep.pass();
  return j;
}

}  // namespace carnot
