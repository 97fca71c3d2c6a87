#pragma once

// Holonomy Lie algebras of (G, g) by two independent routes:
//   algebraic - commutator closure of curvature operators (full holonomy) or
//               of the generators A_h, B_{h,k} (horizontal holonomy);
//   numeric   - principal logs of parallel transport around sampled closed
//               loops, followed by commutator closure.

#include "carnot.hpp"
#include "connection.hpp"
#include "liealg.hpp"
#include "transport.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace carnot {

enum class Mode { full, horizontal, affine_horizontal };
enum class Method { algebraic, numeric, both };
enum class Verdict { confirmed, mismatch, inconclusive };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::full: return "full";
    case Mode::horizontal: return "horizontal";
    case Mode::affine_horizontal: return "affine_horizontal";
  }
  return "?";
}

inline const char* to_string(Method m) {
  switch (m) {
    case Method::algebraic: return "algebraic";
    case Method::numeric: return "numeric";
    case Method::both: return "both";
  }
  return "?";
}

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::confirmed: return "confirmed";
    case Verdict::mismatch: return "mismatch";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

/// Rank decisions with a singular-value gap at or below this are inconclusive.
inline constexpr double kExactRankGap = 1e6;

inline int expected_dimension(const CarnotModel& model, Mode mode) {
  const int N = model.dim();
  switch (mode) {
    case Mode::full: return N * (N - 1) / 2;
    case Mode::horizontal: return N;
    case Mode::affine_horizontal: return 2 * N;
  }
  return 0;
}

struct HolonomyOptions {
  /// Number of sampled loops; negative selects 4 x expected dimension.
  int loops = -1;
  /// Target ||P - I||_2 of each sampled loop transport.
  double amplitude = 0.3;
  /// Containment tolerance on numeric logs.
  double tol = 1e-6;
  /// Relative singular-value cutoff for rank decisions.
  double rank_tol = 1e-8;
  std::uint64_t seed = 42;
  /// Worker threads for loop sampling; 0 runs sequentially.
  int threads = 0;
  int segments_per_loop = 10;
};

struct HolonomyReport {
  int m = 0;
  int n = 0;
  int N = 0;
  Mode mode = Mode::full;
  Method method = Method::both;
  int expected_dim = 0;
  int dim_estimate = 0;
  std::optional<int> algebraic_dim;
  std::optional<int> numeric_dim;
  double containment_residual = 0.0;
  std::vector<double> singular_values;
  double rank_gap = 0.0;
  int loops_used = 0;
  double amplitude = 0.0;
  double tol = 0.0;
  std::uint64_t rng_seed = 0;
  double elapsed_s = 0.0;
  /// Set when the curvature seed stalled and nabla R operators were adjoined.
  bool nabla_fallback = false;

  bool conclusive() const { return rank_gap > kExactRankGap; }

  Verdict verdict() const {
    if (!conclusive()) return Verdict::inconclusive;
    if (dim_estimate != expected_dim) return Verdict::mismatch;
    if (algebraic_dim && numeric_dim && *algebraic_dim != *numeric_dim) return Verdict::mismatch;
    if (!(containment_residual < tol)) return Verdict::mismatch;
    return Verdict::confirmed;
  }
};

// ---------------------------------------------------------------------------
// Algebraic route

inline std::vector<Matrix> curvature_seed(const CarnotModel& model) {
  std::vector<Matrix> seed;
  const int N = model.dim();
  for (int a = 0; a < N; ++a) {
    for (int b = a + 1; b < N; ++b) seed.push_back(curvature_closed(model, a, b));
  }
  return seed;
}

inline std::vector<Matrix> nabla_curvature_seed(const CarnotModel& model) {
  std::vector<Matrix> seed;
  const int N = model.dim();
  for (int t = 0; t < N; ++t) {
    for (int a = 0; a < N; ++a) {
      for (int b = a + 1; b < N; ++b) seed.push_back(nabla_curvature(model, t, a, b));
    }
  }
  return seed;
}

struct AlgebraicResult {
  MatrixSubspace algebra;
  bool nabla_fallback = false;
};

/// Closure of the curvature operators; nabla R operators are adjoined only if
/// that closure stalls below so(N). `target` overrides the stall threshold.
inline AlgebraicResult algebraic_full_algebra(const CarnotModel& model, double rank_tol = 1e-8,
                                              std::optional<int> target = std::nullopt) {
  const int want = target.value_or(expected_dimension(model, Mode::full));
  std::vector<Matrix> seed = curvature_seed(model);
  MatrixSubspace S = bracket_closure(seed, rank_tol);
  if (S.dim() >= want) return {std::move(S), false};
  std::vector<Matrix> more = nabla_curvature_seed(model);
  seed.insert(seed.end(), more.begin(), more.end());
  return {bracket_closure(seed, rank_tol), true};
}

inline MatrixSubspace algebraic_horizontal_algebra(const CarnotModel& model,
                                                   double rank_tol = 1e-8) {
  return bracket_closure(make_generators(model).basis(), rank_tol);
}

/// Translations along every frame direction together with (A_h, 0) and
/// (B_{h,k}, 0), embedded in se(N), then closed.
inline MatrixSubspace algebraic_affine_algebra(const CarnotModel& model, double rank_tol = 1e-8) {
  const int N = model.dim();
  std::vector<Matrix> seed;
  for (int a = 0; a < N; ++a) seed.push_back(se_embed(SkewOperator::Zero(N, N), model.unit(a)));
  for (const SkewOperator& g : make_generators(model).basis()) {
    seed.push_back(se_embed(g, Vector::Zero(N)));
  }
  return bracket_closure(seed, rank_tol);
}

// ---------------------------------------------------------------------------
// Numeric route

enum class LoopKind { horizontal, full };

struct SampledLoop {
  LoopSpec loop;
  TransportResult transport;
  double distance = 0.0;  // ||P - I||_2
};

namespace detail {

inline std::mt19937_64 loop_rng(std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace detail

/// One random closed loop at the identity whose transport satisfies
/// ||P - I||_2 ~ amplitude (and always < 1). Horizontal loops are closed with
/// rectangles; full loops with a single vertical segment.
inline SampledLoop sample_loop(const ConnectionTable& table, LoopKind kind, std::uint64_t seed,
                               int index, double amplitude, int segments) {
  const CarnotModel& model = table.model();
  std::mt19937_64 rng = detail::loop_rng(seed, index);
  std::normal_distribution<double> gauss;
  const int active = kind == LoopKind::horizontal ? model.m() : model.dim();
  std::vector<Vector> dirs;
  for (int s = 0; s < segments; ++s) {
    Vector u = model.zero();
    for (int a = 0; a < active; ++a) u(a) = gauss(rng);
    dirs.push_back(std::move(u));
  }

  auto build = [&](double scale) {
    Path prefix;
    for (const Vector& d : dirs) {
      if (!d.isZero(0.0)) prefix.push_back(ControlSegment::make(model, scale * d, 1.0));
    }
    return kind == LoopKind::horizontal ? close_loop(model, prefix)
                                        : close_loop_vertical(model, prefix);
  };
  auto run = [&](double scale) {
    SampledLoop out;
    out.loop = build(scale);
    out.transport = transport_loop(table, out.loop);
    out.distance = spectral_distance_to_identity(out.transport.rotation);
    return out;
  };

  double scale = 1.0 / std::sqrt(static_cast<double>(std::max(segments, 1)));
  SampledLoop cur = run(scale);
  for (int it = 0; it < 6 && cur.distance > 0.0; ++it) {
    const double factor = std::clamp(std::sqrt(amplitude / cur.distance), 0.25, 4.0);
    scale *= factor;
    cur = run(scale);
  }
  while (cur.distance >= 1.0) {
    scale *= 0.5;
    cur = run(scale);
  }
  return cur;
}

inline std::vector<SampledLoop> sample_loops(const ConnectionTable& table, LoopKind kind,
                                             const HolonomyOptions& opt, int count) {
  std::vector<SampledLoop> out(static_cast<std::size_t>(std::max(count, 0)));
  detail::parallel_for(count, opt.threads, [&](int i) {
    out[static_cast<std::size_t>(i)] =
        sample_loop(table, kind, opt.seed, i, opt.amplitude, opt.segments_per_loop);
  });
  return out;
}

/// Affine holonomy element of a loop rolled from (x0, 0; I): translation is
/// the development endpoint, rotation is A(1) = P_1^0.
inline SEElement affine_element(const TransportResult& tr) {
  return {tr.rotation.transpose(), tr.translation};
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

inline HolonomyReport report_header(const CarnotModel& model, Mode mode, Method method,
                                    const HolonomyOptions& opt) {
  HolonomyReport r;
  r.m = model.m();
  r.n = model.n();
  r.N = model.dim();
  r.mode = mode;
  r.method = method;
  r.expected_dim = expected_dimension(model, mode);
  r.amplitude = opt.amplitude;
  r.tol = opt.tol;
  r.rng_seed = opt.seed;
  return r;
}

inline int loop_count(const HolonomyOptions& opt, int expected) {
  return opt.loops >= 0 ? opt.loops : 4 * expected;
}

// Fills dims, spectrum and containment from the computed algebras.
inline void finish_report(HolonomyReport& r, const std::optional<MatrixSubspace>& alg,
                          const std::optional<MatrixSubspace>& num,
                          const std::vector<Matrix>& samples, const MatrixSubspace& reference) {
  r.rank_gap = std::numeric_limits<double>::infinity();
  if (alg) {
    r.algebraic_dim = alg->dim();
    r.rank_gap = std::min(r.rank_gap, alg->rank_gap);
  }
  if (num) {
    r.numeric_dim = num->dim();
    r.rank_gap = std::min(r.rank_gap, num->rank_gap);
  }
  r.dim_estimate = num ? num->dim() : (alg ? alg->dim() : 0);
  const MatrixSubspace* spectrum = num ? &*num : (alg ? &*alg : nullptr);
  if (spectrum) r.singular_values = spectrum->singular_values;
  r.containment_residual = 0.0;
  for (const Matrix& x : samples) {
    r.containment_residual = std::max(r.containment_residual, reference.residual(x));
  }
}

inline bool wants_algebraic(Method m) { return m != Method::numeric; }
inline bool wants_numeric(Method m) { return m != Method::algebraic; }

}  // namespace detail

inline HolonomyReport full_holonomy(const CarnotModel& model, Method method,
                                    const HolonomyOptions& opt = {}) {
  detail::Timer timer;
  HolonomyReport r = detail::report_header(model, Mode::full, method, opt);
  const ConnectionTable table = nabla_table(model);

  std::optional<MatrixSubspace> alg;
  AlgebraicResult ar = algebraic_full_algebra(model, opt.rank_tol);
  r.nabla_fallback = ar.nabla_fallback;
  const MatrixSubspace reference = ar.algebra;
  if (detail::wants_algebraic(method)) alg = std::move(ar.algebra);

  std::optional<MatrixSubspace> num;
  std::vector<Matrix> logs;
  if (detail::wants_numeric(method)) {
    const int count = detail::loop_count(opt, r.expected_dim);
    for (const SampledLoop& s : sample_loops(table, LoopKind::full, opt, count)) {
      logs.push_back(log_rotation(s.transport.rotation));
    }
    r.loops_used = count;
    num = logs.empty() ? MatrixSubspace{} : bracket_closure(logs, opt.rank_tol);
  }
  detail::finish_report(r, alg, num, logs, reference);
  r.elapsed_s = timer.seconds();
  return r;
}

inline HolonomyReport horizontal_holonomy(const CarnotModel& model, Method method,
                                          const HolonomyOptions& opt = {}) {
  detail::Timer timer;
  HolonomyReport r = detail::report_header(model, Mode::horizontal, method, opt);
  const ConnectionTable table = nabla_table(model);
  const MatrixSubspace reference = span_of(make_generators(model).basis(), opt.rank_tol);

  std::optional<MatrixSubspace> alg;
  if (detail::wants_algebraic(method)) alg = algebraic_horizontal_algebra(model, opt.rank_tol);

  std::optional<MatrixSubspace> num;
  std::vector<Matrix> logs;
  if (detail::wants_numeric(method)) {
    const int count = detail::loop_count(opt, r.expected_dim);
    for (const SampledLoop& s : sample_loops(table, LoopKind::horizontal, opt, count)) {
      logs.push_back(log_rotation(s.transport.rotation));
    }
    r.loops_used = count;
    num = logs.empty() ? MatrixSubspace{} : bracket_closure(logs, opt.rank_tol);
  }
  detail::finish_report(r, alg, num, logs, reference);
  r.elapsed_s = timer.seconds();
  return r;
}

inline HolonomyReport affine_horizontal_holonomy(const CarnotModel& model,
                                                 Method method = Method::numeric,
                                                 const HolonomyOptions& opt = {}) {
  detail::Timer timer;
  HolonomyReport r = detail::report_header(model, Mode::affine_horizontal, method, opt);
  const ConnectionTable table = nabla_table(model);
  MatrixSubspace reference = algebraic_affine_algebra(model, opt.rank_tol);

  std::optional<MatrixSubspace> alg;
  if (detail::wants_algebraic(method)) alg = reference;

  std::optional<MatrixSubspace> num;
  std::vector<Matrix> logs;
  if (detail::wants_numeric(method)) {
    const int count = detail::loop_count(opt, r.expected_dim);
    for (const SampledLoop& s : sample_loops(table, LoopKind::horizontal, opt, count)) {
      const auto [omega, v] = log_se(affine_element(s.transport));
      logs.push_back(se_embed(omega, v));
    }
    r.loops_used = count;
    num = logs.empty() ? MatrixSubspace{} : bracket_closure(logs, opt.rank_tol);
  }
  detail::finish_report(r, alg, num, logs, reference);
  r.elapsed_s = timer.seconds();
  return r;
}

inline HolonomyReport holonomy(const CarnotModel& model, Mode mode, Method method,
                               const HolonomyOptions& opt = {}) {
  switch (mode) {
    case Mode::full: return full_holonomy(model, method, opt);
    case Mode::horizontal: return horizontal_holonomy(model, method, opt);
    case Mode::affine_horizontal: return affine_horizontal_holonomy(model, method, opt);
  }
  throw std::invalid_argument("holonomy: unknown mode");
}

/// Strict inclusion of horizontal holonomy in full holonomy.
inline bool strictness(const HolonomyReport& full, const HolonomyReport& horizontal) {
  return horizontal.dim_estimate < full.dim_estimate;
}

inline bool strictness(const CarnotModel& model, const HolonomyOptions& opt = {}) {
  return strictness(full_holonomy(model, Method::algebraic, opt),
                    horizontal_holonomy(model, Method::algebraic, opt));
}

// ---------------------------------------------------------------------------
// Flatness

enum class Distribution { horizontal, vertical, full };

inline const char* to_string(Distribution d) {
  switch (d) {
    case Distribution::horizontal: return "horizontal";
    case Distribution::vertical: return "vertical";
    case Distribution::full: return "full";
  }
  return "?";
}

struct FlatnessReport {
  Distribution distribution = Distribution::full;
  bool involutive = false;
  bool torsion_free = false;
  bool curvature_free = false;
  double max_torsion = 0.0;
  double max_curvature = 0.0;
  bool flat() const { return involutive && torsion_free && curvature_free; }
};

inline std::vector<int> distribution_slots(const CarnotModel& model, Distribution d) {
  std::vector<int> slots;
  const int lo = d == Distribution::vertical ? model.m() : 0;
  const int hi = d == Distribution::horizontal ? model.m() : model.dim();
  for (int s = lo; s < hi; ++s) slots.push_back(s);
  return slots;
}

/// Delta-horizontal flatness: Delta involutive, and torsion and curvature
/// vanish on pairs of vectors in Delta.
inline FlatnessReport flatness_check(const CarnotModel& model, Distribution dist,
                                     double tol = 1e-12) {
  const ConnectionTable table = nabla_table(model);
  const std::vector<int> slots = distribution_slots(model, dist);
  std::vector<bool> inside(static_cast<std::size_t>(model.dim()), false);
  for (int s : slots) inside[static_cast<std::size_t>(s)] = true;

  FlatnessReport rep;
  rep.distribution = dist;
  rep.involutive = true;
  for (int a : slots) {
    for (int b : slots) {
      const FrameVector br = frame_bracket(model, a, b);
      for (int c = 0; c < model.dim(); ++c) {
        if (!inside[static_cast<std::size_t>(c)] && std::abs(br(c)) > tol) rep.involutive = false;
      }
      rep.max_torsion =
          std::max(rep.max_torsion, torsion(table, model.unit(a), model.unit(b)).cwiseAbs().maxCoeff());
      rep.max_curvature =
          std::max(rep.max_curvature, curvature_closed(model, a, b).cwiseAbs().maxCoeff());
    }
  }
  rep.torsion_free = rep.max_torsion <= tol;
  rep.curvature_free = rep.max_curvature <= tol;
  return rep;
}

}  // namespace carnot
