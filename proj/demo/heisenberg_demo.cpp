// Parallel transport around a horizontal square in the Heisenberg group
// (m = 2) and in the m = 3 group, and the dimensions of the resulting
// holonomy algebras.

#include "carnot_holonomy/carnot.hpp"
#include "carnot_holonomy/connection.hpp"
#include "carnot_holonomy/holonomy.hpp"
#include "carnot_holonomy/liealg.hpp"
#include "carnot_holonomy/transport.hpp"

#include <iostream>

int main() {
  using namespace carnot;

  const CarnotModel heis(2);
  const ConnectionTable table = nabla_table(heis);

  // X_1, X_2, -X_1, -X_2: ends above the identity, then one rectangle closes it.
  Path square;
  for (auto [slot, sign] : {std::pair{0, 1.0}, {1, 1.0}, {0, -1.0}, {1, -1.0}}) {
    square.push_back(ControlSegment::axis(heis, slot, sign, 0.5));
  }
  std::cout << "open square ends at gamma_21 = "
            << path_endpoint(heis, GroupPoint::identity(heis), square).gamma(0) << '\n';

  const LoopSpec loop = close_loop(heis, square);
  std::cout << "closed with " << loop.segments.size() - square.size()
            << " extra segments, residual "
            << closure_residual(heis, loop.base, loop.segments) << '\n';

  const TransportResult tr = transport_loop(table, loop);
  std::cout << "holonomy rotation:\n" << tr.rotation << "\n";
  std::cout << "development endpoint: " << tr.translation.transpose() << "\n";

  const MatrixSubspace L = span_of(make_generators(heis).basis());
  std::cout << "log lies in span{A_h, B_hk} up to " << L.residual(log_rotation(tr.rotation))
            << "\n\n";

  for (int m : {2, 3}) {
    const CarnotModel model(m);
    const HolonomyReport full = full_holonomy(model, Method::algebraic);
    const HolonomyReport hor = horizontal_holonomy(model, Method::both);
    std::cout << "m=" << m << "  N=" << model.dim() << "  dim full=" << full.dim_estimate
              << "  dim horizontal=" << hor.dim_estimate
              << "  strict=" << (strictness(full, hor) ? "yes" : "no") << '\n';
  }
  return 0;
}
