// Two unit-volume inclusions joined by one gap of weight 2.
#include <fmt/format.h>

#include "netapprox/netapprox.hpp"

int main() {
  using namespace netapprox;
  InclusionGraph g;
  g.N = 1.0;
  for (std::uint32_t i = 0; i < 2; ++i) {
    Node n;
    n.id = i;
    n.volume = 1.0;
    g.nodes.push_back(n);
  }
  Edge e;
  e.a = 0;
  e.b = 1;
  e.mu = 2.0;
  g.edges.push_back(e);

  auto b = BoundaryFamily::zeros(1);
  b.forward[0] = 1.0;
  const auto r = minimize_energy(g, b);
  fmt::print("u* = ({:.6f}, {:.6f})\n", r.u[0], r.u[1]);
  fmt::print("E* = {:.12f}  (gap {:.12f}, mass {:.12f})\n", r.energy.total, r.energy.gap, r.energy.mass);
  fmt::print("h2 ratio (s = 2) = {:.12f}\n", h2_ratio(g, b, 2.0));

  H2Options opts;
  opts.s = 2.0;
  const auto h2 = h2_statistic(g, opts);
  fmt::print("sup over families: ascent {:.12f}, exact {:.12f}\n", h2.ascent_value, *h2.exact);
}
