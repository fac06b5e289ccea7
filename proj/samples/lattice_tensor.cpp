// Network conductivity of a cubic lattice of balls for growing radii.
#include <fmt/format.h>

#include "netapprox/netapprox.hpp"

int main() {
  using namespace netapprox;
  const double N = 10.0, delta = 0.5;
  for (double radius : {0.3, 0.4, 0.45}) {
    LatticeParams p;
    p.radius = radius;
    const auto config = generate_lattice_jitter(0, N, p);
    const auto graph = box_graph(config, delta);
    const auto t = network_effective_tensor(graph, delta);
    fmt::print("r = {:.2f}: {} inclusions, {} gaps, density {:.4f}, A = diag({:.6f}, {:.6f}, {:.6f}), max |off| {:.2e}\n",
               radius, graph.nodes.size(), graph.edges.size(), density_estimate(config), t.A(0, 0), t.A(1, 1),
               t.A(2, 2), std::max({std::abs(t.A(0, 1)), std::abs(t.A(0, 2)), std::abs(t.A(1, 2))}));
  }
}
