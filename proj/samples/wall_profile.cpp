// Builds both kinds of wall at beta = 2 and prints a few numbers from each.

#include <cstdio>

#include "bpswall/diagnostics.hpp"

int main() {
  using namespace bpswall;
  ModelParams params;
  params.beta = 2.0;

  const ShootingOutcome shot = find_critical_slope(1.0, params);
  std::printf("critical slope %.12f (first integral gives %.12f)\n", shot.b_star, shot.oracle_slope);

  const WallProfile wall = solve_higgs_to_magnetic(1.0, params);
  const DiagnosticsReport rep = diagnose(wall, shot);
  std::printf("higgs-magnetic: %zu nodes on [%g, %g], u(x_min) = %.3e, lambda_left = %.4f, c_right = %.6f\n",
              rep.nodes, rep.x_min, rep.x_max, wall.u.front(), *rep.tails->lambda_left, rep.tails->c_right);

  const FieldProfile fields = reconstruct(wall);
  std::printf("far right: F12 = %.6f, H = %.6f (normal phase H = %.6f)\n", fields.F12.back(), fields.H.back(),
              far_field_energy_density(params.beta));

  const WallProfile bump = solve_magnetic_to_magnetic(-1.0, params);
  const DiagnosticsReport bump_rep = diagnose(bump);
  std::printf("magnetic-magnetic: symmetry %.1e, first integral %.1e, %s\n", *bump_rep.symmetry,
              bump_rep.first_integral, bump_rep.pass ? "all gates pass" : "gate failure");
  return rep.pass && bump_rep.pass ? 0 : 1;
}
