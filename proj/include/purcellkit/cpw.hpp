// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PURCELLKIT_CPW_HPP
#define PURCELLKIT_CPW_HPP

#include <limits>

namespace purcellkit::cpw
{

// Complete elliptic integral of the first kind K(k), modulus k in [0, 1), by the
// arithmetic-geometric mean.
double EllipticK(double k);

struct CpwGeometry
{
  double w = 10.0e-6;  // center strip width
  double s = 6.0e-6;   // gap to ground
  double t = 200.0e-9; // film thickness (not used by the conformal map)
  double eps_r = 11.45;
  double substrate_h = std::numeric_limits<double>::infinity();
};

struct LineParams
{
  double z0 = 0.0;
  double eps_eff = 0.0;  // geometric
  double l_per_m = 0.0;  // geometric + kinetic
  double c_per_m = 0.0;
  double phase_velocity = 0.0;
};

// Quasi-static conformal-mapping parameters. `lk_per_sq` adds lk_per_sq / w of kinetic
// inductance per unit length.
LineParams CpwLineParams(const CpwGeometry &g, double lk_per_sq = 0.0);

enum class ResonatorMode
{
  HalfWave,
  QuarterWave
};

double ResonatorLength(double f_hz, ResonatorMode mode, const LineParams &p);

}  // namespace purcellkit::cpw

#endif  // PURCELLKIT_CPW_HPP
