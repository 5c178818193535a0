// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#include "purcellkit/cpw.hpp"

#include <cmath>
#include "purcellkit/error.hpp"
#include "purcellkit/units.hpp"

namespace purcellkit::cpw
{

namespace
{

// K(k') / K(k).
double ModulusRatio(double k)
{
  const double kp = std::sqrt((1.0 - k) * (1.0 + k));
  return EllipticK(kp) / EllipticK(k);
}

}  // namespace

double EllipticK(double k)
{
  if (!(k >= 0.0 && k < 1.0))
  {
    throw InputError("elliptic modulus must lie in [0, 1)");
  }
  double a = 1.0;
  double b = std::sqrt((1.0 - k) * (1.0 + k));
  for (int it = 0; it < 64 && std::abs(a - b) > 1.0e-15 * a; ++it)
  {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return constants::pi / (2.0 * a);
}

LineParams CpwLineParams(const CpwGeometry &g, double lk_per_sq)
{
  if (!(g.w > 0.0) || !(g.t > 0.0) || !(g.eps_r > 1.0) || !(g.substrate_h > 0.0))
  {
    throw InputError("CPW needs w, t > 0 and eps_r > 1");
  }
  if (!(g.s > 0.0))
  {
    throw InputError("CPW gap must be positive");
  }
  if (!(lk_per_sq >= 0.0))
  {
    throw InputError("kinetic inductance must be non-negative");
  }
  const double k = g.w / (g.w + 2.0 * g.s);
  double eps_eff = 0.5 * (g.eps_r + 1.0);
  if (std::isfinite(g.substrate_h))
  {
    const double q = constants::pi / (4.0 * g.substrate_h);
    const double k1 = std::sinh(q * g.w) / std::sinh(q * (g.w + 2.0 * g.s));
    eps_eff = 1.0 + 0.5 * (g.eps_r - 1.0) * ModulusRatio(k) / ModulusRatio(k1);
  }
  LineParams p;
  p.eps_eff = eps_eff;
  const double z_geo = 30.0 * constants::pi / std::sqrt(eps_eff) * ModulusRatio(k);
  p.c_per_m = std::sqrt(eps_eff) / (constants::c0 * z_geo);
  p.l_per_m = z_geo * std::sqrt(eps_eff) / constants::c0 + lk_per_sq / g.w;
  p.z0 = std::sqrt(p.l_per_m / p.c_per_m);
  p.phase_velocity = 1.0 / std::sqrt(p.l_per_m * p.c_per_m);
  return p;
}

double ResonatorLength(double f_hz, ResonatorMode mode, const LineParams &p)
{
  if (!(f_hz > 0.0) || !(p.phase_velocity > 0.0))
  {
    throw InputError("resonator sizing needs positive frequency and phase velocity");
  }
  return p.phase_velocity / ((mode == ResonatorMode::HalfWave ? 2.0 : 4.0) * f_hz);
}

}  // namespace purcellkit::cpw
