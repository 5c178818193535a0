// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PURCELLKIT_MATERIALS_HPP
#define PURCELLKIT_MATERIALS_HPP

#include <string>
#include <string_view>

namespace purcellkit::materials
{

// Normal-state conductivity that puts the default niobium film at lambda_eff = 142 nm
// (4.3 K, 7 GHz). Produced by CalibrateSigmaN; a unit test keeps it in sync.
inline constexpr double NIOBIUM_SIGMA_N = 6.5448905e6;

struct SuperconductorModel
{
  double tc_k = 9.2;
  double gap_ratio = 1.764;  // Delta_0 / (kB Tc)
  double sigma_n = NIOBIUM_SIGMA_N;
  double thickness_m = 200.0e-9;
  double temperature_k = 4.3;
};

struct Gap
{
  double energy_j = 0.0;
  bool normal_state = false;
};

// Delta(T) = Delta_0 tanh(1.74 sqrt(Tc/T - 1)); zero with normal_state set for T >= Tc.
Gap GapEnergy(const SuperconductorModel &m);

// sigma / sigma_n = sigma1 - j sigma2.
struct ConductivityRatio
{
  double sigma1 = 0.0;
  double sigma2 = 0.0;
};

// Mattis-Bardeen conductivity ratio below the pair-breaking edge. Throws InputError for
// hbar*w >= 2 Delta or outside 0 <= T < Tc.
ConductivityRatio MbConductivity(double f_hz, const SuperconductorModel &m,
                                 double rel_tol = 1.0e-8);

// Local-limit lambda_eff = sqrt(1 / (mu0 w sigma2)).
double EffectivePenetrationDepth(double f_hz, const SuperconductorModel &m);

// sigma_n in [1e5, 1e9] S/m that gives `target_lambda_m` at f_hz; m.sigma_n is ignored.
double CalibrateSigmaN(double target_lambda_m, double f_hz, const SuperconductorModel &m);

// L_k per square = mu0 lambda coth(t / lambda), in henry.
double SheetKineticInductance(double lambda_m, double thickness_m);

std::string ModelToJson(const SuperconductorModel &m);
SuperconductorModel ModelFromJson(std::string_view text);

}  // namespace purcellkit::materials

#endif  // PURCELLKIT_MATERIALS_HPP
