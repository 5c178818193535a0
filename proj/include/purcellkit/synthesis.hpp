// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PURCELLKIT_SYNTHESIS_HPP
#define PURCELLKIT_SYNTHESIS_HPP

#include <string>
#include <string_view>
#include <vector>
#include "purcellkit/netlist.hpp"
#include "purcellkit/network.hpp"

namespace purcellkit::synthesis
{

// Bandpass design targets. `bandwidth_hz` is the equiripple bandwidth.
struct FilterSpec
{
  int poles = 4;
  double f_center_hz = 0.0;
  double bandwidth_hz = 0.0;
  double ripple_db = 0.5;
  double port_impedance = 50.0;

  double FractionalBandwidth() const { return bandwidth_hz / f_center_hz; }

  // Throws InputError on N < 1, nonpositive values or FBW outside (0, 0.5).
  void Validate() const;
};

struct Resonator
{
  double l_h = 0.0;
  double c_f = 0.0;
};

struct CouplingPlan
{
  int poles = 0;
  double f_center_hz = 0.0;
  double bandwidth_hz = 0.0;
  double ripple_db = 0.0;
  std::vector<double> g;      // g_0 .. g_{N+1}
  std::vector<double> k_adj;  // k_{i,i+1}, i = 1..N-1
  double qe_in = 0.0;
  double qe_out = 0.0;
  std::vector<Resonator> resonators;
};

// Lowpass Chebyshev prototype values g_0 .. g_{N+1}.
std::vector<double> ChebyshevPrototype(int poles, double ripple_db);

// Narrowband coupled-resonator relations; every resonator uses `resonator_inductance`.
CouplingPlan PlanCoupling(const FilterSpec &spec, double resonator_inductance = 2.0e-9);

enum class RealizationMode
{
  IdealInverter,
  MutualInductive
};

// Netlist for a plan. Nodes: port 1 at "in", port 2 at "out", resonators at "r1".."rN".
//
// IdealInverter: shunt L_i || C_i resonators joined by J inverters J_{i,i+1} = k sqrt(b_i b_j)
// (b = w0 C), ports attached through inverters sized from Qe.
//
// MutualInductive: shunt resonators whose grounded inductors are coupled by K elements between
// neighbours only. The K values are iterated so the normalized inverse-inductance couplings
// equal k_adj, and each capacitor is retuned to the loaded inductance. Ports attach through
// series inductors LIN/LOUT sized so the external Q at f_center equals Qe; the small detuning
// they cause is cancelled in the end capacitors.
//
// Throws InputError("unrealizable coupling between resonators i,j") when a required k >= 1.
netlist::Netlist RealizeFilter(const CouplingPlan &plan, RealizationMode mode,
                               double port_impedance = 50.0);

// Series inductance that loads a resonator with susceptance slope parameter `b` (siemens) at
// angular frequency w0 to external quality factor `qe` through port impedance z0. Returns the
// inductance and the shunt capacitance that cancels its reactive loading.
struct SeriesCoupling
{
  double inductance = 0.0;
  double compensation_c = 0.0;
};
SeriesCoupling SizeCouplingInductor(double b, double w0, double qe, double z0);

// Closed-form Chebyshev insertion loss in dB.
double ChebyshevAttenuation(const FilterSpec &spec, double f_hz);

// Plan plus realized netlist with its measured passband. The design targets are corrected
// by secant steps (at most 5) until the simulated equiripple band matches the request within
// 0.2% in both geometric center and width. `plan` carries the corrected design values, so
// RealizeFilter(plan, mode) reproduces `netlist`.
struct SynthesisResult
{
  CouplingPlan plan;
  netlist::Netlist netlist;
  network::BandReport band;
  int iterations = 0;
};

SynthesisResult SynthesizeFilter(const FilterSpec &spec, RealizationMode mode,
                                 double resonator_inductance = 2.0e-9);

std::string PlanToJson(const CouplingPlan &plan);
CouplingPlan PlanFromJson(std::string_view text);

}  // namespace purcellkit::synthesis

#endif  // PURCELLKIT_SYNTHESIS_HPP
