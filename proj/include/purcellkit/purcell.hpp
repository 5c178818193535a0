// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PURCELLKIT_PURCELL_HPP
#define PURCELLKIT_PURCELL_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>
#include "purcellkit/netlist.hpp"
#include "purcellkit/network.hpp"
#include "purcellkit/synthesis.hpp"

namespace purcellkit::purcell
{

// Rates and couplings are given divided by 2 pi, in Hz.

struct DispersiveResult
{
  double rate = 0.0;  // 1/s
  double t1 = 0.0;    // s, +inf when the rate is zero
};

// Gamma = 2 pi kappa (g / delta)^2. Throws InputError for delta = 0.
DispersiveResult DispersivePurcellRate(double kappa_hz, double g_hz, double delta_hz);

// C_sigma = e^2 / (2 h E_c).
double QubitCapacitance(double ec_hz);

// Exactly one of ec_hz and c_sigma_f is required; both are accepted when consistent.
struct QubitParams
{
  std::optional<double> ec_hz;
  std::optional<double> c_sigma_f;
  double g_hz = 0.0;

  double CSigma() const;
};

// T1 = C_sigma / Re Y(f) at `qubit_port`. A point is nullopt where the solve failed and +inf
// where Re Y < 1e-18 S.
using T1Sweep = network::FrequencySweep<double>;

inline constexpr double UNBOUNDED_RE_Y = 1.0e-18;

T1Sweep T1Purcell(const netlist::Netlist &n, int qubit_port, double c_sigma_f,
                  std::span<const double> grid);

struct FomPoint
{
  double delta_hz = 0.0;
  std::optional<double> fom;  // empty when flagged
  bool flagged = false;       // unbounded denominator or failed solve
};

// Ratio of lifetimes with and without the filter, indexed by delta = f - f_r.
std::vector<FomPoint> FomCurve(const netlist::Netlist &with_filter,
                               const netlist::Netlist &without_filter, double c_sigma_f,
                               double f_r_hz, std::span<const double> grid, int qubit_port = 1);
std::vector<FomPoint> FomCurve(const T1Sweep &with_filter, const T1Sweep &without_filter,
                               double f_r_hz);

enum class ReadoutVariant
{
  SinglePortBare,       // fig3a
  SinglePortFiltered,   // fig3b
  TwoPortBare,          // fig3c
  TwoPortOutFiltered,   // fig3d
  TwoPortIoFiltered     // fig3e
};

std::string_view VariantName(ReadoutVariant v);
// Accepts "fig3a".."fig3e" or the snake_case variant names.
ReadoutVariant ParseVariant(std::string_view text);
bool HasFilter(ReadoutVariant v);
bool IsTwoPort(ReadoutVariant v);
// The same readout family with every filter removed.
ReadoutVariant BareCounterpart(ReadoutVariant v);

// How the qubit and the feed attach to the readout resonator.
enum class CouplingStyle
{
  Capacitive,  // Cg and Ck capacitors
  Inverter     // ideal J elements with the same coupling strengths at f_r
};

struct ReadoutTopology
{
  ReadoutVariant variant = ReadoutVariant::SinglePortBare;
  double f_r_hz = 7.05e9;
  double kappa_hz = 25.1e6;
  double g_hz = 123.0e6;
  double c_sigma_f = 73.65e-15;
  double c_in_f = 30.0e-15;      // two-port input capacitor, 0 removes it
  double z0 = 50.0;
  double resonator_impedance = 50.0;  // sets the lumped resonator C = pi / (4 w_r Z)
  double line_degrees = 180.0;        // each feed line segment
  std::optional<double> line_ref_hz;  // default: filter f_center, or f_r without a filter
  CouplingStyle coupling = CouplingStyle::Capacitive;
  synthesis::RealizationMode filter_mode = synthesis::RealizationMode::IdealInverter;
};

// Netlist nodes: qubit port P1 at "q" with C_sigma to ground, readout resonator at "r".
// Feed ports are P2 (input) and, for two-port variants, P3 (output). Filter elements are
// renamed with an "F1_"/"F2_" infix (L1 -> LF1_1, node r1 -> F1_r1).
//
//   fig3a  r -CK- f, P2 at f
//   fig3b  r -CK- F1_r1; filter output is P2 (the filter's input coupling is removed)
//   fig3c  P2 -CI- a -T1- t -T2- b, P3 at b, r -CK- t
//   fig3d  as fig3c with the filter between b and P3
//   fig3e  as fig3d with a second filter between P2 and CI
//
// The coupling element to the feed is iterated (at most 5 corrections) against the simulated
// resonator peak and |Z|^2 linewidth until kappa and f_r match; InputError when the required
// coupling capacitor reaches 1 pF, NumericalError when the linewidth ends more than 10% off.
struct ReadoutNetwork
{
  netlist::Netlist netlist;
  double f_r_hz = 0.0;      // simulated
  double kappa_hz = 0.0;    // simulated
  int iterations = 0;
};

ReadoutNetwork BuildReadoutNetwork(const ReadoutTopology &topology,
                                   const std::optional<synthesis::CouplingPlan> &filter = {});

struct ResonatorMeasurement
{
  double f_peak_hz = 0.0;
  double linewidth_hz = 0.0;
};

// Peak and full width at half maximum of |Z|^2 at `node` with the qubit port (P1) left open,
// searched within 5% of `f_guess_hz`.
ResonatorMeasurement MeasureResonator(const network::Circuit &c, const std::string &node,
                                      double f_guess_hz, double linewidth_guess_hz);

// T1 of the single-pole filter model, 1 / (2 pi kappa (g/delta)^2 (f_r / (2 Q_F |delta|))^2),
// per detuning. Throws InputError for a zero detuning or Q_F <= 0.
std::vector<double> SinglePoleReference(double q_f, double f_r_hz, double kappa_hz, double g_hz,
                                        std::span<const double> deltas_hz);

// floor(bandwidth / (spacing_factor kappa)).
int MultiplexCapacity(double bandwidth_hz, double kappa_hz, double spacing_factor);

}  // namespace purcellkit::purcell

#endif  // PURCELLKIT_PURCELL_HPP
