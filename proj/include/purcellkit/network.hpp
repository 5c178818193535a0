// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PURCELLKIT_NETWORK_HPP
#define PURCELLKIT_NETWORK_HPP

#include <complex>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>
#include <Eigen/Dense>
#include "purcellkit/netlist.hpp"

namespace purcellkit::network
{

using Complex = std::complex<double>;

// Frequencies in Hz, strictly increasing. A value of nullopt marks a point where the solve
// was singular; sweeps keep going past such points.
template <typename T>
struct FrequencySweep
{
  std::vector<double> frequencies;
  std::vector<std::optional<T>> values;

  std::size_t Size() const { return frequencies.size(); }
};

using SParameterSweep = FrequencySweep<Eigen::MatrixXcd>;
using AdmittanceSweep = FrequencySweep<Complex>;

// `points` evenly spaced frequencies covering [fmin, fmax].
std::vector<double> LinearGrid(double fmin, double fmax, std::size_t points);

// Throws InputError unless the grid is nonempty, positive and strictly increasing.
void CheckGrid(std::span<const double> grid);

// Nodal admittance matrix over the non-ground nodes (listed in `nodes`, in order of first
// appearance). Transmission lines enter through their two-port Y-parameters, which blow up
// when sin(theta) = 0; that case is reported as a singular branch.
struct NodalAdmittance
{
  std::vector<std::string> nodes;
  Eigen::MatrixXcd y;
};

NodalAdmittance AssembleAdmittance(const netlist::Netlist &n, double f_hz);

namespace detail
{
struct Stamps;
}

// A netlist compiled for repeated frequency-domain solves. Lines are carried with two branch
// currents each instead of Y-parameters so half-wave multiples stay well posed. Immutable after
// construction; every query is a pure function of its arguments.
class Circuit
{
public:
  explicit Circuit(const netlist::Netlist &n);

  std::size_t NumPorts() const { return ports_.size(); }
  double PortImpedance(int port_index) const;

  // P x P scattering matrix with each port's own reference impedance.
  std::optional<Eigen::MatrixXcd> SParameters(double f_hz) const;

  // Admittance looking into `port_index` with every other port terminated in its reference
  // impedance and this port's own termination removed.
  std::optional<Complex> InputAdmittance(int port_index, double f_hz) const;

  // Impedance between `node` and ground for a unit current injected at `node`. Ports listed
  // in `open_ports` are left unterminated; all others are terminated.
  std::optional<Complex> DrivingPointImpedance(const std::string &node, double f_hz,
                                               std::span<const int> open_ports = {}) const;

  // Full modified-nodal system (node voltages followed by line branch currents) without port
  // terminations. Exposed for tests.
  Eigen::MatrixXcd SystemMatrix(double f_hz) const;
  std::size_t NumNodes() const { return node_names_.size(); }
  const std::vector<std::string> &NodeNames() const { return node_names_; }

private:
  struct TwoTerminal
  {
    int a, b;
    double value;
  };
  struct CoupledGroup
  {
    std::vector<std::pair<int, int>> terminals;
    Eigen::MatrixXd inverse_inductance;
  };
  struct Line
  {
    int a1, b1, a2, b2;
    double z0;
    netlist::LineLength length;
  };
  struct PortTerm
  {
    int plus, minus;
    double z0;
    int index;
  };

  detail::Stamps Assemble(double f_hz, std::span<const int> unterminated) const;
  const PortTerm &FindPort(int port_index) const;

  std::vector<std::string> node_names_;
  std::vector<TwoTerminal> resistors_, capacitors_, inverters_;
  std::vector<CoupledGroup> inductor_groups_;
  std::vector<Line> lines_;
  std::vector<PortTerm> ports_;
};

SParameterSweep SParameters(const netlist::Netlist &n, std::span<const double> grid);
AdmittanceSweep InputAdmittance(const netlist::Netlist &n, int port_index,
                                std::span<const double> grid);

// |S_out,in| in dB from an S-matrix (ports 1-based).
double TransmissionDb(const Eigen::MatrixXcd &s, int out_port = 2, int in_port = 1);

// Passband summary of a transmission response.
//
// The 3 dB edges are the crossings of (peak - 3 dB) nearest the global maximum; f_center is
// their midpoint. Ripple is measured between the interior local extrema of the response (the
// monotone skirts between the outermost extremum and the 3 dB edges do not count). The
// equiripple band runs between the outer crossings of the deepest interior valley level.
struct BandReport
{
  double f_center = 0.0;
  double bandwidth_3db = 0.0;
  double lower_3db = 0.0;
  double upper_3db = 0.0;
  double ripple_db = 0.0;
  double insertion_loss_min_db = 0.0;
  double lower_ripple = 0.0;
  double upper_ripple = 0.0;
  double bandwidth_ripple = 0.0;
  double peak_db = 0.0;
};

// Optional callback returning |S21| in dB at an arbitrary frequency. When provided, band
// edges are located by bisection to 1e-9 relative tolerance and extrema by golden-section
// search; otherwise edges are interpolated linearly in dB between grid points.
using ResponseProbe = std::function<double(double)>;

BandReport BandMetrics(std::span<const double> frequencies,
                       std::span<const std::optional<double>> s21_db,
                       const ResponseProbe &probe = {});

BandReport BandMetrics(const SParameterSweep &sweep, int out_port = 2, int in_port = 1,
                       const ResponseProbe &probe = {});

// Sweeps the circuit on `grid` and refines with direct solves.
BandReport BandMetrics(const Circuit &circuit, std::span<const double> grid, int out_port = 2,
                       int in_port = 1);

// Touchstone v1, two ports, RI format, one header line and one line per valid frequency.
void WriteTouchstone(const SParameterSweep &sweep, double z_ref, std::ostream &out);
void WriteTouchstone(const SParameterSweep &sweep, double z_ref, const std::string &path);

// CSV: freq_hz,s11_db,s21_db,s11_deg,s21_deg (failed points written as nan).
void WriteSParameterCsv(const SParameterSweep &sweep, std::ostream &out);
// CSV: freq_hz,re,im.
void WriteAdmittanceCsv(const AdmittanceSweep &sweep, std::ostream &out);

}  // namespace purcellkit::network

#endif  // PURCELLKIT_NETWORK_HPP
