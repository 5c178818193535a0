// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PURCELLKIT_NETLIST_HPP
#define PURCELLKIT_NETLIST_HPP

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace purcellkit::netlist
{

inline constexpr std::string_view GROUND = "0";

enum class ElementKind
{
  Resistor,
  Inductor,
  Capacitor,
  MutualCoupling,
  TransmissionLine,
  Port,
  AdmittanceInverter
};

// Leading id letter for each kind (R, L, C, K, T, P, J).
char KindLetter(ElementKind kind);
std::optional<ElementKind> KindFromLetter(char letter);

// Line length given physically: meters plus effective permittivity.
struct PhysicalLength
{
  double length_m = 0.0;
  double eps_eff = 1.0;
  bool operator==(const PhysicalLength &) const = default;
};

// Line length given electrically: degrees at a reference frequency.
struct ElectricalLength
{
  double ref_freq_hz = 0.0;
  double degrees = 0.0;
  bool operator==(const ElectricalLength &) const = default;
};

using LineLength = std::variant<PhysicalLength, ElectricalLength>;

// Electrical length in radians of a line at frequency f.
double LineAngle(const LineLength &len, double f_hz);

// One circuit element. Field use by kind:
//   R, L, C     nodes[0..1], value in ohm / henry / farad
//   J           nodes[0..1], value = inverter admittance in siemens (both sides ground referenced)
//   K           coupled = the two inductor ids, value = coupling coefficient k
//   T           nodes = {p1+, p1-, p2+, p2-}, value = Z0 in ohm, length
//   P           nodes = {+, -}, value = reference impedance in ohm, port_index (1-based)
struct Element
{
  ElementKind kind = ElementKind::Resistor;
  std::string id;
  std::vector<std::string> nodes;
  double value = 0.0;
  std::array<std::string, 2> coupled;
  LineLength length = PhysicalLength{};
  int port_index = 0;

  bool operator==(const Element &) const = default;
};

Element MakeResistor(std::string id, std::string a, std::string b, double ohms);
Element MakeInductor(std::string id, std::string a, std::string b, double henries);
Element MakeCapacitor(std::string id, std::string a, std::string b, double farads);
Element MakeInverter(std::string id, std::string a, std::string b, double siemens);
Element MakeCoupling(std::string id, std::string l1, std::string l2, double k);
Element MakeLine(std::string id, std::string p1, std::string p1_ref, std::string p2,
                 std::string p2_ref, double z0, LineLength length);
Element MakePort(std::string id, std::string plus, std::string minus, double z0, int index);

struct Netlist
{
  std::string title;
  std::vector<Element> elements;

  // Every node name referenced by an element, ground included when present, in order of
  // first appearance.
  std::vector<std::string> Nodes() const;

  // Port elements ordered by port index.
  std::vector<const Element *> Ports() const;

  const Element *Find(std::string_view id) const;

  bool operator==(const Netlist &) const = default;
};

struct Diagnostic
{
  std::string element_id;  // empty for node-level findings
  std::string message;
};

// Checks every structural invariant. Empty result means the netlist is valid.
std::vector<Diagnostic> ValidateNetlist(const Netlist &n);

// Throws InputError with a line number on grammar violations or failed validation.
Netlist ParseNetlist(std::string_view text);

// Canonical text; ParseNetlist(SerializeNetlist(n)) == n for valid n.
std::string SerializeNetlist(const Netlist &n);

Netlist ReadNetlistFile(const std::string &path);
void WriteNetlistFile(const Netlist &n, const std::string &path);

}  // namespace purcellkit::netlist

#endif  // PURCELLKIT_NETLIST_HPP
