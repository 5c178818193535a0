// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#include "purcellkit/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include "parallel.hpp"
#include "purcellkit/error.hpp"
#include "purcellkit/units.hpp"

namespace purcellkit::network
{

using netlist::Element;
using netlist::ElementKind;

namespace detail
{

// System matrix plus, per row, the summed magnitude of every stamp that landed in it. The
// latter is the reference for the singularity test, so cancellation shows up as a small pivot.
struct Stamps
{
  Eigen::MatrixXcd m;
  Eigen::VectorXd weight;

  explicit Stamps(Eigen::Index size)
      : m(Eigen::MatrixXcd::Zero(size, size)), weight(Eigen::VectorXd::Zero(size))
  {
  }

  void Add(Eigen::Index r, Eigen::Index c, Complex v)
  {
    if (r >= 0 && c >= 0)
    {
      m(r, c) += v;
      weight(r) += std::abs(v);
    }
  }
};

}  // namespace detail

namespace
{

using detail::Stamps;

constexpr Complex J{0.0, 1.0};

// Smallest LU pivot, relative to the summed stamp magnitude of its row, that still counts as regular.
constexpr double SINGULAR_PIVOT = 1.0e-13;

// Below this |sin(theta)| a line's Y-parameters are reported as a singular branch.
constexpr double SINGULAR_LINE_SIN = 1.0e-9;

void CheckBranchValue(const Element &e)
{
  if (!(std::isfinite(e.value) && e.value > 0.0))
  {
    throw InputError("singular branch (zero-value element) " + e.id);
  }
}

// Adds admittance y between indices a and b (-1 = ground).
void StampBranch(Stamps &st, int a, int b, Complex y)
{
  st.Add(a, a, y);
  st.Add(b, b, y);
  st.Add(a, b, -y);
  st.Add(b, a, -y);
}

// Adds a transfer admittance y from terminal pair (b1+, b1-) to (b2+, b2-).
void StampTransfer(Stamps &st, std::pair<int, int> row, std::pair<int, int> col, Complex y)
{
  st.Add(row.first, col.first, y);
  st.Add(row.first, col.second, -y);
  st.Add(row.second, col.first, -y);
  st.Add(row.second, col.second, y);
}

std::optional<Eigen::MatrixXcd> SolveChecked(Stamps st, Eigen::MatrixXcd b)
{
  Eigen::MatrixXcd &a = st.m;
  if (a.rows() == 0)
  {
    return std::nullopt;
  }
  for (Eigen::Index r = 0; r < a.rows(); ++r)
  {
    const double scale = st.weight(r);
    if (scale == 0.0)
    {
      return std::nullopt;
    }
    a.row(r) /= scale;
    b.row(r) /= scale;
  }
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot > SINGULAR_PIVOT))
  {
    return std::nullopt;
  }
  Eigen::MatrixXcd x = lu.solve(b);
  if (!x.allFinite())
  {
    return std::nullopt;
  }
  return x;
}

Complex Voltage(const Eigen::MatrixXcd &x, int plus, int minus, Eigen::Index col)
{
  Complex v = 0.0;
  if (plus >= 0)
  {
    v += x(plus, col);
  }
  if (minus >= 0)
  {
    v -= x(minus, col);
  }
  return v;
}

// Groups of inductors tied together by K elements, each with its inductance matrix.
struct InductorGroup
{
  std::vector<const Element *> inductors;
  Eigen::MatrixXd inductance;
};

std::vector<InductorGroup> GroupInductors(const netlist::Netlist &n)
{
  std::vector<const Element *> inductors;
  std::map<std::string, std::size_t> index;
  for (const auto &e : n.elements)
  {
    if (e.kind == ElementKind::Inductor)
    {
      CheckBranchValue(e);
      index[e.id] = inductors.size();
      inductors.push_back(&e);
    }
  }
  std::vector<std::size_t> parent(inductors.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](std::size_t i)
  {
    while (parent[i] != i)
    {
      i = parent[i] = parent[parent[i]];
    }
    return i;
  };
  std::vector<const Element *> couplings;
  for (const auto &e : n.elements)
  {
    if (e.kind != ElementKind::MutualCoupling)
    {
      continue;
    }
    auto i = index.find(e.coupled[0]);
    auto j = index.find(e.coupled[1]);
    if (i == index.end() || j == index.end() || i->second == j->second)
    {
      throw InputError("invalid mutual coupling " + e.id);
    }
    if (!(std::isfinite(e.value) && e.value >= 0.0 && e.value < 1.0))
    {
      throw InputError(e.id + ": coupling coefficient out of range");
    }
    parent[root(i->second)] = root(j->second);
    couplings.push_back(&e);
  }

  std::map<std::size_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < inductors.size(); ++i)
  {
    members[root(i)].push_back(i);
  }
  std::vector<InductorGroup> groups;
  std::vector<std::pair<std::size_t, std::size_t>> slot(inductors.size());
  for (const auto &[r, list] : members)
  {
    InductorGroup g;
    g.inductance = Eigen::MatrixXd::Zero(list.size(), list.size());
    for (std::size_t k = 0; k < list.size(); ++k)
    {
      slot[list[k]] = {groups.size(), k};
      g.inductors.push_back(inductors[list[k]]);
      g.inductance(k, k) = inductors[list[k]]->value;
    }
    groups.push_back(std::move(g));
  }
  for (const Element *k : couplings)
  {
    auto [gi, a] = slot[index[k->coupled[0]]];
    auto [gj, b] = slot[index[k->coupled[1]]];
    auto &g = groups[gi];
    const double m = k->value * std::sqrt(g.inductance(a, a) * g.inductance(b, b));
    g.inductance(a, b) += m;
    g.inductance(b, a) += m;
  }
  return groups;
}

}  // namespace

std::vector<double> LinearGrid(double fmin, double fmax, std::size_t points)
{
  if (points == 0 || !(fmin > 0.0) || !(fmax >= fmin) || !std::isfinite(fmax))
  {
    throw InputError("invalid frequency grid");
  }
  if (points == 1)
  {
    return {fmin};
  }
  if (fmax == fmin)
  {
    throw InputError("invalid frequency grid: fmax must exceed fmin for more than one point");
  }
  std::vector<double> grid(points);
  const double step = (fmax - fmin) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i)
  {
    grid[i] = fmin + step * static_cast<double>(i);
  }
  grid.back() = fmax;
  return grid;
}

void CheckGrid(std::span<const double> grid)
{
  if (grid.empty())
  {
    throw InputError("empty frequency grid");
  }
  for (std::size_t i = 0; i < grid.size(); ++i)
  {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i]) || (i > 0 && !(grid[i] > grid[i - 1])))
    {
      throw InputError("frequency grid must be positive and strictly increasing");
    }
  }
}

NodalAdmittance AssembleAdmittance(const netlist::Netlist &n, double f_hz)
{
  if (!(f_hz > 0.0))
  {
    throw InputError("frequency must be positive");
  }
  NodalAdmittance out;
  std::map<std::string, int> index;
  for (const auto &node : n.Nodes())
  {
    if (node != netlist::GROUND)
    {
      index[node] = static_cast<int>(out.nodes.size());
      out.nodes.push_back(node);
    }
  }
  auto idx = [&](const std::string &node) { return node == netlist::GROUND ? -1 : index[node]; };
  const double w = AngularFrequency(f_hz);
  Stamps st(static_cast<Eigen::Index>(out.nodes.size()));

  for (const auto &e : n.elements)
  {
    switch (e.kind)
    {
      case ElementKind::Resistor:
        CheckBranchValue(e);
        StampBranch(st, idx(e.nodes[0]), idx(e.nodes[1]), 1.0 / e.value);
        break;
      case ElementKind::Capacitor:
        CheckBranchValue(e);
        StampBranch(st, idx(e.nodes[0]), idx(e.nodes[1]), J * w * e.value);
        break;
      case ElementKind::AdmittanceInverter:
      {
        CheckBranchValue(e);
        const int a = idx(e.nodes[0]);
        const int b = idx(e.nodes[1]);
        if (a >= 0 && b >= 0)
        {
          st.Add(a, b, J * e.value);
          st.Add(b, a, J * e.value);
        }
        break;
      }
      case ElementKind::TransmissionLine:
      {
        CheckBranchValue(e);
        const double theta = netlist::LineAngle(e.length, f_hz);
        const double s = std::sin(theta);
        if (std::abs(s) < SINGULAR_LINE_SIN)
        {
          throw NumericalError("singular branch " + e.id + ": line is a multiple of a half "
                               "wavelength at this frequency");
        }
        const double y0 = 1.0 / e.value;
        const Complex y11 = -J * y0 * std::cos(theta) / s;
        const Complex y12 = J * y0 / s;
        const std::pair p1{idx(e.nodes[0]), idx(e.nodes[1])};
        const std::pair p2{idx(e.nodes[2]), idx(e.nodes[3])};
        StampTransfer(st, p1, p1, y11);
        StampTransfer(st, p2, p2, y11);
        StampTransfer(st, p1, p2, y12);
        StampTransfer(st, p2, p1, y12);
        break;
      }
      default:
        break;
    }
  }
  for (const auto &g : GroupInductors(n))
  {
    Eigen::LLT<Eigen::MatrixXd> llt(g.inductance);
    if (llt.info() != Eigen::Success)
    {
      throw InputError("non-physical mutual coupling around " + g.inductors.front()->id);
    }
    const Eigen::MatrixXd gamma = llt.solve(Eigen::MatrixXd::Identity(g.inductance.rows(),
                                                                       g.inductance.cols()));
    for (std::size_t i = 0; i < g.inductors.size(); ++i)
    {
      for (std::size_t k = 0; k < g.inductors.size(); ++k)
      {
        const auto *li = g.inductors[i];
        const auto *lk = g.inductors[k];
        StampTransfer(st, {idx(li->nodes[0]), idx(li->nodes[1])},
                      {idx(lk->nodes[0]), idx(lk->nodes[1])}, gamma(i, k) / (J * w));
      }
    }
  }
  out.y = std::move(st.m);
  return out;
}

Circuit::Circuit(const netlist::Netlist &n)
{
  std::map<std::string, int> index;
  for (const auto &node : n.Nodes())
  {
    if (node != netlist::GROUND)
    {
      index[node] = static_cast<int>(node_names_.size());
      node_names_.push_back(node);
    }
  }
  auto idx = [&](const std::string &node) { return node == netlist::GROUND ? -1 : index[node]; };

  for (const auto &e : n.elements)
  {
    switch (e.kind)
    {
      case ElementKind::Resistor:
        CheckBranchValue(e);
        resistors_.push_back({idx(e.nodes[0]), idx(e.nodes[1]), e.value});
        break;
      case ElementKind::Capacitor:
        CheckBranchValue(e);
        capacitors_.push_back({idx(e.nodes[0]), idx(e.nodes[1]), e.value});
        break;
      case ElementKind::AdmittanceInverter:
        CheckBranchValue(e);
        inverters_.push_back({idx(e.nodes[0]), idx(e.nodes[1]), e.value});
        break;
      case ElementKind::TransmissionLine:
        CheckBranchValue(e);
        lines_.push_back({idx(e.nodes[0]), idx(e.nodes[1]), idx(e.nodes[2]), idx(e.nodes[3]),
                          e.value, e.length});
        break;
      case ElementKind::Port:
        CheckBranchValue(e);
        ports_.push_back({idx(e.nodes[0]), idx(e.nodes[1]), e.value, e.port_index});
        break;
      default:
        break;
    }
  }
  std::sort(ports_.begin(), ports_.end(),
            [](const PortTerm &a, const PortTerm &b) { return a.index < b.index; });
  for (std::size_t i = 0; i < ports_.size(); ++i)
  {
    if (ports_[i].index != static_cast<int>(i) + 1)
    {
      throw InputError("port indices must be 1..P without gaps or duplicates");
    }
  }
  if (ports_.empty())
  {
    throw InputError("netlist has no ports");
  }

  for (const auto &g : GroupInductors(n))
  {
    Eigen::LLT<Eigen::MatrixXd> llt(g.inductance);
    if (llt.info() != Eigen::Success)
    {
      throw InputError("non-physical mutual coupling around " + g.inductors.front()->id);
    }
    CoupledGroup cg;
    cg.inverse_inductance = llt.solve(
        Eigen::MatrixXd::Identity(g.inductance.rows(), g.inductance.cols()));
    for (const auto *l : g.inductors)
    {
      cg.terminals.emplace_back(idx(l->nodes[0]), idx(l->nodes[1]));
    }
    inductor_groups_.push_back(std::move(cg));
  }
}

double Circuit::PortImpedance(int port_index) const
{
  return FindPort(port_index).z0;
}

const Circuit::PortTerm &Circuit::FindPort(int port_index) const
{
  if (port_index < 1 || port_index > static_cast<int>(ports_.size()))
  {
    throw InputError("no port with index " + std::to_string(port_index));
  }
  return ports_[port_index - 1];
}

Eigen::MatrixXcd Circuit::SystemMatrix(double f_hz) const
{
  std::vector<int> all(ports_.size());
  std::iota(all.begin(), all.end(), 1);
  return Assemble(f_hz, all).m;
}

detail::Stamps Circuit::Assemble(double f_hz, std::span<const int> unterminated) const
{
  const double w = AngularFrequency(f_hz);
  const auto n_nodes = static_cast<Eigen::Index>(node_names_.size());
  const auto size = n_nodes + 2 * static_cast<Eigen::Index>(lines_.size());
  Stamps st(size);

  for (const auto &r : resistors_)
  {
    StampBranch(st, r.a, r.b, 1.0 / r.value);
  }
  for (const auto &c : capacitors_)
  {
    StampBranch(st, c.a, c.b, J * w * c.value);
  }
  for (const auto &inv : inverters_)
  {
    if (inv.a >= 0 && inv.b >= 0)
    {
      st.Add(inv.a, inv.b, J * inv.value);
      st.Add(inv.b, inv.a, J * inv.value);
    }
  }
  for (const auto &g : inductor_groups_)
  {
    for (std::size_t i = 0; i < g.terminals.size(); ++i)
    {
      for (std::size_t k = 0; k < g.terminals.size(); ++k)
      {
        StampTransfer(st, g.terminals[i], g.terminals[k],
                      g.inverse_inductance(static_cast<Eigen::Index>(i),
                                           static_cast<Eigen::Index>(k)) /
                          (J * w));
      }
    }
  }
  // Line l owns branch currents i1 (into port 1, row n_nodes + 2l) and i2 (into port 2).
  //   V1 - cos(t) V2 + j Z0 sin(t) I2 = 0
  //   Z0 I1 - j sin(t) V2 + Z0 cos(t) I2 = 0
  for (std::size_t l = 0; l < lines_.size(); ++l)
  {
    const auto &line = lines_[l];
    const auto i1 = n_nodes + 2 * static_cast<Eigen::Index>(l);
    const auto i2 = i1 + 1;
    const double theta = netlist::LineAngle(line.length, f_hz);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    auto add = [&](Eigen::Index r, int node, Complex v) { st.Add(r, node, v); };
    auto kcl = [&](int node, Eigen::Index col, double sign) { st.Add(node, col, sign); };
    kcl(line.a1, i1, 1.0);
    kcl(line.b1, i1, -1.0);
    kcl(line.a2, i2, 1.0);
    kcl(line.b2, i2, -1.0);
    add(i1, line.a1, 1.0);
    add(i1, line.b1, -1.0);
    add(i1, line.a2, -c);
    add(i1, line.b2, c);
    st.Add(i1, i2, J * line.z0 * s);
    st.Add(i2, i1, line.z0);
    add(i2, line.a2, -J * s);
    add(i2, line.b2, J * s);
    st.Add(i2, i2, line.z0 * c);
  }
  for (const auto &p : ports_)
  {
    if (std::find(unterminated.begin(), unterminated.end(), p.index) == unterminated.end())
    {
      StampBranch(st, p.plus, p.minus, 1.0 / p.z0);
    }
  }
  return st;
}

std::optional<Eigen::MatrixXcd> Circuit::SParameters(double f_hz) const
{
  const Stamps a = Assemble(f_hz, {});
  const auto n_ports = static_cast<Eigen::Index>(ports_.size());
  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(a.m.rows(), n_ports);
  for (Eigen::Index j = 0; j < n_ports; ++j)
  {
    const auto &p = ports_[j];
    if (p.plus >= 0)
    {
      rhs(p.plus, j) += 1.0 / p.z0;
    }
    if (p.minus >= 0)
    {
      rhs(p.minus, j) -= 1.0 / p.z0;
    }
  }
  auto x = SolveChecked(a, rhs);
  if (!x)
  {
    return std::nullopt;
  }
  Eigen::MatrixXcd s(n_ports, n_ports);
  for (Eigen::Index i = 0; i < n_ports; ++i)
  {
    for (Eigen::Index j = 0; j < n_ports; ++j)
    {
      const Complex v = Voltage(*x, ports_[i].plus, ports_[i].minus, j);
      s(i, j) = 2.0 * v * std::sqrt(ports_[j].z0 / ports_[i].z0) - (i == j ? 1.0 : 0.0);
    }
  }
  return s;
}

std::optional<Complex> Circuit::InputAdmittance(int port_index, double f_hz) const
{
  const auto &p = FindPort(port_index);
  const int open[] = {port_index};
  const Stamps a = Assemble(f_hz, open);
  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(a.m.rows(), 1);
  if (p.plus >= 0)
  {
    rhs(p.plus, 0) = 1.0;
  }
  if (p.minus >= 0)
  {
    rhs(p.minus, 0) = -1.0;
  }
  auto x = SolveChecked(a, rhs);
  if (!x)
  {
    return std::nullopt;
  }
  const Complex z = Voltage(*x, p.plus, p.minus, 0);
  if (z == 0.0)
  {
    return std::nullopt;
  }
  return 1.0 / z;
}

std::optional<Complex> Circuit::DrivingPointImpedance(const std::string &node, double f_hz,
                                                      std::span<const int> open_ports) const
{
  auto it = std::find(node_names_.begin(), node_names_.end(), node);
  if (it == node_names_.end())
  {
    throw InputError("unknown node '" + node + "'");
  }
  const auto row = static_cast<Eigen::Index>(it - node_names_.begin());
  const Stamps a = Assemble(f_hz, open_ports);
  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(a.m.rows(), 1);
  rhs(row, 0) = 1.0;
  auto x = SolveChecked(a, rhs);
  if (!x)
  {
    return std::nullopt;
  }
  return (*x)(row, 0);
}

SParameterSweep SParameters(const netlist::Netlist &n, std::span<const double> grid)
{
  CheckGrid(grid);
  const Circuit circuit(n);
  SParameterSweep sweep;
  sweep.frequencies.assign(grid.begin(), grid.end());
  sweep.values.resize(grid.size());
  purcellkit::detail::ParallelFor(grid.size(),
                      [&](std::size_t i) { sweep.values[i] = circuit.SParameters(grid[i]); });
  return sweep;
}

AdmittanceSweep InputAdmittance(const netlist::Netlist &n, int port_index,
                                std::span<const double> grid)
{
  CheckGrid(grid);
  const Circuit circuit(n);
  circuit.PortImpedance(port_index);
  AdmittanceSweep sweep;
  sweep.frequencies.assign(grid.begin(), grid.end());
  sweep.values.resize(grid.size());
  purcellkit::detail::ParallelFor(grid.size(), [&](std::size_t i)
                      { sweep.values[i] = circuit.InputAdmittance(port_index, grid[i]); });
  return sweep;
}

double TransmissionDb(const Eigen::MatrixXcd &s, int out_port, int in_port)
{
  if (out_port < 1 || in_port < 1 || out_port > s.rows() || in_port > s.cols())
  {
    throw InputError("port index out of range for S-matrix");
  }
  return 20.0 * std::log10(std::abs(s(out_port - 1, in_port - 1)));
}

}  // namespace purcellkit::network
