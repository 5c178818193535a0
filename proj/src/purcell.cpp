// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#include "purcellkit/purcell.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include "purcellkit/error.hpp"
#include "purcellkit/units.hpp"

namespace purcellkit::purcell
{

using netlist::Element;
using netlist::ElementKind;
using netlist::Netlist;

namespace
{

constexpr double INF = std::numeric_limits<double>::infinity();
constexpr double MAX_COUPLING_C = 1.0e-12;
constexpr int MAX_CORRECTIONS = 5;
constexpr double KAPPA_ACCEPT = 0.10;
constexpr double KAPPA_TARGET = 0.005;
constexpr double FREQ_TARGET = 2.0e-4;
constexpr double SEARCH_WINDOW = 0.05;

// Filter elements renamed into the readout netlist. Ports are dropped; the caller wires them.
struct Spliced
{
  std::vector<Element> elements;
  std::string in_node;
  std::string out_node;
  std::string first_resonator;
};

Spliced SpliceFilter(const Netlist &filter, const std::string &tag, bool drop_input_coupling,
                     const std::map<std::string, std::string> &node_override)
{
  auto rename_node = [&](const std::string &node)
  {
    if (node == netlist::GROUND)
    {
      return node;
    }
    auto it = node_override.find(node);
    return it != node_override.end() ? it->second : tag + "_" + node;
  };
  auto rename_id = [&](const std::string &id) { return id.substr(0, 1) + tag + "_" + id.substr(1); };

  Spliced out;
  out.in_node = rename_node("in");
  out.out_node = rename_node("out");
  out.first_resonator = rename_node("r1");
  for (const Element &e : filter.elements)
  {
    if (e.kind == ElementKind::Port)
    {
      continue;
    }
    const bool touches_input =
        std::find(e.nodes.begin(), e.nodes.end(), std::string("in")) != e.nodes.end();
    if (drop_input_coupling && touches_input)
    {
      continue;
    }
    Element copy = e;
    copy.id = rename_id(e.id);
    for (auto &node : copy.nodes)
    {
      node = rename_node(node);
    }
    if (e.kind == ElementKind::MutualCoupling)
    {
      copy.coupled = {rename_id(e.coupled[0]), rename_id(e.coupled[1])};
    }
    out.elements.push_back(std::move(copy));
  }
  return out;
}

// Feed side of a readout circuit: everything except the qubit and the readout resonator.
struct Feed
{
  std::vector<Element> elements;
  std::string node;  // where the resonator's feed coupling lands
};

Feed BuildFeed(const ReadoutTopology &t, const std::optional<Netlist> &filter)
{
  Feed feed;
  auto add = [&](std::vector<Element> elements)
  {
    for (auto &e : elements)
    {
      feed.elements.push_back(std::move(e));
    }
  };
  const double z0 = t.z0;
  switch (t.variant)
  {
    case ReadoutVariant::SinglePortBare:
      feed.node = "f";
      feed.elements.push_back(netlist::MakePort("P2", "f", "0", z0, 2));
      return feed;
    case ReadoutVariant::SinglePortFiltered:
    {
      Spliced f = SpliceFilter(*filter, "F1", true, {});
      feed.node = f.first_resonator;
      add(std::move(f.elements));
      feed.elements.push_back(netlist::MakePort("P2", f.out_node, "0", z0, 2));
      return feed;
    }
    default:
      break;
  }

  const netlist::ElectricalLength len{t.line_ref_hz.value_or(t.f_r_hz), t.line_degrees};
  std::string input = "in";
  if (t.variant == ReadoutVariant::TwoPortIoFiltered)
  {
    Spliced f = SpliceFilter(*filter, "F1", false, {});
    feed.elements.push_back(netlist::MakePort("P2", f.in_node, "0", z0, 2));
    input = f.out_node;
    add(std::move(f.elements));
  }
  else
  {
    feed.elements.push_back(netlist::MakePort("P2", input, "0", z0, 2));
  }
  std::string a = input;
  if (t.c_in_f > 0.0)
  {
    a = "a";
    feed.elements.push_back(netlist::MakeCapacitor("CI", input, a, t.c_in_f));
  }
  feed.elements.push_back(netlist::MakeLine("T1", a, "0", "t", "0", z0, len));
  feed.elements.push_back(netlist::MakeLine("T2", "t", "0", "b", "0", z0, len));
  feed.node = "t";
  if (t.variant == ReadoutVariant::TwoPortBare)
  {
    feed.elements.push_back(netlist::MakePort("P3", "b", "0", z0, 3));
  }
  else
  {
    const std::string tag = t.variant == ReadoutVariant::TwoPortIoFiltered ? "F2" : "F1";
    Spliced f = SpliceFilter(*filter, tag, false, {{"in", "b"}});
    feed.elements.push_back(netlist::MakePort("P3", f.out_node, "0", z0, 3));
    add(std::move(f.elements));
  }
  return feed;
}

// Impedance at the feed coupling node with the readout side absent, at f.
network::Complex FeedImpedance(const Feed &feed, double f_hz)
{
  Netlist n;
  n.elements = feed.elements;
  for (auto &e : n.elements)
  {
    if (e.kind == ElementKind::Port)
    {
      e.port_index -= 1;
    }
  }
  const auto z = network::Circuit(n).DrivingPointImpedance(feed.node, f_hz);
  if (!z)
  {
    throw NumericalError("feed network is singular at the resonator frequency");
  }
  return *z;
}

// Series capacitor into load z that presents conductance g; bisection in log C.
double SizeFeedCapacitor(network::Complex z, double w, double g)
{
  auto re_y = [&](double c) { return std::real(1.0 / (z + 1.0 / (network::Complex(0.0, w * c)))); };
  double hi = MAX_COUPLING_C;
  if (z.imag() > 0.0)
  {
    hi = std::min(hi, 1.0 / (w * z.imag()));
  }
  if (!(re_y(hi) >= g))
  {
    throw InputError("kappa_r unachievable with a coupling capacitor below 1 pF");
  }
  double lo = std::log(1.0e-20);
  double lhi = std::log(hi);
  for (int it = 0; it < 200 && lhi - lo > 1.0e-12; ++it)
  {
    const double mid = 0.5 * (lo + lhi);
    (re_y(std::exp(mid)) < g ? lo : lhi) = mid;
  }
  return std::exp(0.5 * (lo + lhi));
}

double Golden(const std::function<double(double)> &f, double a, double b)
{
  constexpr double invphi = 0.6180339887498949;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double y1 = f(x1);
  double y2 = f(x2);
  for (int it = 0; it < 200 && (b - a) > 1.0e-12 * b; ++it)
  {
    if (y1 > y2)
    {
      b = x2;
      x2 = x1;
      y2 = y1;
      x1 = b - invphi * (b - a);
      y1 = f(x1);
    }
    else
    {
      a = x1;
      x1 = x2;
      y1 = y2;
      x2 = a + invphi * (b - a);
      y2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

DispersiveResult DispersivePurcellRate(double kappa_hz, double g_hz, double delta_hz)
{
  if (delta_hz == 0.0)
  {
    throw InputError("dispersive limit undefined at zero detuning");
  }
  if (!(kappa_hz >= 0.0) || !std::isfinite(g_hz) || !std::isfinite(delta_hz))
  {
    throw InputError("kappa must be non-negative and g, delta finite");
  }
  const double ratio = g_hz / delta_hz;
  DispersiveResult r;
  r.rate = 2.0 * constants::pi * kappa_hz * ratio * ratio;
  r.t1 = r.rate > 0.0 ? 1.0 / r.rate : INF;
  return r;
}

double QubitCapacitance(double ec_hz)
{
  if (!(ec_hz > 0.0) || !std::isfinite(ec_hz))
  {
    throw InputError("charging energy must be positive");
  }
  return constants::e * constants::e / (2.0 * constants::h * ec_hz);
}

double QubitParams::CSigma() const
{
  if (!ec_hz && !c_sigma_f)
  {
    throw InputError("qubit needs E_c or C_sigma");
  }
  if (c_sigma_f && !(*c_sigma_f > 0.0))
  {
    throw InputError("C_sigma must be positive");
  }
  if (!ec_hz)
  {
    return *c_sigma_f;
  }
  const double c = QubitCapacitance(*ec_hz);
  if (c_sigma_f && std::abs(*c_sigma_f / c - 1.0) > 1.0e-9)
  {
    throw InputError("E_c and C_sigma disagree");
  }
  return c;
}

T1Sweep T1Purcell(const Netlist &n, int qubit_port, double c_sigma_f, std::span<const double> grid)
{
  if (!(c_sigma_f > 0.0))
  {
    throw InputError("C_sigma must be positive");
  }
  const auto y = network::InputAdmittance(n, qubit_port, grid);
  T1Sweep out;
  out.frequencies = y.frequencies;
  out.values.resize(y.Size());
  for (std::size_t i = 0; i < y.Size(); ++i)
  {
    if (y.values[i])
    {
      const double re = y.values[i]->real();
      out.values[i] = re < UNBOUNDED_RE_Y ? INF : c_sigma_f / re;
    }
  }
  return out;
}

std::vector<FomPoint> FomCurve(const T1Sweep &with_filter, const T1Sweep &without_filter,
                               double f_r_hz)
{
  if (with_filter.frequencies != without_filter.frequencies)
  {
    throw InputError("FOM needs identical grids");
  }
  std::vector<FomPoint> out(with_filter.Size());
  for (std::size_t i = 0; i < out.size(); ++i)
  {
    out[i].delta_hz = with_filter.frequencies[i] - f_r_hz;
    const auto &num = with_filter.values[i];
    const auto &den = without_filter.values[i];
    if (!num || !den || std::isinf(*den))
    {
      out[i].flagged = true;
      continue;
    }
    out[i].fom = *num / *den;
  }
  return out;
}

std::vector<FomPoint> FomCurve(const Netlist &with_filter, const Netlist &without_filter,
                               double c_sigma_f, double f_r_hz, std::span<const double> grid,
                               int qubit_port)
{
  return FomCurve(T1Purcell(with_filter, qubit_port, c_sigma_f, grid),
                  T1Purcell(without_filter, qubit_port, c_sigma_f, grid), f_r_hz);
}

std::string_view VariantName(ReadoutVariant v)
{
  switch (v)
  {
    case ReadoutVariant::SinglePortBare:
      return "single_port_bare";
    case ReadoutVariant::SinglePortFiltered:
      return "single_port_filtered";
    case ReadoutVariant::TwoPortBare:
      return "two_port_bare";
    case ReadoutVariant::TwoPortOutFiltered:
      return "two_port_out_filtered";
    case ReadoutVariant::TwoPortIoFiltered:
      return "two_port_io_filtered";
  }
  return "";
}

ReadoutVariant ParseVariant(std::string_view text)
{
  static const std::pair<std::string_view, ReadoutVariant> table[] = {
      {"fig3a", ReadoutVariant::SinglePortBare},
      {"fig3b", ReadoutVariant::SinglePortFiltered},
      {"fig3c", ReadoutVariant::TwoPortBare},
      {"fig3d", ReadoutVariant::TwoPortOutFiltered},
      {"fig3e", ReadoutVariant::TwoPortIoFiltered},
  };
  for (const auto &[name, v] : table)
  {
    if (text == name || text == VariantName(v))
    {
      return v;
    }
  }
  throw InputError("unknown topology '" + std::string(text) + "'");
}

bool HasFilter(ReadoutVariant v)
{
  return v == ReadoutVariant::SinglePortFiltered || v == ReadoutVariant::TwoPortOutFiltered ||
         v == ReadoutVariant::TwoPortIoFiltered;
}

bool IsTwoPort(ReadoutVariant v)
{
  return v != ReadoutVariant::SinglePortBare && v != ReadoutVariant::SinglePortFiltered;
}

ReadoutVariant BareCounterpart(ReadoutVariant v)
{
  return IsTwoPort(v) ? ReadoutVariant::TwoPortBare : ReadoutVariant::SinglePortBare;
}

ResonatorMeasurement MeasureResonator(const network::Circuit &c, const std::string &node,
                                      double f_guess_hz, double linewidth_guess_hz)
{
  if (!(f_guess_hz > 0.0) || !(linewidth_guess_hz > 0.0))
  {
    throw InputError("resonator search needs positive frequency and linewidth guesses");
  }
  const int open[] = {1};
  auto z2 = [&](double f)
  {
    const auto z = c.DrivingPointImpedance(node, f, open);
    return z ? std::norm(*z) : 0.0;
  };
  const double lo = f_guess_hz * (1.0 - SEARCH_WINDOW);
  const double hi = f_guess_hz * (1.0 + SEARCH_WINDOW);
  const double step = std::max(linewidth_guess_hz / 6.0, (hi - lo) / 20000.0);
  const auto points = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;
  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t i = 0; i < points; ++i)
  {
    const double v = z2(lo + step * static_cast<double>(i));
    if (v > best_val)
    {
      best_val = v;
      best = i;
    }
  }
  if (best == 0 || best + 1 == points)
  {
    throw NumericalError("no resonance found near " + FormatShortest(f_guess_hz) + " Hz");
  }
  const double center = lo + step * static_cast<double>(best);
  const double f_peak = Golden(z2, center - step, center + step);
  const double half = 0.5 * z2(f_peak);

  auto crossing = [&](double dir)
  {
    double inside = f_peak;
    double outside = f_peak + dir * step;
    while (z2(outside) > half)
    {
      inside = outside;
      outside += dir * step;
      if (outside < lo || outside > hi)
      {
        throw NumericalError("resonance linewidth exceeds the search window");
      }
    }
    for (int it = 0; it < 200 && std::abs(outside - inside) > 1.0e-12 * f_peak; ++it)
    {
      const double mid = 0.5 * (inside + outside);
      (z2(mid) > half ? inside : outside) = mid;
    }
    return 0.5 * (inside + outside);
  };
  return {f_peak, crossing(1.0) - crossing(-1.0)};
}

ReadoutNetwork BuildReadoutNetwork(const ReadoutTopology &t,
                                   const std::optional<synthesis::CouplingPlan> &filter)
{
  if (!(t.f_r_hz > 0.0) || !(t.kappa_hz > 0.0) || !(t.g_hz >= 0.0) || !(t.c_sigma_f > 0.0) ||
      !(t.z0 > 0.0) || !(t.resonator_impedance > 0.0) || !(t.c_in_f >= 0.0) ||
      !(t.line_degrees > 0.0))
  {
    throw InputError("readout topology needs positive f_r, kappa, C_sigma, impedances and "
                     "line length");
  }
  if (t.kappa_hz > SEARCH_WINDOW * t.f_r_hz)
  {
    throw InputError("kappa_r unachievable: loaded Q below " +
                     FormatShortest(1.0 / SEARCH_WINDOW));
  }
  if (HasFilter(t.variant) && !filter)
  {
    throw InputError(std::string(VariantName(t.variant)) + " needs a filter plan");
  }
  std::optional<Netlist> filter_net;
  ReadoutTopology topo = t;
  if (HasFilter(t.variant))
  {
    filter_net = synthesis::RealizeFilter(*filter, t.filter_mode, t.z0);
  }
  if (!topo.line_ref_hz)
  {
    topo.line_ref_hz = filter && HasFilter(t.variant) ? filter->f_center_hz : t.f_r_hz;
  }
  const Feed feed = BuildFeed(topo, filter_net);

  const double w = AngularFrequency(t.f_r_hz);
  const double g_ang = AngularFrequency(t.g_hz);
  const double kappa_ang = AngularFrequency(t.kappa_hz);
  double c_total = constants::pi / (4.0 * w * t.resonator_impedance);
  const double l_r = 1.0 / (w * w * c_total);
  const bool capacitive = t.coupling == CouplingStyle::Capacitive;
  const double qubit_coupling = capacitive ? 2.0 * g_ang * std::sqrt(t.c_sigma_f * c_total) / w
                                           : 2.0 * g_ang * std::sqrt(t.c_sigma_f * c_total);

  const network::Complex z_feed = FeedImpedance(feed, t.f_r_hz);
  const double g_target = kappa_ang * c_total;
  double feed_coupling = capacitive ? SizeFeedCapacitor(z_feed, w, g_target)
                                    : std::sqrt(g_target / z_feed.real());

  auto build = [&](double c_r)
  {
    Netlist n;
    n.title = std::string(VariantName(t.variant));
    n.elements.push_back(netlist::MakePort("P1", "q", "0", t.z0, 1));
    n.elements.push_back(netlist::MakeCapacitor("CQ", "q", "0", t.c_sigma_f));
    if (t.g_hz > 0.0)
    {
      n.elements.push_back(capacitive ? netlist::MakeCapacitor("CG", "q", "r", qubit_coupling)
                                      : netlist::MakeInverter("JG", "q", "r", qubit_coupling));
    }
    n.elements.push_back(netlist::MakeInductor("LR", "r", "0", l_r));
    n.elements.push_back(netlist::MakeCapacitor("CR", "r", "0", c_r));
    n.elements.push_back(capacitive ? netlist::MakeCapacitor("CK", "r", feed.node, feed_coupling)
                                    : netlist::MakeInverter("JK", "r", feed.node, feed_coupling));
    for (const auto &e : feed.elements)
    {
      n.elements.push_back(e);
    }
    return n;
  };
  auto loading = [&]()
  {
    if (!capacitive)
    {
      return 0.0;
    }
    const double cg = t.g_hz > 0.0 ? qubit_coupling * t.c_sigma_f / (qubit_coupling + t.c_sigma_f)
                                   : 0.0;
    return cg + feed_coupling;
  };

  ReadoutNetwork out;
  double slope = 2.0;
  double prev_x = 0.0;
  double prev_y = 0.0;
  for (int it = 0;; ++it)
  {
    const double c_r = c_total - loading();
    if (!(c_r > 0.0))
    {
      throw InputError("kappa_r unachievable: coupling capacitance exceeds the resonator's");
    }
    out.netlist = build(c_r);
    const network::Circuit circuit(out.netlist);
    const auto m = MeasureResonator(circuit, "r", out.f_r_hz > 0.0 ? out.f_r_hz : t.f_r_hz,
                                    out.kappa_hz > 0.0 ? out.kappa_hz : t.kappa_hz);
    out.f_r_hz = m.f_peak_hz;
    out.kappa_hz = m.linewidth_hz;
    out.iterations = it;
    const bool done = std::abs(m.f_peak_hz / t.f_r_hz - 1.0) < FREQ_TARGET &&
                      std::abs(m.linewidth_hz / t.kappa_hz - 1.0) < KAPPA_TARGET;
    if (done || it == MAX_CORRECTIONS)
    {
      break;
    }
    // Log-log secant on the feed coupling; linewidth goes roughly as its square.
    const double x = std::log(feed_coupling);
    const double y = std::log(m.linewidth_hz);
    if (it > 0 && x != prev_x)
    {
      const double s = (y - prev_y) / (x - prev_x);
      if (s > 0.5 && s < 4.0)
      {
        slope = s;
      }
    }
    prev_x = x;
    prev_y = y;
    feed_coupling = std::exp(x + (std::log(t.kappa_hz) - y) / slope);
    if (capacitive && feed_coupling >= MAX_COUPLING_C)
    {
      throw InputError("kappa_r unachievable with a coupling capacitor below 1 pF");
    }
    const double ratio = m.f_peak_hz / t.f_r_hz;
    c_total *= ratio * ratio;
  }
  if (std::abs(out.kappa_hz / t.kappa_hz - 1.0) > KAPPA_ACCEPT)
  {
    throw NumericalError("readout linewidth did not converge: got " +
                         FormatShortest(out.kappa_hz) + " Hz");
  }
  return out;
}

std::vector<double> SinglePoleReference(double q_f, double f_r_hz, double kappa_hz, double g_hz,
                                        std::span<const double> deltas_hz)
{
  if (!(q_f > 0.0) || !(f_r_hz > 0.0))
  {
    throw InputError("single-pole model needs Q_F > 0 and f_r > 0");
  }
  std::vector<double> t1;
  t1.reserve(deltas_hz.size());
  for (double d : deltas_hz)
  {
    const auto base = DispersivePurcellRate(kappa_hz, g_hz, d);
    const double s = f_r_hz / (2.0 * q_f * std::abs(d));
    const double rate = base.rate * s * s;
    t1.push_back(rate > 0.0 ? 1.0 / rate : INF);
  }
  return t1;
}

int MultiplexCapacity(double bandwidth_hz, double kappa_hz, double spacing_factor)
{
  if (!(bandwidth_hz > 0.0) || !(kappa_hz > 0.0) || !(spacing_factor > 0.0))
  {
    throw InputError("multiplex capacity needs positive bandwidth, kappa and spacing");
  }
  // The slack keeps exact ratios such as 100 MHz / (10 x 10 MHz) from flooring to 0.
  return static_cast<int>(std::floor(bandwidth_hz / (spacing_factor * kappa_hz) + 1.0e-9));
}

}  // namespace purcellkit::purcell
