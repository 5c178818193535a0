// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#include "purcellkit/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include "purcellkit/error.hpp"
#include "purcellkit/units.hpp"

namespace purcellkit::netlist
{

char KindLetter(ElementKind kind)
{
  switch (kind)
  {
    case ElementKind::Resistor:
      return 'R';
    case ElementKind::Inductor:
      return 'L';
    case ElementKind::Capacitor:
      return 'C';
    case ElementKind::MutualCoupling:
      return 'K';
    case ElementKind::TransmissionLine:
      return 'T';
    case ElementKind::Port:
      return 'P';
    case ElementKind::AdmittanceInverter:
      return 'J';
  }
  return '?';
}

std::optional<ElementKind> KindFromLetter(char letter)
{
  switch (std::toupper(static_cast<unsigned char>(letter)))
  {
    case 'R':
      return ElementKind::Resistor;
    case 'L':
      return ElementKind::Inductor;
    case 'C':
      return ElementKind::Capacitor;
    case 'K':
      return ElementKind::MutualCoupling;
    case 'T':
      return ElementKind::TransmissionLine;
    case 'P':
      return ElementKind::Port;
    case 'J':
      return ElementKind::AdmittanceInverter;
    default:
      return std::nullopt;
  }
}

double LineAngle(const LineLength &len, double f_hz)
{
  if (const auto *p = std::get_if<PhysicalLength>(&len))
  {
    return 2.0 * constants::pi * f_hz * p->length_m * std::sqrt(p->eps_eff) / constants::c0;
  }
  const auto &e = std::get<ElectricalLength>(len);
  return e.degrees * (constants::pi / 180.0) * (f_hz / e.ref_freq_hz);
}

namespace
{

Element TwoTerminal(ElementKind kind, std::string id, std::string a, std::string b, double v)
{
  Element e;
  e.kind = kind;
  e.id = std::move(id);
  e.nodes = {std::move(a), std::move(b)};
  e.value = v;
  return e;
}

}  // namespace

Element MakeResistor(std::string id, std::string a, std::string b, double ohms)
{
  return TwoTerminal(ElementKind::Resistor, std::move(id), std::move(a), std::move(b), ohms);
}

Element MakeInductor(std::string id, std::string a, std::string b, double henries)
{
  return TwoTerminal(ElementKind::Inductor, std::move(id), std::move(a), std::move(b),
                     henries);
}

Element MakeCapacitor(std::string id, std::string a, std::string b, double farads)
{
  return TwoTerminal(ElementKind::Capacitor, std::move(id), std::move(a), std::move(b),
                     farads);
}

Element MakeInverter(std::string id, std::string a, std::string b, double siemens)
{
  return TwoTerminal(ElementKind::AdmittanceInverter, std::move(id), std::move(a),
                     std::move(b), siemens);
}

Element MakeCoupling(std::string id, std::string l1, std::string l2, double k)
{
  Element e;
  e.kind = ElementKind::MutualCoupling;
  e.id = std::move(id);
  e.coupled = {std::move(l1), std::move(l2)};
  e.value = k;
  return e;
}

Element MakeLine(std::string id, std::string p1, std::string p1_ref, std::string p2,
                 std::string p2_ref, double z0, LineLength length)
{
  Element e;
  e.kind = ElementKind::TransmissionLine;
  e.id = std::move(id);
  e.nodes = {std::move(p1), std::move(p1_ref), std::move(p2), std::move(p2_ref)};
  e.value = z0;
  e.length = length;
  return e;
}

Element MakePort(std::string id, std::string plus, std::string minus, double z0, int index)
{
  Element e = TwoTerminal(ElementKind::Port, std::move(id), std::move(plus), std::move(minus),
                          z0);
  e.port_index = index;
  return e;
}

std::vector<std::string> Netlist::Nodes() const
{
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto &e : elements)
  {
    for (const auto &node : e.nodes)
    {
      if (seen.insert(node).second)
      {
        out.push_back(node);
      }
    }
  }
  return out;
}

std::vector<const Element *> Netlist::Ports() const
{
  std::vector<const Element *> ports;
  for (const auto &e : elements)
  {
    if (e.kind == ElementKind::Port)
    {
      ports.push_back(&e);
    }
  }
  std::stable_sort(ports.begin(), ports.end(), [](const Element *a, const Element *b)
                   { return a->port_index < b->port_index; });
  return ports;
}

const Element *Netlist::Find(std::string_view id) const
{
  for (const auto &e : elements)
  {
    if (e.id == id)
    {
      return &e;
    }
  }
  return nullptr;
}

namespace
{

bool PositiveFinite(double v)
{
  return std::isfinite(v) && v > 0.0;
}

bool ValidName(const std::string &name)
{
  return !name.empty() && name.find_first_of("=*; \t\r\n") == std::string::npos;
}

std::size_t ExpectedNodeCount(ElementKind kind)
{
  switch (kind)
  {
    case ElementKind::MutualCoupling:
      return 0;
    case ElementKind::TransmissionLine:
      return 4;
    default:
      return 2;
  }
}

// Small union-find over node names for the ground-reachability check.
class Connectivity
{
public:
  std::size_t Id(const std::string &node)
  {
    auto [it, inserted] = index_.try_emplace(node, parent_.size());
    if (inserted)
    {
      parent_.push_back(parent_.size());
    }
    return it->second;
  }

  void Join(const std::string &a, const std::string &b)
  {
    std::size_t ra = Root(Id(a));
    std::size_t rb = Root(Id(b));
    if (ra != rb)
    {
      parent_[ra] = rb;
    }
  }

  bool Connected(const std::string &a, const std::string &b)
  {
    return Root(Id(a)) == Root(Id(b));
  }

private:
  std::size_t Root(std::size_t i)
  {
    while (parent_[i] != i)
    {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<Diagnostic> ValidateNetlist(const Netlist &n)
{
  std::vector<Diagnostic> diags;
  auto report = [&](const std::string &id, std::string msg)
  { diags.push_back({id, id.empty() ? msg : id + ": " + msg}); };

  std::set<std::string> ids;
  std::map<std::string, const Element *> inductors;
  for (const auto &e : n.elements)
  {
    if (!ValidName(e.id) || !KindFromLetter(e.id.front()) ||
        *KindFromLetter(e.id.front()) != e.kind)
    {
      report(e.id, "id must start with '" + std::string(1, KindLetter(e.kind)) + "'");
    }
    if (!ids.insert(e.id).second)
    {
      report(e.id, "duplicate id");
    }
    if (e.kind == ElementKind::Inductor)
    {
      inductors.emplace(e.id, &e);
    }
    for (const auto &node : e.nodes)
    {
      if (!ValidName(node))
      {
        report(e.id, "invalid node name '" + node + "'");
      }
    }
    if (e.nodes.size() != ExpectedNodeCount(e.kind))
    {
      report(e.id, "expected " + std::to_string(ExpectedNodeCount(e.kind)) + " nodes");
    }
  }

  std::vector<int> port_indices;
  for (const auto &e : n.elements)
  {
    switch (e.kind)
    {
      case ElementKind::Resistor:
      case ElementKind::Inductor:
      case ElementKind::Capacitor:
      case ElementKind::AdmittanceInverter:
        if (!PositiveFinite(e.value))
        {
          report(e.id, "value must be positive and finite");
        }
        break;
      case ElementKind::MutualCoupling:
        for (const auto &ref : e.coupled)
        {
          if (!inductors.contains(ref))
          {
            report(e.id, "references unknown inductor '" + ref + "'");
          }
        }
        if (e.coupled[0] == e.coupled[1])
        {
          report(e.id, "couples an inductor to itself");
        }
        if (!(std::isfinite(e.value) && e.value >= 0.0 && e.value < 1.0))
        {
          report(e.id, "coupling coefficient out of range");
        }
        break;
      case ElementKind::TransmissionLine:
      {
        if (!PositiveFinite(e.value))
        {
          report(e.id, "characteristic impedance must be positive and finite");
        }
        bool ok = std::visit(
            [](const auto &len)
            {
              using T = std::decay_t<decltype(len)>;
              if constexpr (std::is_same_v<T, PhysicalLength>)
              {
                return PositiveFinite(len.length_m) && std::isfinite(len.eps_eff) &&
                       len.eps_eff >= 1.0;
              }
              else
              {
                return PositiveFinite(len.ref_freq_hz) && PositiveFinite(len.degrees);
              }
            },
            e.length);
        if (!ok)
        {
          report(e.id, "invalid line length");
        }
        break;
      }
      case ElementKind::Port:
        if (!PositiveFinite(e.value))
        {
          report(e.id, "reference impedance must be positive and finite");
        }
        port_indices.push_back(e.port_index);
        break;
    }
  }

  {
    std::vector<int> sorted = port_indices;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
    {
      if (sorted[i] != static_cast<int>(i) + 1)
      {
        report("", "port indices must be 1.." + std::to_string(sorted.size()) +
                       " without gaps or duplicates");
        break;
      }
    }
  }

  // Reachability: inverters tie both terminals to the ground reference; lines connect all
  // four terminals.
  Connectivity conn;
  conn.Id(std::string(GROUND));
  bool has_ground = false;
  for (const auto &e : n.elements)
  {
    if (e.nodes.empty())
    {
      continue;
    }
    for (const auto &node : e.nodes)
    {
      has_ground = has_ground || node == GROUND;
      conn.Id(node);
    }
    if (e.kind == ElementKind::AdmittanceInverter)
    {
      for (const auto &node : e.nodes)
      {
        conn.Join(node, std::string(GROUND));
      }
    }
    else
    {
      for (const auto &node : e.nodes)
      {
        conn.Join(e.nodes.front(), node);
      }
    }
  }
  const auto nodes = n.Nodes();
  if (!nodes.empty() && !has_ground)
  {
    report("", "missing ground node '0'");
  }
  else
  {
    for (const auto &node : nodes)
    {
      if (!conn.Connected(node, std::string(GROUND)))
      {
        report("", "node " + node + " unreachable from ground");
      }
    }
  }
  return diags;
}

namespace
{

std::vector<std::string> Tokenize(std::string_view line)
{
  std::vector<std::string> tokens;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok)
  {
    tokens.push_back(tok);
  }
  return tokens;
}

[[noreturn]] void Fail(const std::string &msg, int line)
{
  throw InputError(msg + " at line " + std::to_string(line));
}

double ParseValueAt(const std::string &text, const std::string &what, int line)
{
  auto v = ParseSiValue(text);
  if (!v)
  {
    Fail("syntax error: invalid value '" + text + "' for " + what, line);
  }
  return *v;
}

// KEY=VALUE parameters after the node list.
std::map<std::string, double> ParseParams(const std::vector<std::string> &tokens,
                                          std::size_t first, const std::string &id, int line)
{
  std::map<std::string, double> params;
  for (std::size_t i = first; i < tokens.size(); ++i)
  {
    auto eq = tokens[i].find('=');
    if (eq == std::string::npos || eq == 0)
    {
      Fail("syntax error: expected KEY=VALUE in " + id + ", got '" + tokens[i] + "'", line);
    }
    std::string key = tokens[i].substr(0, eq);
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (params.contains(key))
    {
      Fail("syntax error: repeated parameter " + key + " in " + id, line);
    }
    params[key] = ParseValueAt(tokens[i].substr(eq + 1), id + " " + key, line);
  }
  return params;
}

void ExpectKeys(const std::map<std::string, double> &params, std::set<std::string> allowed,
                const std::string &id, int line)
{
  for (const auto &[k, v] : params)
  {
    if (!allowed.contains(k))
    {
      Fail("syntax error: unknown parameter " + k + " in " + id, line);
    }
  }
}

}  // namespace

Netlist ParseNetlist(std::string_view text)
{
  Netlist n;
  std::unordered_map<std::string, int> line_of;
  int line_no = 0;
  int port_count = 0;

  std::size_t pos = 0;
  while (pos <= text.size())
  {
    auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                          : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;

    std::string line(raw);
    if (auto c = line.find_first_of("*;"); c != std::string::npos)
    {
      line.erase(c);
    }
    if (!line.empty() && line.back() == '\r')
    {
      line.pop_back();
    }
    auto tokens = Tokenize(line);
    if (tokens.empty())
    {
      continue;
    }

    if (tokens[0].front() == '.')
    {
      std::string directive = tokens[0];
      std::transform(directive.begin(), directive.end(), directive.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (directive == ".title")
      {
        auto start = line.find_first_not_of(" \t", line.find(tokens[0]) + tokens[0].size());
        n.title = start == std::string::npos ? "" : line.substr(start);
        while (!n.title.empty() && std::isspace(static_cast<unsigned char>(n.title.back())))
        {
          n.title.pop_back();
        }
        continue;
      }
      if (directive == ".end")
      {
        continue;
      }
      Fail("syntax error: unknown directive '" + tokens[0] + "'", line_no);
    }

    const std::string &id = tokens[0];
    auto kind = KindFromLetter(id.front());
    if (!kind)
    {
      Fail("unknown element kind '" + std::string(1, id.front()) + "'", line_no);
    }
    if (line_of.contains(id))
    {
      Fail("duplicate id '" + id + "'", line_no);
    }

    Element e;
    e.kind = *kind;
    e.id = id;
    switch (*kind)
    {
      case ElementKind::Resistor:
      case ElementKind::Inductor:
      case ElementKind::Capacitor:
      case ElementKind::AdmittanceInverter:
        if (tokens.size() != 4)
        {
          Fail("syntax error: " + id + " expects '<id> <node> <node> <value>'", line_no);
        }
        e.nodes = {tokens[1], tokens[2]};
        e.value = ParseValueAt(tokens[3], id, line_no);
        break;
      case ElementKind::MutualCoupling:
        if (tokens.size() != 4)
        {
          Fail("syntax error: " + id + " expects '<id> <inductor> <inductor> <k>'", line_no);
        }
        e.coupled = {tokens[1], tokens[2]};
        e.value = ParseValueAt(tokens[3], id, line_no);
        break;
      case ElementKind::TransmissionLine:
      {
        if (tokens.size() < 7)
        {
          Fail("syntax error: " + id +
                   " expects '<id> <n1> <ref1> <n2> <ref2> Z0=<ohm> <length params>'",
               line_no);
        }
        e.nodes = {tokens[1], tokens[2], tokens[3], tokens[4]};
        auto params = ParseParams(tokens, 5, id, line_no);
        ExpectKeys(params, {"Z0", "LEN", "EEFF", "FQ", "DEG"}, id, line_no);
        if (!params.contains("Z0"))
        {
          Fail("syntax error: " + id + " missing Z0", line_no);
        }
        e.value = params["Z0"];
        const bool physical = params.contains("LEN") || params.contains("EEFF");
        const bool electrical = params.contains("FQ") || params.contains("DEG");
        if (physical == electrical)
        {
          Fail("syntax error: " + id + " needs exactly one of LEN/EEFF or FQ/DEG", line_no);
        }
        if (physical)
        {
          if (!params.contains("LEN"))
          {
            Fail("syntax error: " + id + " missing LEN", line_no);
          }
          e.length = PhysicalLength{params["LEN"],
                                    params.contains("EEFF") ? params["EEFF"] : 1.0};
        }
        else
        {
          if (!params.contains("FQ") || !params.contains("DEG"))
          {
            Fail("syntax error: " + id + " needs both FQ and DEG", line_no);
          }
          e.length = ElectricalLength{params["FQ"], params["DEG"]};
        }
        break;
      }
      case ElementKind::Port:
      {
        if (tokens.size() < 5 || tokens[3] != "PORT")
        {
          Fail("syntax error: " + id + " expects '<id> <node+> <node-> PORT Z0=<ohm> [N=<k>]'",
               line_no);
        }
        e.nodes = {tokens[1], tokens[2]};
        auto params = ParseParams(tokens, 4, id, line_no);
        ExpectKeys(params, {"Z0", "N"}, id, line_no);
        if (!params.contains("Z0"))
        {
          Fail("syntax error: " + id + " missing Z0", line_no);
        }
        e.value = params["Z0"];
        ++port_count;
        if (params.contains("N"))
        {
          double idx = params["N"];
          if (idx != std::floor(idx) || idx < 1 || idx > 1e6)
          {
            Fail("syntax error: port index must be a positive integer in " + id, line_no);
          }
          e.port_index = static_cast<int>(idx);
        }
        else
        {
          e.port_index = port_count;
        }
        break;
      }
    }
    for (const auto &node : e.nodes)
    {
      if (!ValidName(node))
      {
        Fail("syntax error: invalid node name '" + node + "'", line_no);
      }
    }
    line_of[id] = line_no;
    n.elements.push_back(std::move(e));
  }

  // Grammar-level reference checks, reported at the referencing line.
  for (const auto &e : n.elements)
  {
    if (e.kind != ElementKind::MutualCoupling)
    {
      continue;
    }
    for (const auto &ref : e.coupled)
    {
      const Element *target = n.Find(ref);
      if (!target || target->kind != ElementKind::Inductor)
      {
        Fail("dangling mutual-coupling reference '" + ref + "' in " + e.id, line_of[e.id]);
      }
    }
  }
  const auto nodes = n.Nodes();
  if (!nodes.empty() && std::find(nodes.begin(), nodes.end(), GROUND) == nodes.end())
  {
    Fail("missing ground node '0'", line_no);
  }

  auto diags = ValidateNetlist(n);
  if (!diags.empty())
  {
    const auto &d = diags.front();
    int at = line_no;
    if (!d.element_id.empty() && line_of.contains(d.element_id))
    {
      at = line_of[d.element_id];
    }
    else if (auto p = d.message.find("node "); p == 0)
    {
      // "node X unreachable ...": point at the first element touching X.
      std::string node = d.message.substr(5, d.message.find(' ', 5) - 5);
      for (const auto &e : n.elements)
      {
        if (std::find(e.nodes.begin(), e.nodes.end(), node) != e.nodes.end())
        {
          at = line_of[e.id];
          break;
        }
      }
    }
    Fail(d.message, at);
  }
  return n;
}

std::string SerializeNetlist(const Netlist &n)
{
  std::ostringstream out;
  if (!n.title.empty())
  {
    out << ".title " << n.title << '\n';
  }
  int port_position = 0;
  for (const auto &e : n.elements)
  {
    out << e.id;
    switch (e.kind)
    {
      case ElementKind::MutualCoupling:
        out << ' ' << e.coupled[0] << ' ' << e.coupled[1] << ' ' << FormatShortest(e.value);
        break;
      case ElementKind::TransmissionLine:
        for (const auto &node : e.nodes)
        {
          out << ' ' << node;
        }
        out << " Z0=" << FormatSiValue(e.value);
        if (const auto *p = std::get_if<PhysicalLength>(&e.length))
        {
          out << " LEN=" << FormatSiValue(p->length_m) << " EEFF=" << FormatShortest(p->eps_eff);
        }
        else
        {
          const auto &el = std::get<ElectricalLength>(e.length);
          out << " FQ=" << FormatSiValue(el.ref_freq_hz) << " DEG=" << FormatShortest(el.degrees);
        }
        break;
      case ElementKind::Port:
        ++port_position;
        out << ' ' << e.nodes[0] << ' ' << e.nodes[1] << " PORT Z0=" << FormatSiValue(e.value);
        if (e.port_index != port_position)
        {
          out << " N=" << e.port_index;
        }
        break;
      default:
        out << ' ' << e.nodes[0] << ' ' << e.nodes[1] << ' ' << FormatSiValue(e.value);
        break;
    }
    out << '\n';
  }
  return out.str();
}

Netlist ReadNetlistFile(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw InputError("cannot open netlist '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseNetlist(buf.str());
}

void WriteNetlistFile(const Netlist &n, const std::string &path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw InputError("cannot write netlist '" + path + "'");
  }
  out << SerializeNetlist(n);
  if (!out)
  {
    throw InputError("write failed for '" + path + "'");
  }
}

}  // namespace purcellkit::netlist
