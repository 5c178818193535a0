// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#include "purcellkit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <CLI11.hpp>
#include <json.hpp>
#include "purcellkit/cpw.hpp"
#include "purcellkit/error.hpp"
#include "purcellkit/materials.hpp"
#include "purcellkit/netlist.hpp"
#include "purcellkit/network.hpp"
#include "purcellkit/purcell.hpp"
#include "purcellkit/synthesis.hpp"
#include "purcellkit/units.hpp"

namespace purcellkit::cli
{

namespace
{

std::string Num(double v)
{
  if (std::isnan(v))
  {
    return "nan";
  }
  if (std::isinf(v))
  {
    return v > 0.0 ? "inf" : "-inf";
  }
  if (v == 0.0)
  {
    v = 0.0;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string OutputPath(const std::string &path)
{
  const char *dir = std::getenv(OUTPUT_DIR_ENV);
  std::filesystem::path p(path);
  if (dir != nullptr && *dir != '\0' && p.is_relative())
  {
    return (std::filesystem::path(dir) / p).string();
  }
  return path;
}

void WriteText(const std::string &path, const std::string &text)
{
  const std::string target = OutputPath(path);
  std::ofstream out(target, std::ios::binary);
  out << text;
  if (!out)
  {
    throw InputError("cannot write '" + target + "'");
  }
}

std::string ReadText(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw InputError("cannot read '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// String-valued flags of one subcommand; numeric ones go through the SI parser on use.
class Flags
{
public:
  explicit Flags(CLI::App *app) : app_(app) {}

  void Add(const std::string &name, const std::string &help)
  {
    auto &slot = slots_[name];
    slot.option = app_->add_option("--" + name, slot.value, help);
  }

  // Presence-only flag; a config file sets it with a JSON boolean.
  void AddSwitch(const std::string &name, const std::string &help)
  {
    auto &slot = slots_[name];
    slot.option = app_->add_flag("--" + name, help);
    slot.is_switch = true;
  }

  bool Has(const std::string &name) const
  {
    const auto &s = Slot(name);
    return s.option->count() > 0 || s.from_config;
  }

  std::string Str(const std::string &name) const
  {
    if (!Has(name))
    {
      throw InputError("--" + name + " is required");
    }
    return Slot(name).value;
  }

  std::string StrOr(const std::string &name, const std::string &fallback) const
  {
    return Has(name) ? Slot(name).value : fallback;
  }

  double Number(const std::string &name) const
  {
    return ParseSiValueOrThrow(Str(name), "--" + name);
  }

  double NumberOr(const std::string &name, double fallback) const
  {
    return Has(name) ? Number(name) : fallback;
  }

  int Integer(const std::string &name, int fallback) const
  {
    if (!Has(name))
    {
      return fallback;
    }
    const double v = Number(name);
    if (v != std::floor(v) || std::abs(v) > 1.0e9)
    {
      throw InputError("--" + name + " must be an integer");
    }
    return static_cast<int>(v);
  }

  // Config values fill flags the command line left unset.
  void Merge(const nlohmann::json &config)
  {
    if (!config.is_object())
    {
      throw InputError("config must be a JSON object");
    }
    for (const auto &[key, value] : config.items())
    {
      auto it = slots_.find(key);
      if (it == slots_.end())
      {
        throw InputError("unknown key '" + key + "'");
      }
      if (it->second.option->count() > 0)
      {
        continue;
      }
      if (it->second.is_switch)
      {
        if (!value.is_boolean())
        {
          throw InputError("config key '" + key + "' must be true or false");
        }
        it->second.from_config = value.get<bool>();
        continue;
      }
      if (value.is_string())
      {
        it->second.value = value.get<std::string>();
      }
      else if (value.is_number())
      {
        it->second.value = FormatShortest(value.get<double>());
      }
      else
      {
        throw InputError("config key '" + key + "' must be a string or number");
      }
      it->second.from_config = true;
    }
  }

private:
  struct Entry
  {
    std::string value;
    CLI::Option *option = nullptr;
    bool from_config = false;
    bool is_switch = false;
  };

  const Entry &Slot(const std::string &name) const
  {
    auto it = slots_.find(name);
    if (it == slots_.end())
    {
      throw std::logic_error("flag --" + name + " not registered");
    }
    return it->second;
  }

  CLI::App *app_;
  std::map<std::string, Entry> slots_;
};

std::vector<double> Grid(const Flags &f, double fmin, double fmax, int points)
{
  const int n = f.Integer("points", points);
  if (n < 1)
  {
    throw InputError("--points must be positive");
  }
  return network::LinearGrid(f.NumberOr("fmin", fmin), f.NumberOr("fmax", fmax),
                             static_cast<std::size_t>(n));
}

synthesis::RealizationMode Mode(const std::string &text)
{
  if (text == "ideal" || text == "ideal_inverter")
  {
    return synthesis::RealizationMode::IdealInverter;
  }
  if (text == "mutual" || text == "mutual_inductive")
  {
    return synthesis::RealizationMode::MutualInductive;
  }
  throw InputError("unknown mode '" + text + "'");
}

synthesis::FilterSpec Spec(const Flags &f)
{
  synthesis::FilterSpec spec;
  spec.poles = f.Integer("poles", 4);
  spec.f_center_hz = f.Number("fc");
  spec.bandwidth_hz = f.Number("bw");
  spec.ripple_db = f.NumberOr("ripple", 0.5);
  spec.port_impedance = f.NumberOr("z0", 50.0);
  spec.Validate();
  return spec;
}

void AddFilterFlags(Flags &f)
{
  f.Add("poles", "number of resonators (default 4)");
  f.Add("fc", "center frequency, Hz");
  f.Add("bw", "equiripple bandwidth, Hz");
  f.Add("ripple", "passband ripple, dB (default 0.5)");
  f.Add("z0", "port impedance, ohm (default 50)");
  f.Add("inductance", "resonator inductance, H (default 2n)");
  f.Add("mode", "ideal | mutual (default ideal)");
}

nlohmann::ordered_json BandJson(const network::BandReport &b)
{
  nlohmann::ordered_json j;
  j["f_center_hz"] = b.f_center;
  j["bandwidth_3db_hz"] = b.bandwidth_3db;
  j["lower_3db_hz"] = b.lower_3db;
  j["upper_3db_hz"] = b.upper_3db;
  j["bandwidth_ripple_hz"] = b.bandwidth_ripple;
  j["lower_ripple_hz"] = b.lower_ripple;
  j["upper_ripple_hz"] = b.upper_ripple;
  j["ripple_db"] = b.ripple_db;
  j["insertion_loss_min_db"] = b.insertion_loss_min_db;
  return j;
}

int Synthesize(const Flags &f, std::ostream &out)
{
  const auto spec = Spec(f);
  const auto result = synthesis::SynthesizeFilter(spec, Mode(f.StrOr("mode", "ideal")),
                                                  f.NumberOr("inductance", 2.0e-9));
  if (f.Has("out-plan"))
  {
    WriteText(f.Str("out-plan"), synthesis::PlanToJson(result.plan));
  }
  if (f.Has("out-netlist"))
  {
    WriteText(f.Str("out-netlist"), netlist::SerializeNetlist(result.netlist));
  }
  auto j = BandJson(result.band);
  j["iterations"] = result.iterations;
  out << j.dump(2) << "\n";
  return EXIT_OK;
}

int Simulate(const Flags &f, std::ostream &out)
{
  const auto n = netlist::ReadNetlistFile(f.Str("netlist"));
  const auto grid = Grid(f, 4.0e9, 10.0e9, 2001);
  const auto sweep = network::SParameters(n, grid);
  const network::Circuit circuit(n);
  if (f.Has("touchstone"))
  {
    if (circuit.NumPorts() != 2 || circuit.PortImpedance(1) != circuit.PortImpedance(2))
    {
      throw InputError("touchstone output needs exactly 2 ports with equal impedance");
    }
    std::ostringstream ts;
    network::WriteTouchstone(sweep, circuit.PortImpedance(1), ts);
    WriteText(f.Str("touchstone"), ts.str());
  }
  if (f.Has("csv"))
  {
    std::ostringstream csv;
    network::WriteSParameterCsv(sweep, csv);
    WriteText(f.Str("csv"), csv.str());
  }
  if (f.Has("y-csv"))
  {
    std::ostringstream csv;
    network::WriteAdmittanceCsv(network::InputAdmittance(n, f.Integer("port", 1), grid), csv);
    WriteText(f.Str("y-csv"), csv.str());
  }
  std::size_t failed = 0;
  for (const auto &v : sweep.values)
  {
    failed += v ? 0 : 1;
  }
  nlohmann::ordered_json j;
  j["points"] = sweep.Size();
  j["failed_points"] = failed;
  if (f.Has("metrics"))
  {
    j["band"] = BandJson(network::BandMetrics(circuit, grid));
  }
  out << j.dump(2) << "\n";
  return EXIT_OK;
}

double CSigma(const Flags &f)
{
  purcell::QubitParams q;
  if (f.Has("ec"))
  {
    q.ec_hz = f.Number("ec");
  }
  if (f.Has("csigma"))
  {
    q.c_sigma_f = f.Number("csigma");
  }
  return q.CSigma();
}

std::string T1Csv(const purcell::T1Sweep &t1, double f_r)
{
  std::string s = "delta_hz,t1_s\n";
  for (std::size_t i = 0; i < t1.Size(); ++i)
  {
    s += Num(t1.frequencies[i] - f_r) + "," +
         (t1.values[i] ? Num(*t1.values[i]) : std::string("nan")) + "\n";
  }
  return s;
}

int Purcell(const Flags &f, std::ostream &out)
{
  const double c_sigma = CSigma(f);
  if (f.Has("qf"))
  {
    // Single-pole reference over the detuning grid.
    const double f_r = f.Number("fr");
    const auto grid = Grid(f, f_r - 2.0e9, f_r - 0.5e9, 301);
    std::vector<double> deltas;
    for (double x : grid)
    {
      deltas.push_back(x - f_r);
    }
    const auto t1 = purcell::SinglePoleReference(f.Number("qf"), f_r, f.Number("kappa"),
                                                 f.Number("g"), deltas);
    std::string s = "delta_hz,t1_s\n";
    for (std::size_t i = 0; i < t1.size(); ++i)
    {
      s += Num(deltas[i]) + "," + Num(t1[i]) + "\n";
    }
    f.Has("out") ? WriteText(f.Str("out"), s) : void(out << s);
    return EXIT_OK;
  }

  netlist::Netlist with, without;
  double f_r = 0.0;
  bool fom = f.Has("bare");
  if (f.Has("netlist"))
  {
    with = netlist::ReadNetlistFile(f.Str("netlist"));
    if (fom)
    {
      without = netlist::ReadNetlistFile(f.Str("bare"));
    }
    f_r = f.Number("fr");
  }
  else
  {
    purcell::ReadoutTopology t;
    t.variant = purcell::ParseVariant(f.Str("topology"));
    t.f_r_hz = f.Number("fr");
    t.kappa_hz = f.Number("kappa");
    t.g_hz = f.Number("g");
    t.c_sigma_f = c_sigma;
    t.c_in_f = f.NumberOr("c-in", t.c_in_f);
    t.z0 = f.NumberOr("z0", t.z0);
    t.line_degrees = f.NumberOr("line-deg", t.line_degrees);
    if (f.Has("line-ref"))
    {
      t.line_ref_hz = f.Number("line-ref");
    }
    const std::string style = f.StrOr("coupling", "capacitive");
    if (style != "capacitive" && style != "inverter")
    {
      throw InputError("unknown coupling '" + style + "'");
    }
    t.coupling = style == "inverter" ? purcell::CouplingStyle::Inverter
                                     : purcell::CouplingStyle::Capacitive;
    t.filter_mode = Mode(f.StrOr("mode", "ideal"));
    std::optional<synthesis::CouplingPlan> plan;
    if (purcell::HasFilter(t.variant))
    {
      plan = f.Has("filter-plan")
                 ? synthesis::PlanFromJson(ReadText(f.Str("filter-plan")))
                 : synthesis::PlanCoupling(Spec(f), f.NumberOr("inductance", 2.0e-9));
    }
    with = purcell::BuildReadoutNetwork(t, plan).netlist;
    if (f.Has("out-netlist"))
    {
      WriteText(f.Str("out-netlist"), netlist::SerializeNetlist(with));
    }
    fom = f.Has("fom");
    if (fom)
    {
      auto bare = t;
      bare.variant = purcell::BareCounterpart(t.variant);
      without = purcell::BuildReadoutNetwork(bare).netlist;
    }
    f_r = t.f_r_hz;
  }
  const auto grid = Grid(f, f_r - 2.5e9, f_r + 2.5e9, 1001);
  const int port = f.Integer("port", 1);
  const auto t1 = purcell::T1Purcell(with, port, c_sigma, grid);
  std::string s;
  if (fom)
  {
    const auto curve =
        purcell::FomCurve(t1, purcell::T1Purcell(without, port, c_sigma, grid), f_r);
    s = "delta_hz,fom\n";
    for (const auto &p : curve)
    {
      if (p.fom)
      {
        s += Num(p.delta_hz) + "," + Num(*p.fom) + "\n";
      }
    }
  }
  else
  {
    s = T1Csv(t1, f_r);
  }
  f.Has("out") ? WriteText(f.Str("out"), s) : void(out << s);
  return EXIT_OK;
}

int Materials(const Flags &f, std::ostream &out)
{
  materials::SuperconductorModel m;
  if (f.Has("model"))
  {
    m = materials::ModelFromJson(ReadText(f.Str("model")));
  }
  m.tc_k = f.NumberOr("tc", m.tc_k);
  m.gap_ratio = f.NumberOr("gap-ratio", m.gap_ratio);
  m.sigma_n = f.NumberOr("sigma-n", m.sigma_n);
  m.thickness_m = f.NumberOr("thickness", m.thickness_m);
  m.temperature_k = f.NumberOr("temperature", m.temperature_k);
  if (f.Has("calibrate-lambda"))
  {
    m.sigma_n = materials::CalibrateSigmaN(f.Number("calibrate-lambda"),
                                           f.NumberOr("calibrate-f", 7.0e9), m);
  }
  if (f.Has("out-model"))
  {
    WriteText(f.Str("out-model"), materials::ModelToJson(m));
  }
  const auto grid = Grid(f, 4.0e9, 10.0e9, 13);
  std::string s = "freq_hz,sigma1_over_sigma_n,sigma2_over_sigma_n,lambda_eff_m,lk_sq_h\n";
  for (double freq : grid)
  {
    const auto sigma = materials::MbConductivity(freq, m);
    const double lambda = materials::EffectivePenetrationDepth(freq, m);
    s += Num(freq) + "," + Num(sigma.sigma1) + "," + Num(sigma.sigma2) + "," + Num(lambda) + "," +
         Num(materials::SheetKineticInductance(lambda, m.thickness_m)) + "\n";
  }
  f.Has("out") ? WriteText(f.Str("out"), s) : void(out << s);
  return EXIT_OK;
}

int Cpw(const Flags &f, std::ostream &out)
{
  cpw::CpwGeometry g;
  g.w = f.NumberOr("w", g.w);
  g.s = f.NumberOr("s", g.s);
  g.t = f.NumberOr("t", g.t);
  g.eps_r = f.NumberOr("eps-r", g.eps_r);
  g.substrate_h = f.NumberOr("substrate-h", g.substrate_h);
  const auto p = cpw::CpwLineParams(g, f.NumberOr("lk", 0.0));
  nlohmann::ordered_json j;
  j["z0_ohm"] = p.z0;
  j["eps_eff"] = p.eps_eff;
  j["l_per_m"] = p.l_per_m;
  j["c_per_m"] = p.c_per_m;
  j["phase_velocity_m_per_s"] = p.phase_velocity;
  const std::string mode = f.StrOr("resonator", "half");
  if (mode != "half" && mode != "quarter")
  {
    throw InputError("unknown resonator mode '" + mode + "'");
  }
  if (f.Has("f"))
  {
    j["resonator_length_m"] = cpw::ResonatorLength(
        f.Number("f"),
        mode == "half" ? cpw::ResonatorMode::HalfWave : cpw::ResonatorMode::QuarterWave, p);
  }
  const std::string format = f.StrOr("format", "json");
  if (format == "json")
  {
    out << j.dump(2) << "\n";
  }
  else if (format == "csv")
  {
    std::string head, row;
    for (const auto &[k, v] : j.items())
    {
      head += (head.empty() ? "" : ",") + k;
      row += (row.empty() ? "" : ",") + Num(v.get<double>());
    }
    out << head << "\n" << row << "\n";
  }
  else
  {
    throw InputError("unknown format '" + format + "'");
  }
  return EXIT_OK;
}

int Plan(const Flags &f, std::ostream &out)
{
  out << purcell::MultiplexCapacity(f.Number("bw"), f.Number("kappa"), f.NumberOr("spacing", 10.0))
      << "\n";
  return EXIT_OK;
}

}  // namespace

int Run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Purcell filter synthesis and readout analysis", "purcellkit"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "JSON file with default flag values");

  struct Command
  {
    CLI::App *app;
    std::unique_ptr<Flags> flags;
    int (*run)(const Flags &, std::ostream &);
  };
  std::vector<Command> commands;
  auto add = [&](const std::string &name, const std::string &help,
                 int (*run)(const Flags &, std::ostream &)) -> Flags &
  {
    CLI::App *sub = app.add_subcommand(name, help);
    commands.push_back({sub, std::make_unique<Flags>(sub), run});
    return *commands.back().flags;
  };

  {
    Flags &f = add("synthesize", "Chebyshev coupled-resonator filter synthesis", Synthesize);
    AddFilterFlags(f);
    f.Add("out-plan", "write the coupling plan (JSON)");
    f.Add("out-netlist", "write the realized netlist");
  }
  {
    Flags &f = add("simulate", "S-parameter sweep of a netlist", Simulate);
    f.Add("netlist", "input netlist");
    f.Add("fmin", "sweep start, Hz (default 4G)");
    f.Add("fmax", "sweep stop, Hz (default 10G)");
    f.Add("points", "sweep points (default 2001)");
    f.Add("touchstone", "write a Touchstone .s2p file");
    f.Add("csv", "write S11/S21 CSV");
    f.Add("y-csv", "write input admittance CSV for --port");
    f.Add("port", "port for --y-csv (default 1)");
    f.AddSwitch("metrics", "print passband metrics");
  }
  {
    Flags &f = add("purcell", "Purcell-limited T1 or FOM over detuning", Purcell);
    AddFilterFlags(f);
    f.Add("netlist", "analyze this netlist instead of a template");
    f.Add("bare", "netlist without the filter; switches output to FOM");
    f.Add("topology", "readout template name or alias fig3a..fig3e");
    f.Add("port", "qubit port (default 1)");
    f.Add("ec", "charging energy E_c/h, Hz");
    f.Add("csigma", "qubit capacitance, F");
    f.Add("fr", "readout resonator frequency, Hz");
    f.Add("kappa", "readout linewidth kappa/2pi, Hz");
    f.Add("g", "qubit-resonator coupling g/2pi, Hz");
    f.Add("c-in", "two-port input capacitor, F (default 30f)");
    f.Add("line-deg", "feed line segment length, degrees (default 180)");
    f.Add("line-ref", "reference frequency for --line-deg, Hz");
    f.Add("coupling", "capacitive | inverter (default capacitive)");
    f.Add("filter-plan", "coupling plan JSON for filtered templates");
    f.AddSwitch("fom", "emit FOM against the bare template");
    f.Add("qf", "single-pole filter Q; emits the reference T1 curve");
    f.Add("fmin", "sweep start, Hz");
    f.Add("fmax", "sweep stop, Hz");
    f.Add("points", "sweep points");
    f.Add("out", "output CSV (stdout when absent)");
    f.Add("out-netlist", "write the template netlist");
  }
  {
    Flags &f = add("materials", "Mattis-Bardeen film table over frequency", Materials);
    f.Add("model", "material record JSON");
    f.Add("tc", "critical temperature, K");
    f.Add("gap-ratio", "Delta_0 / (kB Tc)");
    f.Add("sigma-n", "normal-state conductivity, S/m");
    f.Add("thickness", "film thickness, m");
    f.Add("temperature", "temperature, K");
    f.Add("calibrate-lambda", "fit sigma_n to this lambda_eff, m");
    f.Add("calibrate-f", "calibration frequency, Hz (default 7G)");
    f.Add("fmin", "table start, Hz (default 4G)");
    f.Add("fmax", "table stop, Hz (default 10G)");
    f.Add("points", "table rows (default 13)");
    f.Add("out", "output CSV (stdout when absent)");
    f.Add("out-model", "write the material record JSON");
  }
  {
    Flags &f = add("cpw", "coplanar waveguide line parameters", Cpw);
    f.Add("w", "center width, m (default 10u)");
    f.Add("s", "gap, m (default 6u)");
    f.Add("t", "film thickness, m (default 200n)");
    f.Add("eps-r", "substrate permittivity (default 11.45)");
    f.Add("substrate-h", "substrate thickness, m (default infinite)");
    f.Add("lk", "kinetic sheet inductance, H/sq");
    f.Add("f", "resonator target frequency, Hz");
    f.Add("resonator", "half | quarter (default half)");
    f.Add("format", "json | csv (default json)");
  }
  {
    Flags &f = add("plan", "number of readout resonators that fit in a band", Plan);
    f.Add("bw", "filter bandwidth, Hz");
    f.Add("kappa", "target kappa/2pi, Hz");
    f.Add("spacing", "resonator spacing in units of kappa (default 10)");
  }

  try
  {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    for (auto &c : commands)
    {
      if (!c.app->parsed())
      {
        continue;
      }
      if (!config_path.empty())
      {
        nlohmann::json config;
        try
        {
          config = nlohmann::json::parse(ReadText(config_path));
        }
        catch (const nlohmann::json::exception &)
        {
          throw InputError("malformed config '" + config_path + "'");
        }
        c.flags->Merge(config);
      }
      return c.run(*c.flags, out);
    }
    throw InputError("no command given");
  }
  catch (const CLI::Success &e)
  {
    return app.exit(e, out, err);
  }
  catch (const CLI::ParseError &e)
  {
    err << "error: " << e.what() << "\n";
    return EXIT_USER;
  }
  catch (const InputError &e)
  {
    err << "error: " << e.what() << "\n";
    return EXIT_USER;
  }
  catch (const nlohmann::json::exception &e)
  {
    err << "error: " << e.what() << "\n";
    return EXIT_USER;
  }
  catch (const std::exception &e)
  {
    err << "error: " << e.what() << "\n";
    return EXIT_INTERNAL;
  }
}

}  // namespace purcellkit::cli
