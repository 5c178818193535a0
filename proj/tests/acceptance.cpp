// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

// One PASS/FAIL line per acceptance criterion; nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>
#include "purcellkit/cli.hpp"
#include "purcellkit/cpw.hpp"
#include "purcellkit/materials.hpp"
#include "purcellkit/netlist.hpp"
#include "purcellkit/network.hpp"
#include "purcellkit/purcell.hpp"
#include "purcellkit/synthesis.hpp"
#include "purcellkit/units.hpp"
#include "support/corpus.hpp"
#include "support/oracles.hpp"

using namespace purcellkit;

namespace
{

const synthesis::FilterSpec PF_C{4, 7.05e9, 850e6, 0.5, 50.0};
const synthesis::FilterSpec PF_M{4, 6.91e9, 970e6, 0.5, 50.0};

struct Outcome
{
  bool pass = true;
  std::string detail;

  void Require(bool ok, const std::string &what)
  {
    if (!ok)
    {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void Note(const std::string &what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string Fmt(const char *format, double a, double b = 0.0, double c = 0.0)
{
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point since)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

double S21Db(const network::Circuit &c, double f)
{
  return network::TransmissionDb(*c.SParameters(f));
}

double S11Db(const network::Circuit &c, double f)
{
  return 20.0 * std::log10(std::abs((*c.SParameters(f))(0, 0)));
}

netlist::Netlist IdealFilter(const synthesis::FilterSpec &spec)
{
  return synthesis::RealizeFilter(synthesis::PlanCoupling(spec),
                                  synthesis::RealizationMode::IdealInverter);
}

double T1At(const netlist::Netlist &n, double c, double f)
{
  return *purcell::T1Purcell(n, 1, c, std::vector<double>{f}).values[0];
}

Outcome SynthesisFidelity()
{
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const auto n = IdealFilter(PF_C);
  const auto grid = network::LinearGrid(4e9, 10e9, 2001);
  const auto sweep = network::SParameters(n, grid);
  const auto band = network::BandMetrics(network::Circuit(n), grid);
  const double elapsed = Seconds(start);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
  {
    const double a = synthesis::ChebyshevAttenuation(PF_C, grid[i]);
    if (a < 60.0)
    {
      o.Require(sweep.values[i].has_value(), "unsolved point");
      if (sweep.values[i])
      {
        worst = std::max(worst, std::abs(-network::TransmissionDb(*sweep.values[i]) - a));
      }
    }
  }
  const double center = std::sqrt(band.lower_ripple * band.upper_ripple);
  o.Require(worst < 0.1, Fmt("max |dA| %.3g dB", worst));
  o.Require(std::abs(center / PF_C.f_center_hz - 1) < 0.005, Fmt("f_center %.6g", center));
  o.Require(std::abs(band.bandwidth_ripple / PF_C.bandwidth_hz - 1) < 0.02,
            Fmt("bw %.6g", band.bandwidth_ripple));
  o.Require(elapsed < 5.0, Fmt("runtime %.2f s", elapsed));
  o.Note(Fmt("max |dA| %.2e dB, f_c %.5g GHz, bw %.5g MHz", worst, center / 1e9,
             band.bandwidth_ripple / 1e6));
  o.Note(Fmt("%.3f s", elapsed));
  return o;
}

Outcome Equiripple()
{
  Outcome o;
  for (const auto &spec : {PF_C, PF_M})
  {
    network::Circuit c(IdealFilter(spec));
    const double half = spec.bandwidth_hz / 2;
    const auto grid =
        network::LinearGrid(spec.f_center_hz - 1.2 * half, spec.f_center_hz + 1.2 * half, 801);
    std::vector<double> maxima;
    for (const auto &[f, db] : oracle::RefinedMinima([&](double f) { return S21Db(c, f); }, grid))
    {
      maxima.push_back(-db);
    }
    int zeros = 0;
    for (const auto &[f, db] : oracle::RefinedMinima([&](double f) { return S11Db(c, f); }, grid))
    {
      zeros += db < -40.0 ? 1 : 0;
    }
    const auto [lo, hi] = std::minmax_element(maxima.begin(), maxima.end());
    const double spread = maxima.empty() ? INFINITY : *hi - *lo;
    o.Require(maxima.size() == static_cast<std::size_t>(spec.poles - 1), "ripple maxima count");
    o.Require(spread < 0.02, Fmt("ripple spread %.3g dB", spread));
    o.Require(zeros == spec.poles, Fmt("%g reflection zeros", zeros));
    o.Note(Fmt("%.4g GHz: spread %.2e dB, %g zeros", spec.f_center_hz / 1e9, spread, zeros));
  }
  return o;
}

Outcome Rejection()
{
  Outcome o;
  const double oracle_db = synthesis::ChebyshevAttenuation(PF_C, 6.05e9);
  const double sim_db = -S21Db(network::Circuit(IdealFilter(PF_C)), 6.05e9);
  o.Require(std::abs(oracle_db - 40.0) <= 0.5, Fmt("oracle %.3f dB", oracle_db));
  o.Require(std::abs(sim_db - 40.0) <= 0.5, Fmt("simulated %.3f dB", sim_db));
  o.Note(Fmt("oracle %.3f dB, simulated %.3f dB", oracle_db, sim_db));
  return o;
}

Outcome SolverPhysics()
{
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  const auto grid = network::LinearGrid(0.5e9, 15e9, 60);
  double unitarity = 0.0, reciprocity = 0.0, min_re_y = INFINITY;
  int solved = 0;
  for (int i = 0; i < 100; ++i)
  {
    const auto n = oracle::RandomLossless(rng, 12);
    const auto sweep = network::SParameters(n, grid);
    for (const auto &s : sweep.values)
    {
      if (s)
      {
        ++solved;
        unitarity = std::max(unitarity, std::abs(std::norm((*s)(0, 0)) + std::norm((*s)(1, 0)) - 1));
        reciprocity = std::max(reciprocity, std::abs((*s)(0, 1) - (*s)(1, 0)));
      }
    }
    const auto lossy = oracle::RandomLossless(rng, 12, true);
    for (const auto &y : network::InputAdmittance(lossy, 1, grid).values)
    {
      if (y)
      {
        min_re_y = std::min(min_re_y, y->real());
      }
    }
  }
  const double elapsed = Seconds(start);
  o.Require(unitarity < 1e-9, Fmt("unitarity %.2e", unitarity));
  o.Require(reciprocity < 1e-9, Fmt("reciprocity %.2e", reciprocity));
  o.Require(min_re_y >= -1e-12, Fmt("min Re Y %.2e", min_re_y));
  o.Require(solved > 0, "nothing solved");
  o.Require(elapsed < 30.0, Fmt("runtime %.2f s", elapsed));
  o.Note(Fmt("%g points, unitarity %.1e, reciprocity %.1e", solved, unitarity, reciprocity));
  o.Note(Fmt("min Re Y %.1e S, %.2f s", min_re_y, elapsed));
  return o;
}

purcell::ReadoutTopology SinglePortReference()
{
  purcell::ReadoutTopology t;
  t.f_r_hz = 7.08e9;
  t.kappa_hz = 30.8e6;
  t.g_hz = 175e6;
  t.c_sigma_f = purcell::QubitCapacitance(258e6);
  return t;
}

// Ratio and pooled log-log slope over |delta| in [5g, 6g] on both sides.
void DispersiveWindow(const netlist::Netlist &net, const purcell::ReadoutTopology &t,
                      double &worst_ratio, double &slope)
{
  std::vector<double> x, y;
  worst_ratio = 0.0;
  for (double sign : {-1.0, 1.0})
  {
    for (int i = 0; i <= 10; ++i)
    {
      const double delta = sign * (5.0 + 0.1 * i) * t.g_hz;
      const double t1 = T1At(net, t.c_sigma_f, t.f_r_hz + delta);
      const double ref = purcell::DispersivePurcellRate(t.kappa_hz, t.g_hz, delta).t1;
      worst_ratio = std::max(worst_ratio, std::abs(t1 / ref - 1));
      x.push_back(std::log(std::abs(delta)));
      y.push_back(std::log(t1));
    }
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  slope = sxy / sxx;
}

Outcome DispersiveLimit()
{
  Outcome o;
  auto t = SinglePortReference();
  t.coupling = purcell::CouplingStyle::Inverter;
  const auto built = purcell::BuildReadoutNetwork(t);
  double ratio = 0.0, slope = 0.0;
  DispersiveWindow(built.netlist, t, ratio, slope);
  o.Require(ratio < 0.2, Fmt("max |T1/T1_disp - 1| %.3f", ratio));
  o.Require(std::abs(slope - 2.0) <= 0.1, Fmt("slope %.3f", slope));
  o.Note(Fmt("kappa %.4g MHz, max deviation %.1f%%, slope %.3f", built.kappa_hz / 1e6,
             100 * ratio, slope));

  t.coupling = purcell::CouplingStyle::Capacitive;
  DispersiveWindow(purcell::BuildReadoutNetwork(t).netlist, t, ratio, slope);
  o.Note(Fmt("capacitive coupling (info): deviation %.1f%%, slope %.3f", 100 * ratio, slope));
  return o;
}

Outcome FilterProtection()
{
  Outcome o;
  const auto plan = synthesis::PlanCoupling(PF_C);
  auto t = SinglePortReference();
  const auto bare = purcell::BuildReadoutNetwork(t).netlist;
  t.variant = purcell::ReadoutVariant::SinglePortFiltered;
  const auto filtered = purcell::BuildReadoutNetwork(t, plan).netlist;
  const std::vector<double> at{t.f_r_hz - 1e9, t.f_r_hz + 1e9};
  const auto fom = purcell::FomCurve(filtered, bare, t.c_sigma_f, t.f_r_hz, at);
  for (const auto &p : fom)
  {
    o.Require(p.fom && *p.fom >= 100.0, Fmt("FOM at %+.0f MHz below 100", p.delta_hz / 1e6));
  }
  if (fom[0].fom && fom[1].fom)
  {
    o.Note(Fmt("single-port FOM %.3g (-1 GHz), %.3g (+1 GHz)", *fom[0].fom, *fom[1].fom));
  }

  purcell::ReadoutTopology two;
  two.c_sigma_f = purcell::QubitCapacitance(263e6);
  two.variant = purcell::ReadoutVariant::TwoPortOutFiltered;
  const auto out = purcell::BuildReadoutNetwork(two, plan).netlist;
  two.variant = purcell::ReadoutVariant::TwoPortIoFiltered;
  const auto io = purcell::BuildReadoutNetwork(two, plan).netlist;
  const double f = two.f_r_hz - 2e9;
  const double t1_out = T1At(out, two.c_sigma_f, f);
  const double t1_io = T1At(io, two.c_sigma_f, f);
  o.Require(t1_io >= t1_out, "io-filtered below out-filtered");
  o.Note(Fmt("two-port T1 at -2 GHz: io %.3g s, out %.3g s", t1_io, t1_out));
  return o;
}

Outcome Materials()
{
  Outcome o;
  materials::SuperconductorModel cold;
  cold.temperature_k = 0.01 * cold.tc_k;
  const double f = 7e9;
  const double limit = constants::pi * materials::GapEnergy(cold).energy_j /
                       (constants::hbar * AngularFrequency(f));
  const double s2 = materials::MbConductivity(f, cold).sigma2;
  o.Require(std::abs(s2 / limit - 1) < 0.005, Fmt("sigma2 %.5g vs %.5g", s2, limit));

  const materials::SuperconductorModel nb;
  const double lambda = materials::EffectivePenetrationDepth(f, nb);
  o.Require(std::abs(lambda / 142e-9 - 1) < 0.01, Fmt("lambda %.4g nm", lambda * 1e9));
  const double lk = materials::SheetKineticInductance(142e-9, 200e-9);
  o.Require(std::abs(lk / 0.201e-12 - 1) <= 0.005, Fmt("Lk %.4g pH", lk * 1e12));
  o.Note(Fmt("sigma2 limit error %.2e, lambda %.2f nm, Lk %.4f pH/sq", s2 / limit - 1,
             lambda * 1e9, lk * 1e12));
  return o;
}

Outcome Cpw()
{
  Outcome o;
  const cpw::CpwGeometry g;
  const auto p = cpw::CpwLineParams(g);
  const double len = cpw::ResonatorLength(7e9, cpw::ResonatorMode::HalfWave, p);
  o.Require(g.w == 10e-6 && g.s == 6e-6 && g.eps_r == 11.45, "unexpected default geometry");
  o.Require(std::abs(p.z0 - 50.9) <= 0.2, Fmt("Z0 %.3f", p.z0));
  o.Require(std::abs(p.eps_eff - 6.225) <= 0.001, Fmt("eps_eff %.4f", p.eps_eff));
  o.Require(std::abs(len - 8.58e-3) <= 0.02e-3, Fmt("length %.4f mm", len * 1e3));
  o.Note(Fmt("Z0 %.3f ohm, eps_eff %.4f, half-wave %.4f mm", p.z0, p.eps_eff, len * 1e3));
  return o;
}

Outcome Multiplexing()
{
  Outcome o;
  const int a = purcell::MultiplexCapacity(794e6, 10e6, 10);
  const int b = purcell::MultiplexCapacity(915e6, 10e6, 10);
  o.Require(a == 7 && b == 9, Fmt("got %g and %g", a, b));
  o.Note(Fmt("%g and %g resonators", a, b));
  return o;
}

std::string Slurp(const std::filesystem::path &p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome Plumbing()
{
  Outcome o;
  int identical = 0;
  for (const auto &text : corpus::NETLISTS)
  {
    const auto n = netlist::ParseNetlist(text);
    const std::string canonical = netlist::SerializeNetlist(n);
    const auto back = netlist::ParseNetlist(canonical);
    identical += back == n && netlist::SerializeNetlist(back) == canonical ? 1 : 0;
  }
  o.Require(identical == static_cast<int>(corpus::NETLISTS.size()),
            Fmt("%g of %g netlists round trip", identical, corpus::NETLISTS.size()));

  const auto sweep = network::SParameters(IdealFilter(PF_C), network::LinearGrid(4e9, 10e9, 2001));
  std::stringstream ts;
  network::WriteTouchstone(sweep, 50.0, ts);
  const auto points = oracle::ReadTouchstone(ts, nullptr);
  double worst = points.size() == sweep.Size() ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < std::min(points.size(), sweep.Size()); ++i)
  {
    const auto &s = *sweep.values[i];
    worst = std::max({worst, std::abs(points[i].f - sweep.frequencies[i]),
                      std::abs(points[i].s11 - s(0, 0)), std::abs(points[i].s21 - s(1, 0)),
                      std::abs(points[i].s12 - s(0, 1)), std::abs(points[i].s22 - s(1, 1))});
  }
  o.Require(worst < 1e-9, Fmt("touchstone error %.2e", worst));

  const auto dir = std::filesystem::temp_directory_path() /
                   ("purcellkit_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::string outputs[2];
  for (int pass = 0; pass < 2; ++pass)
  {
    const std::string tag = (dir / ("run" + std::to_string(pass))).string();
    std::ostringstream out, err;
    const int code = cli::Run({"synthesize", "--fc", "7.05G", "--bw", "850M", "--out-netlist",
                               tag + ".ckt"},
                              out, err);
    std::ostringstream sim_out, sim_err;
    const int sim = cli::Run({"simulate", "--netlist", tag + ".ckt", "--touchstone",
                              tag + ".s2p", "--metrics"},
                             sim_out, sim_err);
    o.Require(code == 0 && sim == 0, "cli run failed: " + err.str() + sim_err.str());
    outputs[pass] = out.str() + Slurp(tag + ".ckt") + sim_out.str() + Slurp(tag + ".s2p");
  }
  std::filesystem::remove_all(dir);
  o.Require(!outputs[0].empty() && outputs[0] == outputs[1], "cli outputs differ");
  o.Note(Fmt("%g/%g round trips, touchstone error %.1e", identical, corpus::NETLISTS.size(),
             worst));
  o.Note(std::to_string(outputs[0].size()) + " cli bytes identical");
  return o;
}

}  // namespace

int main()
{
  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
      {"synthesis fidelity", SynthesisFidelity},
      {"equiripple", Equiripple},
      {"out-of-band rejection", Rejection},
      {"solver physics", SolverPhysics},
      {"dispersive limit", DispersiveLimit},
      {"filter protection", FilterProtection},
      {"materials", Materials},
      {"cpw", Cpw},
      {"multiplexing", Multiplexing},
      {"plumbing", Plumbing},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i)
  {
    Outcome o;
    try
    {
      o = criteria[i].second();
    }
    catch (const std::exception &e)
    {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
  }
  return failed == 0 ? 0 : 1;
}
