// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#include "purcellkit/synthesis.hpp"

#include <cmath>
#include <string>
#include <json.hpp>
#include "purcellkit/error.hpp"
#include "purcellkit/units.hpp"

namespace purcellkit::synthesis
{

using netlist::Netlist;

namespace
{

constexpr int MAX_DESIGN_ITERATIONS = 5;
constexpr double DESIGN_TOLERANCE = 2.0e-3;
constexpr std::size_t DESIGN_GRID_POINTS = 2001;

std::string Pair(int i, int j)
{
  return std::to_string(i) + "_" + std::to_string(j);
}

[[noreturn]] void Unrealizable(int i)
{
  throw InputError("unrealizable coupling between resonators " + std::to_string(i) + "," +
                   std::to_string(i + 1));
}

void CheckPlan(const CouplingPlan &plan)
{
  const auto n = static_cast<std::size_t>(plan.poles);
  if (plan.poles < 1 || plan.resonators.size() != n || plan.k_adj.size() != n - 1)
  {
    throw InputError("coupling plan is inconsistent with its pole count");
  }
  if (!(plan.f_center_hz > 0.0) || !(plan.qe_in > 0.0) || !(plan.qe_out > 0.0))
  {
    throw InputError("coupling plan needs positive f_center, qe_in and qe_out");
  }
  for (const auto &r : plan.resonators)
  {
    if (!(r.l_h > 0.0) || !(r.c_f > 0.0))
    {
      throw InputError("coupling plan resonators need positive L and C");
    }
  }
  for (std::size_t i = 0; i < plan.k_adj.size(); ++i)
  {
    if (!(plan.k_adj[i] > 0.0))
    {
      throw InputError("coupling coefficients must be positive");
    }
    if (!(plan.k_adj[i] < 1.0))
    {
      Unrealizable(static_cast<int>(i) + 1);
    }
  }
}

Netlist RealizeInverter(const CouplingPlan &plan, double z0)
{
  const int n = plan.poles;
  const double w0 = AngularFrequency(plan.f_center_hz);
  Netlist out;
  out.elements.push_back(netlist::MakePort("P1", "in", "0", z0, 1));
  auto node = [&](int i)
  { return i == 0 ? std::string("in") : i == n + 1 ? std::string("out") : "r" + std::to_string(i); };
  auto b = [&](int i) { return w0 * plan.resonators[static_cast<std::size_t>(i - 1)].c_f; };

  out.elements.push_back(
      netlist::MakeInverter("J" + Pair(0, 1), node(0), node(1), std::sqrt(b(1) / (z0 * plan.qe_in))));
  for (int i = 1; i <= n; ++i)
  {
    const auto &r = plan.resonators[static_cast<std::size_t>(i - 1)];
    out.elements.push_back(netlist::MakeInductor("L" + std::to_string(i), node(i), "0", r.l_h));
    out.elements.push_back(netlist::MakeCapacitor("C" + std::to_string(i), node(i), "0", r.c_f));
    if (i < n)
    {
      const double j = plan.k_adj[static_cast<std::size_t>(i - 1)] * std::sqrt(b(i) * b(i + 1));
      out.elements.push_back(netlist::MakeInverter("J" + Pair(i, i + 1), node(i), node(i + 1), j));
    }
  }
  out.elements.push_back(netlist::MakeInverter("J" + Pair(n, n + 1), node(n), node(n + 1),
                                               std::sqrt(b(n) / (z0 * plan.qe_out))));
  out.elements.push_back(netlist::MakePort("P2", "out", "0", z0, 2));
  return out;
}

// Inverse of the tridiagonal inductance matrix built from neighbour coefficients `kk`.
Eigen::MatrixXd InverseInductance(const CouplingPlan &plan, const std::vector<double> &kk)
{
  const auto n = static_cast<Eigen::Index>(plan.poles);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    l(i, i) = plan.resonators[static_cast<std::size_t>(i)].l_h;
  }
  for (Eigen::Index i = 0; i + 1 < n; ++i)
  {
    const double m = kk[static_cast<std::size_t>(i)] * std::sqrt(l(i, i) * l(i + 1, i + 1));
    l(i, i + 1) = l(i + 1, i) = m;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(l);
  if (llt.info() != Eigen::Success)
  {
    // Report the strongest coupling as the culprit.
    std::size_t worst = 0;
    for (std::size_t i = 1; i < kk.size(); ++i)
    {
      if (kk[i] > kk[worst])
      {
        worst = i;
      }
    }
    Unrealizable(static_cast<int>(worst) + 1);
  }
  return llt.solve(Eigen::MatrixXd::Identity(n, n));
}

// Solves for the K element values whose normalized inverse-inductance couplings equal k_adj.
std::vector<double> SolveMutualCoefficients(const CouplingPlan &plan)
{
  std::vector<double> kk = plan.k_adj;
  for (int it = 0; it < 200; ++it)
  {
    const Eigen::MatrixXd gamma = InverseInductance(plan, kk);
    double change = 0.0;
    for (std::size_t i = 0; i < kk.size(); ++i)
    {
      const auto a = static_cast<Eigen::Index>(i);
      const double achieved = -gamma(a, a + 1) / std::sqrt(gamma(a, a) * gamma(a + 1, a + 1));
      const double next = kk[i] * plan.k_adj[i] / achieved;
      change = std::max(change, std::abs(next / kk[i] - 1.0));
      kk[i] = next;
      if (!(kk[i] < 1.0))
      {
        Unrealizable(static_cast<int>(i) + 1);
      }
    }
    if (change < 1.0e-14)
    {
      break;
    }
  }
  return kk;
}

Netlist RealizeMutual(const CouplingPlan &plan, double z0)
{
  const int n = plan.poles;
  const double w0 = AngularFrequency(plan.f_center_hz);
  const std::vector<double> kk = SolveMutualCoefficients(plan);
  const Eigen::MatrixXd gamma = InverseInductance(plan, kk);

  std::vector<double> c(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
  {
    c[static_cast<std::size_t>(i)] = gamma(i, i) / (w0 * w0);
  }
  const SeriesCoupling in = SizeCouplingInductor(w0 * c.front(), w0, plan.qe_in, z0);
  const SeriesCoupling out_c = SizeCouplingInductor(w0 * c.back(), w0, plan.qe_out, z0);
  c.front() += in.compensation_c;
  c.back() += out_c.compensation_c;

  Netlist out;
  out.elements.push_back(netlist::MakePort("P1", "in", "0", z0, 1));
  out.elements.push_back(netlist::MakeInductor("LIN", "in", "r1", in.inductance));
  for (int i = 1; i <= n; ++i)
  {
    const std::string r = "r" + std::to_string(i);
    out.elements.push_back(netlist::MakeInductor(
        "L" + std::to_string(i), r, "0", plan.resonators[static_cast<std::size_t>(i - 1)].l_h));
    out.elements.push_back(
        netlist::MakeCapacitor("C" + std::to_string(i), r, "0", c[static_cast<std::size_t>(i - 1)]));
  }
  for (int i = 1; i < n; ++i)
  {
    out.elements.push_back(netlist::MakeCoupling("K" + Pair(i, i + 1), "L" + std::to_string(i),
                                                 "L" + std::to_string(i + 1),
                                                 kk[static_cast<std::size_t>(i - 1)]));
  }
  out.elements.push_back(
      netlist::MakeInductor("LOUT", "r" + std::to_string(n), "out", out_c.inductance));
  out.elements.push_back(netlist::MakePort("P2", "out", "0", z0, 2));
  return out;
}

// Geometric center and width of the measured equiripple band, falling back to the 3 dB band
// for single-pole responses that have no interior valley.
std::pair<double, double> MeasuredBand(const network::BandReport &r)
{
  if (r.bandwidth_ripple > 0.0)
  {
    return {std::sqrt(r.lower_ripple * r.upper_ripple), r.bandwidth_ripple};
  }
  return {std::sqrt(r.lower_3db * r.upper_3db), r.bandwidth_3db};
}

// One-dimensional secant update towards `target`; the first step assumes proportionality.
struct Secant
{
  double x_prev = 0.0;
  double y_prev = 0.0;
  bool has_prev = false;

  double Next(double x, double y, double target)
  {
    double next = x * target / y;
    if (has_prev && y != y_prev)
    {
      const double candidate = x + (target - y) * (x - x_prev) / (y - y_prev);
      if (candidate > 0.0)
      {
        next = candidate;
      }
    }
    x_prev = x;
    y_prev = y;
    has_prev = true;
    return next;
  }
};

}  // namespace

void FilterSpec::Validate() const
{
  if (poles < 1)
  {
    throw InputError("filter needs at least one pole");
  }
  if (!(f_center_hz > 0.0) || !std::isfinite(f_center_hz))
  {
    throw InputError("center frequency must be positive");
  }
  if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz))
  {
    throw InputError("bandwidth must be positive");
  }
  if (!(ripple_db > 0.0) || !std::isfinite(ripple_db))
  {
    throw InputError("ripple must be positive");
  }
  if (!(port_impedance > 0.0) || !std::isfinite(port_impedance))
  {
    throw InputError("port impedance must be positive");
  }
  const double fbw = FractionalBandwidth();
  if (!(fbw > 0.0 && fbw < 0.5))
  {
    throw InputError("fractional bandwidth must lie in (0, 0.5)");
  }
}

std::vector<double> ChebyshevPrototype(int poles, double ripple_db)
{
  if (poles < 1)
  {
    throw InputError("filter needs at least one pole");
  }
  if (!(ripple_db > 0.0) || !std::isfinite(ripple_db))
  {
    throw InputError("ripple must be positive");
  }
  const int n = poles;
  const double beta = std::log(1.0 / std::tanh(ripple_db * std::log(10.0) / 40.0));
  const double gamma = std::sinh(beta / (2.0 * n));
  auto a = [&](int k) { return std::sin((2.0 * k - 1.0) * constants::pi / (2.0 * n)); };
  auto b = [&](int k)
  {
    const double s = std::sin(k * constants::pi / n);
    return gamma * gamma + s * s;
  };
  std::vector<double> g(static_cast<std::size_t>(n) + 2);
  g[0] = 1.0;
  g[1] = 2.0 * a(1) / gamma;
  for (int k = 2; k <= n; ++k)
  {
    g[static_cast<std::size_t>(k)] =
        4.0 * a(k - 1) * a(k) / (b(k - 1) * g[static_cast<std::size_t>(k - 1)]);
  }
  if (n % 2 == 0)
  {
    const double ct = 1.0 / std::tanh(beta / 4.0);
    g.back() = ct * ct;
  }
  else
  {
    g.back() = 1.0;
  }
  return g;
}

CouplingPlan PlanCoupling(const FilterSpec &spec, double resonator_inductance)
{
  spec.Validate();
  if (!(resonator_inductance > 0.0) || !std::isfinite(resonator_inductance))
  {
    throw InputError("resonator inductance must be positive");
  }
  CouplingPlan plan;
  plan.poles = spec.poles;
  plan.f_center_hz = spec.f_center_hz;
  plan.bandwidth_hz = spec.bandwidth_hz;
  plan.ripple_db = spec.ripple_db;
  plan.g = ChebyshevPrototype(spec.poles, spec.ripple_db);
  const double fbw = spec.FractionalBandwidth();
  const auto n = static_cast<std::size_t>(spec.poles);
  for (std::size_t i = 1; i < n; ++i)
  {
    plan.k_adj.push_back(fbw / std::sqrt(plan.g[i] * plan.g[i + 1]));
  }
  plan.qe_in = plan.g[0] * plan.g[1] / fbw;
  plan.qe_out = plan.g[n] * plan.g[n + 1] / fbw;
  const double w0 = AngularFrequency(spec.f_center_hz);
  const double c = 1.0 / (w0 * w0 * resonator_inductance);
  plan.resonators.assign(n, Resonator{resonator_inductance, c});
  return plan;
}

SeriesCoupling SizeCouplingInductor(double b, double w0, double qe, double z0)
{
  if (!(b > 0.0) || !(w0 > 0.0) || !(qe > 0.0) || !(z0 > 0.0))
  {
    throw InputError("coupling inductor sizing needs positive inputs");
  }
  // With X = w0 Ls in series with z0: G = z0/D, D = z0^2 + X^2, and the slope parameter of the
  // compensated resonator grows to b + X^3/D^2.
  auto qe_of = [&](double x)
  {
    const double d = z0 * z0 + x * x;
    return (b + x * x * x / (d * d)) * d / z0;
  };
  if (!(qe > qe_of(0.0)))
  {
    throw InputError("external Q too low for a series coupling inductor");
  }
  double lo = 0.0;
  double hi = z0;
  while (qe_of(hi) < qe)
  {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1.0e-15 * hi; ++it)
  {
    const double mid = 0.5 * (lo + hi);
    (qe_of(mid) < qe ? lo : hi) = mid;
  }
  const double x = 0.5 * (lo + hi);
  const double d = z0 * z0 + x * x;
  return {x / w0, x / (d * w0)};
}

Netlist RealizeFilter(const CouplingPlan &plan, RealizationMode mode, double port_impedance)
{
  CheckPlan(plan);
  if (!(port_impedance > 0.0))
  {
    throw InputError("port impedance must be positive");
  }
  Netlist n = mode == RealizationMode::IdealInverter ? RealizeInverter(plan, port_impedance)
                                                      : RealizeMutual(plan, port_impedance);
  const auto diags = netlist::ValidateNetlist(n);
  if (!diags.empty())
  {
    throw NumericalError("realized filter failed validation: " + diags.front().message);
  }
  return n;
}

double ChebyshevAttenuation(const FilterSpec &spec, double f_hz)
{
  spec.Validate();
  if (!(f_hz > 0.0))
  {
    throw InputError("frequency must be positive");
  }
  const double eps2 = std::pow(10.0, spec.ripple_db / 10.0) - 1.0;
  const double omega =
      (f_hz / spec.f_center_hz - spec.f_center_hz / f_hz) / spec.FractionalBandwidth();
  const double x = std::abs(omega);
  const double t = x <= 1.0 ? std::cos(spec.poles * std::acos(x))
                            : std::cosh(spec.poles * std::acosh(x));
  return 10.0 * std::log10(1.0 + eps2 * t * t);
}

SynthesisResult SynthesizeFilter(const FilterSpec &spec, RealizationMode mode,
                                 double resonator_inductance)
{
  spec.Validate();
  FilterSpec design = spec;
  Secant center, width;
  SynthesisResult result;
  for (int it = 1;; ++it)
  {
    result.plan = PlanCoupling(design, resonator_inductance);
    result.netlist = RealizeFilter(result.plan, mode, spec.port_impedance);
    const double fbw = spec.FractionalBandwidth();
    const auto grid = network::LinearGrid(spec.f_center_hz * std::exp(-3.0 * fbw),
                                          spec.f_center_hz * std::exp(3.0 * fbw),
                                          DESIGN_GRID_POINTS);
    result.band = network::BandMetrics(network::Circuit(result.netlist), grid);
    result.iterations = it;
    const auto [fc, bw] = MeasuredBand(result.band);
    const bool converged = std::abs(fc / spec.f_center_hz - 1.0) < DESIGN_TOLERANCE &&
                           std::abs(bw / spec.bandwidth_hz - 1.0) < DESIGN_TOLERANCE;
    if (converged || it >= MAX_DESIGN_ITERATIONS || spec.poles == 1)
    {
      break;
    }
    design.f_center_hz = center.Next(design.f_center_hz, fc, spec.f_center_hz);
    design.bandwidth_hz = width.Next(design.bandwidth_hz, bw, spec.bandwidth_hz);
    design.Validate();
  }
  return result;
}

std::string PlanToJson(const CouplingPlan &plan)
{
  nlohmann::ordered_json j;
  j["poles"] = plan.poles;
  j["f_center_hz"] = plan.f_center_hz;
  j["bandwidth_hz"] = plan.bandwidth_hz;
  j["ripple_db"] = plan.ripple_db;
  j["g"] = plan.g;
  j["k_adj"] = plan.k_adj;
  j["qe_in"] = plan.qe_in;
  j["qe_out"] = plan.qe_out;
  j["resonators"] = nlohmann::ordered_json::array();
  for (const auto &r : plan.resonators)
  {
    j["resonators"].push_back({{"l_h", r.l_h}, {"c_f", r.c_f}});
  }
  return j.dump(2) + "\n";
}

CouplingPlan PlanFromJson(std::string_view text)
{
  try
  {
    const auto j = nlohmann::json::parse(text);
    CouplingPlan plan;
    plan.poles = j.at("poles").get<int>();
    plan.f_center_hz = j.at("f_center_hz").get<double>();
    plan.bandwidth_hz = j.at("bandwidth_hz").get<double>();
    plan.ripple_db = j.at("ripple_db").get<double>();
    plan.g = j.at("g").get<std::vector<double>>();
    plan.k_adj = j.at("k_adj").get<std::vector<double>>();
    plan.qe_in = j.at("qe_in").get<double>();
    plan.qe_out = j.at("qe_out").get<double>();
    for (const auto &r : j.at("resonators"))
    {
      plan.resonators.push_back({r.at("l_h").get<double>(), r.at("c_f").get<double>()});
    }
    CheckPlan(plan);
    return plan;
  }
  catch (const nlohmann::json::exception &e)
  {
    throw InputError(std::string("malformed plan: ") + e.what());
  }
}

}  // namespace purcellkit::synthesis
