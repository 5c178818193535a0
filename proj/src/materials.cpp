// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#include "purcellkit/materials.hpp"

#include <cmath>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>
#include "purcellkit/error.hpp"
#include "purcellkit/units.hpp"

namespace purcellkit::materials
{

namespace
{

constexpr double SIGMA_N_MIN = 1.0e5;
constexpr double SIGMA_N_MAX = 1.0e9;

// Quasiparticle tail cut at E - Delta = 50 kT (occupation below e^-50).
constexpr double TAIL_KT = 50.0;

// Fermi occupation at energy e for temperature t, both in units of Delta.
double Fermi(double e, double t)
{
  if (t <= 0.0)
  {
    return e < 0.0 ? 1.0 : 0.0;
  }
  return 1.0 / (std::exp(e / t) + 1.0);
}

template <typename F>
double Integrate(F f, double a, double b, double rel_tol)
{
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, rel_tol);
}

void CheckModel(const SuperconductorModel &m)
{
  if (!(m.tc_k > 0.0) || !(m.gap_ratio > 0.0) || !(m.temperature_k >= 0.0))
  {
    throw InputError("superconductor model needs positive Tc and gap ratio, T >= 0");
  }
}

}  // namespace

Gap GapEnergy(const SuperconductorModel &m)
{
  CheckModel(m);
  if (m.temperature_k >= m.tc_k)
  {
    return {0.0, true};
  }
  const double delta0 = m.gap_ratio * constants::kB * m.tc_k;
  if (m.temperature_k == 0.0)
  {
    return {delta0, false};
  }
  return {delta0 * std::tanh(1.74 * std::sqrt(m.tc_k / m.temperature_k - 1.0)), false};
}

ConductivityRatio MbConductivity(double f_hz, const SuperconductorModel &m, double rel_tol)
{
  if (!(f_hz > 0.0))
  {
    throw InputError("frequency must be positive");
  }
  const Gap gap = GapEnergy(m);
  if (gap.normal_state)
  {
    throw InputError("normal state: temperature must be below Tc");
  }
  // Everything below is in units of Delta.
  const double x = constants::hbar * AngularFrequency(f_hz) / gap.energy_j;
  const double t = constants::kB * m.temperature_k / gap.energy_j;
  if (!(x < 2.0))
  {
    throw InputError("pair-breaking regime unsupported");
  }

  ConductivityRatio out;
  // sigma1: E = 1 + u^2 removes the 1/sqrt(E - 1) edge.
  if (t > 0.0)
  {
    auto s1 = [&](double u)
    {
      const double e = 1.0 + u * u;
      const double ex = e + x;
      const double occ = Fermi(e, t) - Fermi(ex, t);
      return 2.0 * occ * (e * e + 1.0 + x * e) /
             (std::sqrt(e + 1.0) * std::sqrt(ex * ex - 1.0));
    };
    out.sigma1 = (2.0 / x) * Integrate(s1, 0.0, std::sqrt(TAIL_KT * t), rel_tol);
  }
  // sigma2: E runs over [1 - x, 1]; E = a + (1 - a)(1 - cos th)/2 removes both edges.
  const double a = 1.0 - x;
  auto s2 = [&](double th)
  {
    const double e = a + (1.0 - a) * 0.5 * (1.0 - std::cos(th));
    const double ex = e + x;
    return (1.0 - 2.0 * Fermi(ex, t)) * (e * e + 1.0 + x * e) /
           (std::sqrt(1.0 + e) * std::sqrt(ex + 1.0));
  };
  out.sigma2 = Integrate(s2, 0.0, constants::pi, rel_tol) / x;
  return out;
}

double EffectivePenetrationDepth(double f_hz, const SuperconductorModel &m)
{
  if (!(m.sigma_n > 0.0))
  {
    throw InputError("sigma_n must be positive");
  }
  const double sigma2 = MbConductivity(f_hz, m).sigma2 * m.sigma_n;
  return std::sqrt(1.0 / (constants::mu0 * AngularFrequency(f_hz) * sigma2));
}

double CalibrateSigmaN(double target_lambda_m, double f_hz, const SuperconductorModel &m)
{
  const double ratio = MbConductivity(f_hz, m).sigma2;
  const double w = AngularFrequency(f_hz);
  auto lambda = [&](double sigma_n) { return std::sqrt(1.0 / (constants::mu0 * w * ratio * sigma_n)); };
  // lambda falls with sigma_n.
  if (!(target_lambda_m > 0.0) || target_lambda_m > lambda(SIGMA_N_MIN) ||
      target_lambda_m < lambda(SIGMA_N_MAX))
  {
    throw InputError("no sigma_n bracket within [1e5, 1e9] S/m for the target lambda");
  }
  double lo = std::log(SIGMA_N_MIN);
  double hi = std::log(SIGMA_N_MAX);
  for (int it = 0; it < 200 && hi - lo > 1.0e-13; ++it)
  {
    const double mid = 0.5 * (lo + hi);
    (lambda(std::exp(mid)) > target_lambda_m ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

double SheetKineticInductance(double lambda_m, double thickness_m)
{
  if (!(lambda_m > 0.0) || !(thickness_m > 0.0))
  {
    throw InputError("penetration depth and thickness must be positive");
  }
  return constants::mu0 * lambda_m / std::tanh(thickness_m / lambda_m);
}

std::string ModelToJson(const SuperconductorModel &m)
{
  nlohmann::ordered_json j;
  j["tc_k"] = m.tc_k;
  j["gap_ratio"] = m.gap_ratio;
  j["sigma_n_s_per_m"] = m.sigma_n;
  j["thickness_m"] = m.thickness_m;
  j["temperature_k"] = m.temperature_k;
  return j.dump(2) + "\n";
}

SuperconductorModel ModelFromJson(std::string_view text)
{
  try
  {
    const auto j = nlohmann::json::parse(text);
    SuperconductorModel m;
    for (const auto &[key, value] : j.items())
    {
      if (key == "tc_k")
        m.tc_k = value.get<double>();
      else if (key == "gap_ratio")
        m.gap_ratio = value.get<double>();
      else if (key == "sigma_n_s_per_m")
        m.sigma_n = value.get<double>();
      else if (key == "thickness_m")
        m.thickness_m = value.get<double>();
      else if (key == "temperature_k")
        m.temperature_k = value.get<double>();
      else
        throw InputError("unknown key '" + key + "'");
    }
    return m;
  }
  catch (const nlohmann::json::exception &e)
  {
    throw InputError(std::string("malformed material record: ") + e.what());
  }
}

}  // namespace purcellkit::materials
