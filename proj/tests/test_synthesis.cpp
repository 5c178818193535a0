// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <json.hpp>
#include <algorithm>
#include <cmath>
#include <string>
#include "purcellkit/error.hpp"
#include "purcellkit/network.hpp"
#include "purcellkit/synthesis.hpp"
#include "support/oracles.hpp"

using namespace purcellkit;
using namespace purcellkit::synthesis;

namespace
{

const FilterSpec PF_C{4, 7.05e9, 850e6, 0.5, 50.0};
const FilterSpec PF_M{4, 6.91e9, 970e6, 0.5, 50.0};

// Chebyshev polynomial by the three-term recurrence, valid for any real x.
double ChebyshevT(int n, double x)
{
  double t0 = 1.0, t1 = x;
  if (n == 0)
  {
    return t0;
  }
  for (int k = 1; k < n; ++k)
  {
    const double t2 = 2.0 * x * t1 - t0;
    t0 = t1;
    t1 = t2;
  }
  return t1;
}

double LowpassAttenuation(int n, double ripple_db, double w)
{
  const double eps2 = std::pow(10.0, ripple_db / 10.0) - 1.0;
  const double t = ChebyshevT(n, w);
  return 10.0 * std::log10(1.0 + eps2 * t * t);
}

double S21Db(const network::Circuit &c, double f)
{
  return network::TransmissionDb(*c.SParameters(f));
}

double S11Db(const network::Circuit &c, double f)
{
  return 20.0 * std::log10(std::abs((*c.SParameters(f))(0, 0)));
}

}  // namespace

TEST_SUITE("synthesis")
{
  TEST_CASE("prototype values")
  {
    auto g1 = ChebyshevPrototype(1, 3.0103);
    CHECK(g1[1] == doctest::Approx(2.0).epsilon(1e-4));
    auto g3 = ChebyshevPrototype(3, 0.5);
    CHECK(g3[1] == doctest::Approx(1.5963).epsilon(1e-4));
    CHECK(g3[2] == doctest::Approx(1.0967).epsilon(1e-4));
    CHECK(g3[3] == doctest::Approx(g3[1]).epsilon(1e-12));
    CHECK(g3[4] == 1.0);
    auto g4 = ChebyshevPrototype(4, 0.5);
    const double expected[] = {1.0, 1.6703, 1.1926, 2.3661, 0.8419, 1.9841};
    REQUIRE(g4.size() == 6);
    for (int i = 0; i < 6; ++i)
    {
      CHECK(g4[i] == doctest::Approx(expected[i]).epsilon(1e-4));
    }
  }

  TEST_CASE("prototype ladders are Chebyshev")
  {
    for (int n = 1; n <= 8; ++n)
    {
      for (double ripple : {0.01, 0.1, 0.5, 1.0, 3.0})
      {
        const auto g = ChebyshevPrototype(n, ripple);
        CAPTURE(n);
        CAPTURE(ripple);
        for (double w = 0.0; w <= 3.0; w += 0.0625)
        {
          CHECK(oracle::LadderInsertionLossDb(g, w) ==
                doctest::Approx(LowpassAttenuation(n, ripple, w)).epsilon(1e-9).scale(1.0));
        }
        if (n % 2 == 1)
        {
          for (int k = 1; k <= n; ++k)
          {
            CHECK(g[k] == doctest::Approx(g[n + 1 - k]).epsilon(1e-12));
          }
        }
      }
    }
  }

  TEST_CASE("closed-form attenuation")
  {
    const double fbw = PF_C.FractionalBandwidth();
    // Band edges where Omega = +-1.
    const double lo = PF_C.f_center_hz * (std::sqrt(fbw * fbw + 4.0) - fbw) / 2.0;
    const double hi = PF_C.f_center_hz * (std::sqrt(fbw * fbw + 4.0) + fbw) / 2.0;
    CHECK(ChebyshevAttenuation(PF_C, lo) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(ChebyshevAttenuation(PF_C, hi) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(ChebyshevAttenuation(PF_C, 7.05e9) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ChebyshevAttenuation(PF_C, 6.05e9) == doctest::Approx(40.0).epsilon(0.1 / 40));
    for (double f = 3e9; f < 12e9; f += 37e6)
    {
      const double omega = (f / PF_C.f_center_hz - PF_C.f_center_hz / f) / fbw;
      CHECK(ChebyshevAttenuation(PF_C, f) ==
            doctest::Approx(LowpassAttenuation(4, 0.5, omega)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(ChebyshevAttenuation(PF_C, 0.0), InputError);
  }

  TEST_CASE("coupling plan")
  {
    const auto plan = PlanCoupling(PF_C);
    CHECK(PF_C.FractionalBandwidth() == doctest::Approx(0.12057).epsilon(1e-4));
    REQUIRE(plan.k_adj.size() == 3);
    CHECK(plan.k_adj[0] == doctest::Approx(0.08543).epsilon(1e-3));
    CHECK(plan.k_adj[1] == doctest::Approx(0.07178).epsilon(1e-3));
    CHECK(plan.k_adj[2] == doctest::Approx(plan.k_adj[0]).epsilon(1e-12));
    CHECK(plan.qe_in == doctest::Approx(13.85).epsilon(1e-3));
    CHECK(plan.qe_out == doctest::Approx(plan.qe_in).epsilon(1e-3));
    for (const auto &r : plan.resonators)
    {
      CHECK(r.l_h == 2e-9);
      CHECK(r.c_f == doctest::Approx(0.2548e-12).epsilon(1e-3));
      CHECK(1.0 / (2 * M_PI * std::sqrt(r.l_h * r.c_f)) ==
            doctest::Approx(PF_C.f_center_hz).epsilon(1e-9));
    }
    const auto small = PlanCoupling(PF_C, 1e-9);
    CHECK(small.resonators[0].c_f == doctest::Approx(2 * plan.resonators[0].c_f).epsilon(1e-12));
    CHECK_THROWS_AS(PlanCoupling(PF_C, 0.0), InputError);
  }

  TEST_CASE("filter spec validation")
  {
    CHECK_NOTHROW(PF_M.Validate());
    CHECK_THROWS_AS((FilterSpec{0, 7e9, 1e9, 0.5, 50}.Validate()), InputError);
    CHECK_THROWS_AS((FilterSpec{4, 7e9, 4.9e9, 0.5, 50}.Validate()), InputError);
    CHECK_THROWS_AS((FilterSpec{4, 7e9, 1e9, 0.0, 50}.Validate()), InputError);
    CHECK_THROWS_AS((FilterSpec{4, 7e9, 1e9, 0.5, -50}.Validate()), InputError);
  }

  TEST_CASE("unrealizable coupling")
  {
    auto plan = PlanCoupling(PF_C);
    plan.k_adj[0] = 1.5;
    for (auto mode : {RealizationMode::IdealInverter, RealizationMode::MutualInductive})
    {
      CHECK_THROWS_WITH_AS(RealizeFilter(plan, mode),
                           "unrealizable coupling between resonators 1,2", InputError);
    }
  }

  TEST_CASE("ideal realization follows the closed form")
  {
    for (const auto &spec : {PF_C, PF_M})
    {
      const auto n = RealizeFilter(PlanCoupling(spec), RealizationMode::IdealInverter);
      CHECK(netlist::ValidateNetlist(n).empty());
      network::Circuit c(n);
      const auto grid = network::LinearGrid(4e9, 10e9, 2001);
      for (double f : grid)
      {
        const double oracle_db = ChebyshevAttenuation(spec, f);
        if (oracle_db < 60.0)
        {
          CHECK(-S21Db(c, f) == doctest::Approx(oracle_db).epsilon(0.1 / 60).scale(1.0));
        }
      }
      const auto band = network::BandMetrics(c, grid);
      CHECK(band.bandwidth_ripple == doctest::Approx(spec.bandwidth_hz).epsilon(0.02));
      CHECK(std::sqrt(band.lower_ripple * band.upper_ripple) ==
            doctest::Approx(spec.f_center_hz).epsilon(0.005));
      CHECK(band.ripple_db == doctest::Approx(0.5).epsilon(0.1));
      CHECK(band.bandwidth_3db > band.bandwidth_ripple);
    }
  }

  TEST_CASE("equiripple and reflection zeros")
  {
    for (const auto &spec : {PF_C, PF_M})
    {
      network::Circuit c(RealizeFilter(PlanCoupling(spec), RealizationMode::IdealInverter));
      const double half = spec.bandwidth_hz / 2;
      const auto grid =
          network::LinearGrid(spec.f_center_hz - 1.2 * half, spec.f_center_hz + 1.2 * half, 801);
      // Attenuation maxima are |S21| minima: N - 1 of them strictly inside the band.
      const auto valleys = oracle::RefinedMinima([&](double f) { return S21Db(c, f); }, grid);
      REQUIRE(valleys.size() == static_cast<std::size_t>(spec.poles - 1));
      double lo = 0.0, hi = -1e9;
      for (const auto &[f, db] : valleys)
      {
        CHECK(-db == doctest::Approx(spec.ripple_db).epsilon(0.05 / 0.5));
        lo = std::min(lo, db);
        hi = std::max(hi, db);
      }
      CHECK(hi - lo < 0.02);
      const auto zeros = oracle::RefinedMinima([&](double f) { return S11Db(c, f); }, grid);
      int deep = 0;
      for (const auto &[f, db] : zeros)
      {
        deep += db < -40.0 ? 1 : 0;
      }
      CHECK(deep == spec.poles);
    }
  }

  TEST_CASE("monotone skirts")
  {
    network::Circuit c(RealizeFilter(PlanCoupling(PF_C), RealizationMode::IdealInverter));
    double prev = 0.0;
    for (double f = 7.6e9; f < 12e9; f += 20e6)
    {
      const double a = -S21Db(c, f);
      CHECK(a > prev);
      prev = a;
    }
    prev = 0.0;
    for (double f = 6.5e9; f > 3e9; f -= 20e6)
    {
      const double a = -S21Db(c, f);
      CHECK(a > prev);
      prev = a;
    }
  }

  TEST_CASE("series coupling inductor loads to the requested Qe")
  {
    const auto plan = PlanCoupling(PF_C);
    const double w0 = 2 * M_PI * plan.f_center_hz;
    const auto &r = plan.resonators[0];
    const auto sc = SizeCouplingInductor(w0 * r.c_f, w0, plan.qe_in, 50.0);
    netlist::Netlist n;
    n.elements = {netlist::MakePort("P1", "in", "0", 50.0, 1),
                  netlist::MakeInductor("LIN", "in", "r", sc.inductance),
                  netlist::MakeInductor("L1", "r", "0", r.l_h),
                  netlist::MakeCapacitor("C1", "r", "0", r.c_f + sc.compensation_c)};
    network::Circuit c(n);
    auto power = [&](double f) { return std::norm(*c.DrivingPointImpedance("r", f)); };
    const auto grid = network::LinearGrid(0.8 * plan.f_center_hz, 1.2 * plan.f_center_hz, 4001);
    const auto peak =
        oracle::RefinedMinima([&](double f) { return -power(f); }, grid);
    REQUIRE(peak.size() == 1);
    const double f_peak = peak[0].first;
    const double half = -peak[0].second / 2;
    auto crossing = [&](double a, double b)
    {
      for (int i = 0; i < 200; ++i)
      {
        const double m = 0.5 * (a + b);
        ((power(a) - half) * (power(m) - half) <= 0 ? b : a) = m;
      }
      return 0.5 * (a + b);
    };
    const double fwhm = crossing(f_peak, 1.2 * f_peak) - crossing(0.8 * f_peak, f_peak);
    // The loading conductance falls with frequency, which tilts the peak slightly upward.
    CHECK(f_peak == doctest::Approx(plan.f_center_hz).epsilon(5e-3));
    CHECK(f_peak / fwhm == doctest::Approx(plan.qe_in).epsilon(0.01));
  }

  TEST_CASE("mutual realization")
  {
    const auto plan = PlanCoupling(PF_C);
    const auto n = RealizeFilter(plan, RealizationMode::MutualInductive);
    CHECK(netlist::ValidateNetlist(n).empty());
    CHECK(n.Find("LIN") != nullptr);
    CHECK(n.Find("K1_2") != nullptr);
    const auto result = SynthesizeFilter(PF_C, RealizationMode::MutualInductive);
    CHECK(result.band.bandwidth_ripple == doctest::Approx(850e6).epsilon(0.02));
    CHECK(std::sqrt(result.band.lower_ripple * result.band.upper_ripple) ==
          doctest::Approx(7.05e9).epsilon(0.005));
    CHECK(RealizeFilter(result.plan, RealizationMode::MutualInductive) == result.netlist);
    CHECK(result.iterations <= 5);
  }

  TEST_CASE("synthesis loop")
  {
    for (const auto &spec : {PF_C, PF_M})
    {
      const auto r = SynthesizeFilter(spec, RealizationMode::IdealInverter);
      CHECK(r.band.bandwidth_ripple == doctest::Approx(spec.bandwidth_hz).epsilon(0.002));
      CHECK(std::sqrt(r.band.lower_ripple * r.band.upper_ripple) ==
            doctest::Approx(spec.f_center_hz).epsilon(0.002));
      CHECK(r.band.ripple_db == doctest::Approx(0.5).epsilon(0.1));
      CHECK(RealizeFilter(r.plan, RealizationMode::IdealInverter) == r.netlist);
    }
  }

  TEST_CASE("plan json")
  {
    const auto plan = PlanCoupling(PF_M);
    const std::string text = PlanToJson(plan);
    const auto j = nlohmann::json::parse(text);
    for (const char *key : {"poles", "f_center_hz", "bandwidth_hz", "ripple_db", "g", "k_adj",
                            "qe_in", "qe_out", "resonators"})
    {
      CHECK(j.contains(key));
    }
    CHECK(j["resonators"][0].contains("l_h"));
    CHECK(j["resonators"][0].contains("c_f"));
    const auto back = PlanFromJson(text);
    CHECK(back.poles == plan.poles);
    CHECK(back.g == plan.g);
    CHECK(back.k_adj == plan.k_adj);
    CHECK(back.qe_in == plan.qe_in);
    CHECK(back.resonators[3].c_f == plan.resonators[3].c_f);
    CHECK(PlanToJson(back) == text);
    CHECK_THROWS_AS(PlanFromJson("{\"poles\": 4}"), InputError);
    CHECK_THROWS_AS(PlanFromJson("not json"), InputError);
  }
}
