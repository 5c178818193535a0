// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <algorithm>
#include <random>
#include <string>
#include "purcellkit/error.hpp"
#include "purcellkit/netlist.hpp"
#include "purcellkit/synthesis.hpp"
#include "support/corpus.hpp"
#include "support/oracles.hpp"

using namespace purcellkit;
using namespace purcellkit::netlist;

namespace
{

std::string ParseError(std::string_view text)
{
  try
  {
    ParseNetlist(text);
  }
  catch (const InputError &e)
  {
    return e.what();
  }
  return "";
}

bool HasMessage(const std::vector<Diagnostic> &d, const std::string &msg)
{
  return std::any_of(d.begin(), d.end(), [&](const Diagnostic &x) { return x.message == msg; });
}

}  // namespace

TEST_SUITE("netlist")
{
  TEST_CASE("two-port capacitor")
  {
    auto n = ParseNetlist("P1 1 0 PORT Z0=50\nC1 1 2 30f\nP2 2 0 PORT Z0=50");
    CHECK(n.Ports().size() == 2);
    const auto *c = n.Find("C1");
    REQUIRE(c != nullptr);
    CHECK(c->kind == ElementKind::Capacitor);
    CHECK(c->value == doctest::Approx(30e-15).epsilon(1e-15));
    CHECK(n.Ports()[1]->port_index == 2);
  }

  TEST_CASE("mutual coupling")
  {
    auto n = ParseNetlist("L1 1 0 2n\nL2 2 0 2n\nK1 L1 L2 0.0854");
    const auto *k = n.Find("K1");
    REQUIRE(k != nullptr);
    CHECK(k->value == 0.0854);
    CHECK(k->coupled[0] == "L1");
    CHECK(k->coupled[1] == "L2");
    CHECK(n.Find("L2")->value == 2e-9);
  }

  TEST_CASE("line lengths")
  {
    auto n = ParseNetlist("P1 a 0 PORT Z0=50\nT1 a 0 b 0 Z0=50 LEN=8.58m EEFF=6.225\n"
                          "T2 b 0 c 0 Z0=50 FQ=7G DEG=90\nR1 c 0 50");
    const auto &p = std::get<PhysicalLength>(n.Find("T1")->length);
    CHECK(p.length_m == doctest::Approx(8.58e-3));
    CHECK(p.eps_eff == 6.225);
    const auto &e = std::get<ElectricalLength>(n.Find("T2")->length);
    CHECK(e.ref_freq_hz == 7e9);
    CHECK(LineAngle(e, 3.5e9) == doctest::Approx(M_PI / 4));
  }

  TEST_CASE("unknown element kind")
  {
    CHECK(ParseError("X1 1 0 5") == "unknown element kind 'X' at line 1");
  }

  TEST_CASE("every rejection carries a line number")
  {
    const std::pair<const char *, const char *> cases[] = {
        {"R1 1 0 50\nR1 1 0 60", "duplicate id 'R1' at line 2"},
        {"L1 1 0 2n\nK1 L1 L9 0.1", "dangling mutual-coupling reference 'L9' in K1 at line 2"},
        {"R1 1 2 50", "missing ground node '0' at line 1"},
        {"R1 1 0", "at line 1"},
        {"R1 1 0 50\nC1 1 0 3q", "at line 2"},
        {"\n\nP1 1 0 PORT\n", "at line 3"},
        {"P1 1 0 Z0=50", "at line 1"},
        {"T1 1 0 2 0 Z0=50 FQ=1G\nR1 2 0 1", "at line 1"},
        {"T1 1 0 2 0 Z0=50 LEN=1m FQ=1G DEG=3\nR1 2 0 1", "at line 1"},
        {"R1 1 0 50\n.include foo", "at line 2"},
        {"R1 1 0 -5", "at line 1"},
        {"L1 1 0 1n\nL2 1 0 1n\nK1 L1 L2 1.2", "K1: coupling coefficient out of range at line 3"},
        {"R1 1 0 50\nR2 7 7 50", "node 7 unreachable from ground at line 2"},
        {"P1 1 0 PORT Z0=50 N=2\nR1 1 0 5", "at line"},
    };
    for (const auto &[text, expected] : cases)
    {
      CAPTURE(text);
      const std::string err = ParseError(text);
      CHECK(err.find(expected) != std::string::npos);
      CHECK(err.find(" at line ") != std::string::npos);
    }
  }

  TEST_CASE("validation diagnostics")
  {
    Netlist n;
    n.elements = {MakeInductor("L1", "1", "0", 2e-9), MakeInductor("L2", "2", "0", 2e-9),
                  MakeCoupling("K1", "L1", "L2", 1.2)};
    auto d = ValidateNetlist(n);
    REQUIRE(d.size() == 1);
    CHECK(d[0].element_id == "K1");
    CHECK(d[0].message == "K1: coupling coefficient out of range");

    Netlist island;
    island.elements = {MakeResistor("R1", "1", "0", 50.0), MakeResistor("R2", "7", "7", 50.0)};
    CHECK(HasMessage(ValidateNetlist(island), "node 7 unreachable from ground"));

    Netlist bad;
    bad.elements = {MakeCapacitor("C1", "1", "0", 0.0), MakePort("P1", "1", "0", 50.0, 3)};
    d = ValidateNetlist(bad);
    CHECK(HasMessage(d, "C1: value must be positive and finite"));
    CHECK(d.size() == 2);
  }

  TEST_CASE("realized filters validate cleanly")
  {
    synthesis::FilterSpec spec{4, 7.05e9, 850e6, 0.5, 50.0};
    auto plan = synthesis::PlanCoupling(spec);
    for (auto mode : {synthesis::RealizationMode::IdealInverter,
                      synthesis::RealizationMode::MutualInductive})
    {
      auto n = synthesis::RealizeFilter(plan, mode);
      CHECK(ValidateNetlist(n).empty());
      CHECK(ParseNetlist(SerializeNetlist(n)) == n);
    }
  }

  TEST_CASE("canonical text of a resistor")
  {
    Netlist n;
    n.elements = {MakeResistor("R1", "1", "0", 50.0), MakePort("P1", "1", "0", 50.0, 1)};
    CHECK(SerializeNetlist(n) == "R1 1 0 50\nP1 1 0 PORT Z0=50\n");
  }

  TEST_CASE("corpus round trip")
  {
    for (std::size_t i = 0; i < corpus::NETLISTS.size(); ++i)
    {
      CAPTURE(i);
      const auto n = ParseNetlist(corpus::NETLISTS[i]);
      const std::string text = SerializeNetlist(n);
      const auto back = ParseNetlist(text);
      CHECK(back == n);
      CHECK(SerializeNetlist(back) == text);
    }
  }

  TEST_CASE("random netlists round trip")
  {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i)
    {
      const auto n = oracle::RandomLossless(rng, 12, true);
      REQUIRE(ValidateNetlist(n).empty());
      CHECK(ParseNetlist(SerializeNetlist(n)) == n);
    }
  }

  TEST_CASE("file io")
  {
    const auto n = ParseNetlist(corpus::NETLISTS[8]);
    const std::string path = "netlist_io_test.ckt";
    WriteNetlistFile(n, path);
    CHECK(ReadNetlistFile(path) == n);
    std::remove(path.c_str());
    CHECK_THROWS_AS(ReadNetlistFile("/nonexistent/x.ckt"), InputError);
  }
}
