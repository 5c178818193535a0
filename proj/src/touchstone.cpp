// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include "purcellkit/error.hpp"
#include "purcellkit/network.hpp"
#include "purcellkit/units.hpp"

namespace purcellkit::network
{

namespace
{

std::string Num(double v)
{
  if (v == 0.0)
  {
    v = 0.0;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

void WriteTouchstone(const SParameterSweep &sweep, double z_ref, std::ostream &out)
{
  out << "# Hz S RI R " << FormatShortest(z_ref) << "\n";
  for (std::size_t i = 0; i < sweep.Size(); ++i)
  {
    if (!sweep.values[i])
    {
      continue;
    }
    const auto &s = *sweep.values[i];
    if (s.rows() != 2 || s.cols() != 2)
    {
      throw InputError("touchstone output requires exactly 2 ports");
    }
    out << Num(sweep.frequencies[i]);
    // Touchstone v1 two-port order: S11 S21 S12 S22.
    for (auto [r, c] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}})
    {
      out << ' ' << Num(s(r, c).real()) << ' ' << Num(s(r, c).imag());
    }
    out << "\n";
  }
}

void WriteTouchstone(const SParameterSweep &sweep, double z_ref, const std::string &path)
{
  std::ofstream out(path);
  if (!out)
  {
    throw InputError("cannot write '" + path + "'");
  }
  WriteTouchstone(sweep, z_ref, out);
  if (!out)
  {
    throw InputError("cannot write '" + path + "'");
  }
}

void WriteSParameterCsv(const SParameterSweep &sweep, std::ostream &out)
{
  out << "freq_hz,s11_db,s21_db,s11_deg,s21_deg\n";
  const double deg = 180.0 / constants::pi;
  for (std::size_t i = 0; i < sweep.Size(); ++i)
  {
    out << Num(sweep.frequencies[i]);
    if (!sweep.values[i])
    {
      out << ",nan,nan,nan,nan\n";
      continue;
    }
    const auto &s = *sweep.values[i];
    const Complex s11 = s(0, 0);
    const Complex s21 = s.rows() > 1 ? s(1, 0) : Complex{};
    out << ',' << Num(20.0 * std::log10(std::abs(s11))) << ','
        << Num(20.0 * std::log10(std::abs(s21))) << ',' << Num(std::arg(s11) * deg) << ','
        << Num(std::arg(s21) * deg) << "\n";
  }
}

void WriteAdmittanceCsv(const AdmittanceSweep &sweep, std::ostream &out)
{
  out << "freq_hz,re,im\n";
  for (std::size_t i = 0; i < sweep.Size(); ++i)
  {
    out << Num(sweep.frequencies[i]);
    if (!sweep.values[i])
    {
      out << ",nan,nan\n";
      continue;
    }
    out << ',' << Num(sweep.values[i]->real()) << ',' << Num(sweep.values[i]->imag()) << "\n";
  }
}

}  // namespace purcellkit::network
