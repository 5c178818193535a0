// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include "purcellkit/error.hpp"
#include "purcellkit/network.hpp"

namespace purcellkit::network
{

namespace
{

constexpr double EDGE_REL_TOL = 1.0e-9;
constexpr double INVPHI = 0.6180339887498949;

// Crossing of `level` between fa (response above level) and fb (below).
double LocateCrossing(double fa, double da, double fb, double db, double level,
                      const ResponseProbe &probe)
{
  if (!probe)
  {
    return fa + (fb - fa) * (da - level) / (da - db);
  }
  double above = fa;
  double below = fb;
  for (int it = 0; it < 200; ++it)
  {
    const double mid = 0.5 * (above + below);
    if (std::abs(above - below) <= EDGE_REL_TOL * mid)
    {
      break;
    }
    const double v = probe(mid);
    if (!std::isfinite(v))
    {
      break;
    }
    (v >= level ? above : below) = mid;
  }
  return 0.5 * (above + below);
}

// Golden-section search for the extremum of the probe on [a, b]; sign = +1 for a maximum.
std::pair<double, double> RefineExtremum(double a, double b, double f0, double v0, double sign,
                                         const ResponseProbe &probe)
{
  if (!probe)
  {
    return {f0, v0};
  }
  double x1 = b - INVPHI * (b - a);
  double x2 = a + INVPHI * (b - a);
  double y1 = sign * probe(x1);
  double y2 = sign * probe(x2);
  for (int it = 0; it < 200 && (b - a) > 1.0e-11 * b; ++it)
  {
    if (y1 > y2)
    {
      b = x2;
      x2 = x1;
      y2 = y1;
      x1 = b - INVPHI * (b - a);
      y1 = sign * probe(x1);
    }
    else
    {
      a = x1;
      x1 = x2;
      y1 = y2;
      x2 = a + INVPHI * (b - a);
      y2 = sign * probe(x2);
    }
  }
  const double f = 0.5 * (a + b);
  const double v = probe(f);
  if (!std::isfinite(v) || sign * v < sign * v0)
  {
    return {f0, v0};
  }
  return {f, v};
}

}  // namespace

BandReport BandMetrics(std::span<const double> frequencies,
                       std::span<const std::optional<double>> s21_db, const ResponseProbe &probe)
{
  if (frequencies.size() != s21_db.size())
  {
    throw InputError("sweep frequencies and values differ in length");
  }
  // Compact to the valid points; singular solves are gaps.
  std::vector<double> f, d;
  for (std::size_t i = 0; i < frequencies.size(); ++i)
  {
    if (s21_db[i] && std::isfinite(*s21_db[i]))
    {
      f.push_back(frequencies[i]);
      d.push_back(*s21_db[i]);
    }
  }
  if (f.size() < 3)
  {
    throw InputError("band not bracketed");
  }
  const std::size_t n = f.size();
  const auto peak_it = std::max_element(d.begin(), d.end());
  const std::size_t ipk = static_cast<std::size_t>(peak_it - d.begin());

  BandReport report;
  double peak = d[ipk];
  {
    const double a = f[ipk == 0 ? 0 : ipk - 1];
    const double b = f[ipk + 1 == n ? n - 1 : ipk + 1];
    peak = RefineExtremum(a, b, f[ipk], d[ipk], 1.0, probe).second;
  }
  report.peak_db = peak;
  report.insertion_loss_min_db = 0.0 - peak;
  const double level3 = peak - 3.0;

  std::size_t lo = ipk;
  while (lo > 0 && d[lo] >= level3)
  {
    --lo;
  }
  std::size_t hi = ipk;
  while (hi + 1 < n && d[hi] >= level3)
  {
    ++hi;
  }
  if (d[lo] >= level3 || d[hi] >= level3)
  {
    throw InputError("band not bracketed");
  }
  report.lower_3db = LocateCrossing(f[lo + 1], d[lo + 1], f[lo], d[lo], level3, probe);
  report.upper_3db = LocateCrossing(f[hi - 1], d[hi - 1], f[hi], d[hi], level3, probe);
  report.bandwidth_3db = report.upper_3db - report.lower_3db;
  report.f_center = 0.5 * (report.lower_3db + report.upper_3db);

  // Interior extrema strictly inside the 3 dB band.
  std::vector<std::size_t> maxima, minima;
  std::vector<double> max_vals, min_vals;
  for (std::size_t i = lo + 1; i + 1 <= hi - 1; ++i)
  {
    if (d[i] > d[i - 1] && d[i] >= d[i + 1])
    {
      maxima.push_back(i);
      max_vals.push_back(RefineExtremum(f[i - 1], f[i + 1], f[i], d[i], 1.0, probe).second);
    }
    else if (d[i] < d[i - 1] && d[i] <= d[i + 1])
    {
      minima.push_back(i);
      min_vals.push_back(RefineExtremum(f[i - 1], f[i + 1], f[i], d[i], -1.0, probe).second);
    }
  }
  if (minima.empty() || maxima.empty())
  {
    report.ripple_db = 0.0;
    report.lower_ripple = report.upper_ripple = f[ipk];
    report.bandwidth_ripple = 0.0;
    return report;
  }
  const double top = std::max(peak, *std::max_element(max_vals.begin(), max_vals.end()));
  const double valley = *std::min_element(min_vals.begin(), min_vals.end());
  report.ripple_db = top - valley;

  // Outer skirts: walk outward from the outermost maxima until the response drops below
  // the deepest valley.
  std::size_t left = maxima.front();
  while (left > lo && d[left] >= valley)
  {
    --left;
  }
  std::size_t right = maxima.back();
  while (right < hi && d[right] >= valley)
  {
    ++right;
  }
  report.lower_ripple = LocateCrossing(f[left + 1], d[left + 1], f[left], d[left], valley, probe);
  report.upper_ripple =
      LocateCrossing(f[right - 1], d[right - 1], f[right], d[right], valley, probe);
  report.bandwidth_ripple = report.upper_ripple - report.lower_ripple;
  return report;
}

BandReport BandMetrics(const SParameterSweep &sweep, int out_port, int in_port,
                       const ResponseProbe &probe)
{
  std::vector<std::optional<double>> db(sweep.Size());
  for (std::size_t i = 0; i < sweep.Size(); ++i)
  {
    if (sweep.values[i])
    {
      db[i] = TransmissionDb(*sweep.values[i], out_port, in_port);
    }
  }
  return BandMetrics(sweep.frequencies, db, probe);
}

BandReport BandMetrics(const Circuit &circuit, std::span<const double> grid, int out_port,
                       int in_port)
{
  CheckGrid(grid);
  std::vector<std::optional<double>> db(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
  {
    if (auto s = circuit.SParameters(grid[i]))
    {
      db[i] = TransmissionDb(*s, out_port, in_port);
    }
  }
  ResponseProbe probe = [&](double f)
  {
    auto s = circuit.SParameters(f);
    return s ? TransmissionDb(*s, out_port, in_port) : std::numeric_limits<double>::quiet_NaN();
  };
  return BandMetrics(grid, db, probe);
}

}  // namespace purcellkit::network
