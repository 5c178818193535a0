// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PURCELLKIT_UNITS_HPP
#define PURCELLKIT_UNITS_HPP

#include <numbers>
#include <optional>
#include <string>
#include <string_view>

namespace purcellkit
{

// CODATA 2018 exact/recommended values, SI.
namespace constants
{
inline constexpr double pi = std::numbers::pi;
inline constexpr double c0 = 299792458.0;
inline constexpr double mu0 = 1.25663706212e-6;
inline constexpr double eps0 = 8.8541878128e-12;
inline constexpr double e = 1.602176634e-19;
inline constexpr double h = 6.62607015e-34;
inline constexpr double hbar = h / (2.0 * pi);
inline constexpr double kB = 1.380649e-23;
}  // namespace constants

inline constexpr double AngularFrequency(double f_hz)
{
  return 2.0 * constants::pi * f_hz;
}

// Parses a decimal number with an optional single SI suffix from the table
// {f, p, n, u, m, k, M, G}. Suffixes are case sensitive ("m" is milli, "M" is mega).
// The suffix is folded into the exponent before conversion, so "30f" parses to exactly the
// same double as "30e-15". Returns nullopt on anything else, including trailing garbage.
std::optional<double> ParseSiValue(std::string_view text);

// Like ParseSiValue but throws InputError naming `what` on failure.
double ParseSiValueOrThrow(std::string_view text, std::string_view what);

// Shortest text that ParseSiValue maps back to exactly `value`. Prefers an SI suffix that
// puts the mantissa in [1, 1000) when that form round-trips exactly.
std::string FormatSiValue(double value);

// Shortest round-trip decimal representation, no suffix.
std::string FormatShortest(double value);

}  // namespace purcellkit

#endif  // PURCELLKIT_UNITS_HPP
