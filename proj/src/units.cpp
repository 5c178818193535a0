// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#include "purcellkit/units.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <utility>
#include "purcellkit/error.hpp"

namespace purcellkit
{

namespace
{

constexpr std::array<std::pair<char, int>, 8> SI_SUFFIXES = {{{'f', -15},
                                                              {'p', -12},
                                                              {'n', -9},
                                                              {'u', -6},
                                                              {'m', -3},
                                                              {'k', 3},
                                                              {'M', 6},
                                                              {'G', 9}}};

std::optional<int> SuffixExponent(char c)
{
  for (const auto &[s, exp] : SI_SUFFIXES)
  {
    if (s == c)
    {
      return exp;
    }
  }
  return std::nullopt;
}

std::optional<double> ParsePlain(std::string_view text)
{
  if (text.empty() || text.front() == '+')
  {
    return std::nullopt;
  }
  double value = 0.0;
  const auto *first = text.data();
  const auto *last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value))
  {
    return std::nullopt;
  }
  return value;
}

}  // namespace

std::optional<double> ParseSiValue(std::string_view text)
{
  if (text.empty())
  {
    return std::nullopt;
  }
  auto exp = SuffixExponent(text.back());
  if (!exp)
  {
    return ParsePlain(text);
  }
  std::string_view mantissa = text.substr(0, text.size() - 1);
  if (mantissa.empty() || mantissa.find_first_of("eE") != std::string_view::npos)
  {
    return std::nullopt;
  }
  // Validate the mantissa on its own, then let from_chars round the combined literal once.
  if (!ParsePlain(mantissa))
  {
    return std::nullopt;
  }
  std::string literal(mantissa);
  literal += 'e';
  literal += std::to_string(*exp);
  return ParsePlain(literal);
}

double ParseSiValueOrThrow(std::string_view text, std::string_view what)
{
  auto v = ParseSiValue(text);
  if (!v)
  {
    throw InputError("invalid value '" + std::string(text) + "' for " + std::string(what));
  }
  return *v;
}

std::string FormatShortest(double value)
{
  if (value == 0.0)
  {
    return "0";
  }
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string FormatSiValue(double value)
{
  if (value == 0.0 || !std::isfinite(value))
  {
    return FormatShortest(value);
  }
  const double mag = std::abs(value);
  for (const auto &[s, exp] : SI_SUFFIXES)
  {
    const double scale = std::pow(10.0, exp);
    if (mag < scale || mag >= 1000.0 * scale)
    {
      continue;
    }
    // value/scale is not always exact; keep the shortest mantissa that survives the trip.
    for (int precision = 1; precision <= 17; ++precision)
    {
      std::array<char, 64> buf{};
      auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value / scale,
                                     std::chars_format::general, precision);
      std::string text(buf.data(), ptr);
      if (text.find_first_of("eE") != std::string::npos)
      {
        continue;
      }
      text += s;
      if (auto back = ParseSiValue(text); back && *back == value)
      {
        return text;
      }
    }
  }
  return FormatShortest(value);
}

}  // namespace purcellkit
