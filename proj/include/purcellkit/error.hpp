// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PURCELLKIT_ERROR_HPP
#define PURCELLKIT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace purcellkit
{

// Bad input from the caller: malformed files, out-of-range parameters. The CLI maps these
// to exit code 1.
class InputError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// A computation that could not produce a trustworthy result (singular systems, failed
// bracketing, non-converged loops). Exit code 2.
class NumericalError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace purcellkit

#endif  // PURCELLKIT_ERROR_HPP
