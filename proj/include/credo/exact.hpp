#pragma once

#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace credo {

// Probabilities are accumulated as exact rationals. Each double entering the
// arithmetic is read as its shortest round-trip decimal (0.6 is 6/10, not
// the nearest binary fraction), and results are rounded to double once.
using Exact = boost::multiprecision::cpp_rational;

Exact exact_from_double(double value);

// Correctly rounded (ties to even) conversion.
double to_double(const Exact& value);

}  // namespace credo
