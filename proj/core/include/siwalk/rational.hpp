#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace siwalk {

/// Arbitrary-precision rational used by the exact enumerators.
using Rational = boost::multiprecision::cpp_rational;

}  // namespace siwalk
