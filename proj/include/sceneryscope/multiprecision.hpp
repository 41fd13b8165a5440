#pragma once

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/mpfr.hpp>

namespace sceneryscope {

/// 50 significant digits; the exact moment chain runs in this type.
using ExactReal = boost::multiprecision::number<
    boost::multiprecision::mpfr_float_backend<50, boost::multiprecision::allocate_stack>,
    boost::multiprecision::et_off>;

inline double to_double(double x) { return x; }
inline double to_double(const ExactReal& x) { return x.convert_to<double>(); }

}  // namespace sceneryscope
