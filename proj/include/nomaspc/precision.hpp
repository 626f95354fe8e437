#pragma once

#include <cstdint>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace nomaspc {

// 113-bit significand (IEEE binary128 layout), expression templates off so
// that generic code written for double compiles unchanged.
using extended = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<113, boost::multiprecision::digit_base_2, void,
                                         std::int16_t, -16382, 16383>,
    boost::multiprecision::et_off>;

// 200 significant decimal digits; the closed form falls back to it when an
// extended-precision sum cancels below double accuracy.
using wide = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<200>,
                                           boost::multiprecision::et_off>;

template <class Real>
inline double to_double(const Real& x)
{
    return static_cast<double>(x);
}

} // namespace nomaspc
