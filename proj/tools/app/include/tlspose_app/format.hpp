#ifndef TLSPOSE_APP_FORMAT_HPP
#define TLSPOSE_APP_FORMAT_HPP

#include <string>

namespace tlspose::app {

/// Shortest decimal string that round-trips to the same binary64 value.
/// Locale independent; non-finite values render as nan, inf, -inf.
std::string format_double(double value);

}  // namespace tlspose::app

#endif  // TLSPOSE_APP_FORMAT_HPP
