#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace tracewise {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Integer text, or a terminating decimal up to 6 places, otherwise the value
// rounded half away from zero to 6 places.
std::string format_rational(const Rational& value);

// Accepts [-]digits[.digits]. Exact conversion.
std::optional<Rational> parse_decimal(std::string_view text);

// Integers compare exactly; a decimal literal with k fractional digits matches
// when |exact - literal| <= 0.5 * 10^-k.
bool decimal_matches(const Rational& exact, std::string_view literal);

} // namespace tracewise
