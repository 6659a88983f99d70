#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace hsm {

using Rational = boost::rational<std::int64_t>;

// "num/den" in lowest terms; integers keep the "/1" suffix.
std::string to_string(const Rational& r);
// Accepts "a", "a/b" and surrounding whitespace; throws DomainError.
Rational parse_rational(std::string_view text);
double to_double(const Rational& r);

}  // namespace hsm
