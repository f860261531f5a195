#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gip {

using Fraction = boost::rational<std::int64_t>;

/// Parses "p/q", an integer, or a finite decimal such as "0.3".
Fraction parse_fraction(const std::string& text);
/// Best rational approximation of `x` with denominator at most `max_den`.
Fraction approximate_fraction(double x, std::int64_t max_den);
std::string to_string(const Fraction& f);
double to_double(const Fraction& f);

std::int64_t lcm_of_denominators(std::span<const Fraction> values);

/// Rounds nonnegative weights summing to one onto multiples of 1/denominator,
/// keeping the total exactly one by largest remainders: every weight is
/// rounded down and the leftover units go to the largest fractional parts
/// (ties to the lower index). Returns the integer unit counts;
/// `perturbation` receives the total absolute change.
std::vector<std::int64_t> round_to_units(std::span<const double> weights, std::int64_t denominator,
                                         double* perturbation = nullptr);

}  // namespace gip
