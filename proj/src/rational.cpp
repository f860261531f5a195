#include "gip/rational.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gip/error.hpp"

namespace gip {

namespace {

std::int64_t parse_int(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::MalformedInput, "not an integer: '" + s + "'");
  }
  if (used != s.size()) throw Error(ErrorCode::MalformedInput, "not an integer: '" + s + "'");
  return v;
}

}  // namespace

Fraction parse_fraction(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const auto num = parse_int(text.substr(0, slash));
    const auto den = parse_int(text.substr(slash + 1));
    if (den == 0) throw Error(ErrorCode::MalformedInput, "zero denominator in '" + text + "'");
    return Fraction(num, den);
  }
  const auto dot = text.find('.');
  if (dot == std::string::npos) return Fraction(parse_int(text));
  const std::string whole = text.substr(0, dot);
  const std::string frac = text.substr(dot + 1);
  if (frac.size() > 15 || frac.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorCode::MalformedInput, "unsupported decimal '" + text + "'");
  }
  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  const bool negative = !whole.empty() && whole[0] == '-';
  const std::int64_t w = (whole.empty() || whole == "-") ? 0 : parse_int(whole);
  const std::int64_t f = frac.empty() ? 0 : parse_int(frac);
  const std::int64_t num = std::abs(w) * den + f;
  return Fraction(negative ? -num : num, den);
}

Fraction approximate_fraction(double x, std::int64_t max_den) {
  // Stern-Brocot / continued fraction convergents.
  const bool negative = x < 0;
  x = std::abs(x);
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_d = std::floor(r);
    if (a_d > 9.0e15) break;
    const auto a = static_cast<std::int64_t>(a_d);
    const std::int64_t q2 = a * q1 + q0;
    if (q2 > max_den) break;
    const std::int64_t p2 = a * p1 + p0;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    const double frac = r - a_d;
    if (frac < 1e-15) break;
    r = 1.0 / frac;
  }
  if (q1 == 0) return Fraction(0);
  return Fraction(negative ? -p1 : p1, q1);
}

std::string to_string(const Fraction& f) {
  return std::to_string(f.numerator()) + "/" + std::to_string(f.denominator());
}

double to_double(const Fraction& f) {
  return static_cast<double>(f.numerator()) / static_cast<double>(f.denominator());
}

std::int64_t lcm_of_denominators(std::span<const Fraction> values) {
  std::int64_t l = 1;
  for (const auto& v : values) l = std::lcm(l, v.denominator());
  return l;
}

std::vector<std::int64_t> round_to_units(std::span<const double> weights, std::int64_t denominator,
                                         double* perturbation) {
  std::vector<std::int64_t> units(weights.size(), 0);
  if (weights.empty()) return units;
  double total = 0.0;
  for (double w : weights) total += w;
  std::int64_t sum = 0;
  std::vector<std::pair<double, std::size_t>> remainder;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = weights[i] / total * static_cast<double>(denominator);
    units[i] = static_cast<std::int64_t>(std::floor(exact));
    sum += units[i];
    remainder.emplace_back(-(exact - static_cast<double>(units[i])), i);
  }
  std::sort(remainder.begin(), remainder.end());
  for (std::size_t k = 0; sum < denominator && k < remainder.size(); ++k, ++sum) ++units[remainder[k].second];
  if (sum != denominator) throw Error(ErrorCode::InvalidArgument, "weights cannot be rounded onto the denominator");
  if (perturbation) {
    double p = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      p += std::abs(static_cast<double>(units[i]) / static_cast<double>(denominator) - weights[i] / total);
    }
    *perturbation = p;
  }
  return units;
}

}  // namespace gip
