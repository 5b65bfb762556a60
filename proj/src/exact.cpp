#include "credo/exact.hpp"

#include <charconv>
#include <cmath>

#include "credo/error.hpp"

namespace credo {

using boost::multiprecision::cpp_int;

namespace {

cpp_int pow10(int n) {
  cpp_int r = 1;
  for (int i = 0; i < n; ++i) r *= 10;
  return r;
}

}  // namespace

Exact exact_from_double(double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::InvalidArgument, "non-finite probability");
  if (value == 0.0) return Exact(0);
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific);
  if (ec != std::errc{}) throw Error(ErrorCode::InvalidArgument, "cannot format probability");
  // d.ddddde[+-]xx
  const std::string text(buf, end);
  const auto e = text.find('e');
  std::string mantissa = text.substr(0, e);
  const int exponent = std::stoi(text.substr(e + 1));
  int fraction_digits = 0;
  if (auto dot = mantissa.find('.'); dot != std::string::npos) {
    fraction_digits = static_cast<int>(mantissa.size() - dot - 1);
    mantissa.erase(dot, 1);
  }
  cpp_int digits(mantissa);
  const int scale = exponent - fraction_digits;
  if (scale >= 0) return Exact(digits * pow10(scale));
  return Exact(digits, pow10(-scale));
}

double to_double(const Exact& value) {
  using boost::multiprecision::bit_test;
  using boost::multiprecision::msb;
  if (value == 0) return 0.0;
  const bool negative = value < 0;
  const cpp_int num = boost::multiprecision::abs(boost::multiprecision::numerator(value));
  const cpp_int den = boost::multiprecision::denominator(value);

  // num/den lies in (2^(nb-db-1), 2^(nb-db+1)), so scaling by 2^shift puts
  // the integer quotient in [2^53, 2^55).
  long shift = 54 - (static_cast<long>(msb(num)) - static_cast<long>(msb(den)));
  cpp_int q, r;
  if (shift >= 0) {
    boost::multiprecision::divide_qr(cpp_int(num << shift), den, q, r);
  } else {
    boost::multiprecision::divide_qr(num, cpp_int(den << -shift), q, r);
  }
  bool sticky = r != 0;
  if (q >= (cpp_int(1) << 54)) {
    sticky = sticky || bit_test(q, 0);
    q >>= 1;
    --shift;
  }
  // 54 bits: keep 53, round half to even on the last one.
  const bool round_bit = bit_test(q, 0);
  q >>= 1;
  --shift;
  if (round_bit && (sticky || bit_test(q, 0))) ++q;
  const double out = std::ldexp(q.convert_to<double>(), static_cast<int>(-shift));
  return negative ? -out : out;
}

}  // namespace credo
