#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tableforge {

// Fixed-point decimal with a 128-bit mantissa: value = mantissa * 10^-scale.
// Always kept normalized (no trailing zero digits in the fraction), so equal
// values have equal representations.
class Decimal {
 public:
  Decimal() = default;
  explicit Decimal(long long value) : mantissa_(value) {}

  // Accepts an optional sign, "," thousands grouping in the integer part,
  // a decimal point and a trailing "%" (kept as the displayed number).
  // Surrounding whitespace is ignored. Returns nullopt for anything else.
  static std::optional<Decimal> parse(std::string_view text);

  // Quotient rounded half away from zero to `scale` fractional digits.
  // Division by zero yields nullopt.
  static std::optional<Decimal> divide(const Decimal& num, const Decimal& den, int scale);

  friend Decimal operator+(const Decimal& a, const Decimal& b);
  friend Decimal operator-(const Decimal& a, const Decimal& b);
  friend Decimal operator*(const Decimal& a, const Decimal& b);
  Decimal operator-() const;

  friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b);
  friend bool operator==(const Decimal& a, const Decimal& b) {
    return a.mantissa_ == b.mantissa_ && a.scale_ == b.scale_;
  }

  // Shortest form: no thousands separators, no trailing zeros, no lone ".".
  std::string to_string() const;
  double to_double() const;
  bool is_zero() const { return mantissa_ == 0; }
  bool is_negative() const { return mantissa_ < 0; }
  int scale() const { return scale_; }

 private:
  Decimal(__int128 mantissa, int scale) : mantissa_(mantissa), scale_(scale) { normalize(); }
  void normalize();

  __int128 mantissa_ = 0;
  int scale_ = 0;
};

}  // namespace tableforge
