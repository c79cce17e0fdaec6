#include "tableforge/decimal.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

namespace tableforge {
namespace {

constexpr int kMaxDigits = 34;

__int128 pow10(int n) {
  __int128 p = 1;
  for (int i = 0; i < n; ++i) p *= 10;
  return p;
}

// Brings both mantissas to the larger scale.
std::pair<__int128, __int128> align(__int128 a, int sa, __int128 b, int sb, int& scale) {
  scale = std::max(sa, sb);
  return {a * pow10(scale - sa), b * pow10(scale - sb)};
}

}  // namespace

void Decimal::normalize() {
  if (mantissa_ == 0) {
    scale_ = 0;
    return;
  }
  while (scale_ > 0 && mantissa_ % 10 == 0) {
    mantissa_ /= 10;
    --scale_;
  }
  while (scale_ < 0) {
    mantissa_ *= 10;
    ++scale_;
  }
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  if (!text.empty() && text.back() == '%') text.remove_suffix(1);
  if (text.empty()) return std::nullopt;

  bool negative = false;
  if (text.front() == '+' || text.front() == '-') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }

  std::size_t pos = 0;
  std::string digits;
  int int_digits = 0;
  int group_len = 0;
  bool grouped = false;
  while (pos < text.size() && (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == ',')) {
    if (text[pos] == ',') {
      // The first group may hold 1-3 digits, every later group exactly 3.
      if (group_len == 0 || (grouped && group_len != 3) || (!grouped && group_len > 3)) {
        return std::nullopt;
      }
      grouped = true;
      group_len = 0;
    } else {
      digits.push_back(text[pos]);
      ++int_digits;
      ++group_len;
    }
    ++pos;
  }
  if (grouped && group_len != 3) return std::nullopt;

  int frac_digits = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      digits.push_back(text[pos]);
      ++frac_digits;
      ++pos;
    }
  }
  if (pos != text.size() || int_digits + frac_digits == 0) return std::nullopt;

  auto first = digits.find_first_not_of('0');
  if (first == std::string::npos) return Decimal();
  if (static_cast<int>(digits.size() - first) > kMaxDigits) return std::nullopt;

  __int128 mantissa = 0;
  for (std::size_t i = first; i < digits.size(); ++i) mantissa = mantissa * 10 + (digits[i] - '0');
  return Decimal(negative ? -mantissa : mantissa, frac_digits);
}

std::optional<Decimal> Decimal::divide(const Decimal& num, const Decimal& den, int scale) {
  if (den.mantissa_ == 0) return std::nullopt;
  int exponent = den.scale_ + scale - num.scale_;
  __int128 n = num.mantissa_;
  __int128 d = den.mantissa_;
  if (exponent >= 0) {
    n *= pow10(exponent);
  } else {
    d *= pow10(-exponent);
  }
  __int128 q = n / d;
  __int128 r = n % d;
  __int128 abs_r = r < 0 ? -r : r;
  __int128 abs_d = d < 0 ? -d : d;
  if (2 * abs_r >= abs_d) q += ((n < 0) != (d < 0)) ? -1 : 1;
  return Decimal(q, scale);
}

Decimal operator+(const Decimal& a, const Decimal& b) {
  int scale = 0;
  auto [x, y] = align(a.mantissa_, a.scale_, b.mantissa_, b.scale_, scale);
  return Decimal(x + y, scale);
}

Decimal operator-(const Decimal& a, const Decimal& b) { return a + (-b); }

Decimal operator*(const Decimal& a, const Decimal& b) {
  return Decimal(a.mantissa_ * b.mantissa_, a.scale_ + b.scale_);
}

Decimal Decimal::operator-() const { return Decimal(-mantissa_, scale_); }

std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
  int scale = 0;
  auto [x, y] = align(a.mantissa_, a.scale_, b.mantissa_, b.scale_, scale);
  if (x < y) return std::strong_ordering::less;
  if (x > y) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string Decimal::to_string() const {
  __int128 m = mantissa_ < 0 ? -mantissa_ : mantissa_;
  std::string digits;
  do {
    digits.push_back(static_cast<char>('0' + static_cast<int>(m % 10)));
    m /= 10;
  } while (m != 0);
  while (static_cast<int>(digits.size()) <= scale_) digits.push_back('0');
  std::reverse(digits.begin(), digits.end());
  std::string out = mantissa_ < 0 ? "-" : "";
  out += digits.substr(0, digits.size() - scale_);
  if (scale_ > 0) {
    out += '.';
    out += digits.substr(digits.size() - scale_);
  }
  return out;
}

double Decimal::to_double() const { return std::strtod(to_string().c_str(), nullptr); }

}  // namespace tableforge
