#include <gtest/gtest.h>

#include "tableforge/decimal.hpp"
#include "tableforge/rng.hpp"

namespace tableforge {
namespace {

Decimal d(const char* text) { return *Decimal::parse(text); }

TEST(Decimal, ParsesDisplayForms) {
  EXPECT_EQ(d("42").to_string(), "42");
  EXPECT_EQ(d(" 42.0 ").to_string(), "42");
  EXPECT_EQ(d("1,234").to_string(), "1234");
  EXPECT_EQ(d("-1,234,567.50").to_string(), "-1234567.5");
  EXPECT_EQ(d("12%").to_string(), "12");
  EXPECT_EQ(d("+0.250").to_string(), "0.25");
  EXPECT_EQ(d("-0").to_string(), "0");
}

TEST(Decimal, RejectsNonNumbers) {
  for (const char* bad : {"", " ", "abc", "1.2.3", "12,34", ",123", "1,", "--1", "1e5", "%", "12%%", ".", "Q1"}) {
    EXPECT_FALSE(Decimal::parse(bad).has_value()) << bad;
  }
}

TEST(Decimal, EqualValuesShareOneRepresentation) {
  EXPECT_EQ(d("1.50"), d("1.5"));
  EXPECT_EQ(d("3"), d("3.000"));
  EXPECT_LT(d("2.5"), d("10"));
  EXPECT_GT(d("-1"), d("-1.5"));
}

TEST(Decimal, ArithmeticMatchesScaledIntegers) {
  // Values on a 1/1000 grid; integer arithmetic on the scaled values is the oracle.
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const long long a = static_cast<long long>(rng.below(2'000'000)) - 1'000'000;
    const long long b = static_cast<long long>(rng.below(2'000'000)) - 1'000'000;
    auto text = [](long long v) {
      const long long m = v < 0 ? -v : v;
      std::string frac = std::to_string(1000 + m % 1000).substr(1);
      return std::string(v < 0 ? "-" : "") + std::to_string(m / 1000) + "." + frac;
    };
    const Decimal da = d(text(a).c_str());
    const Decimal db = d(text(b).c_str());
    EXPECT_EQ(da + db, d(text(a + b).c_str()));
    EXPECT_EQ(da - db, d(text(a - b).c_str()));
    EXPECT_EQ((da < db), (a < b));
    EXPECT_NEAR((da * db).to_double(), static_cast<double>(a) * static_cast<double>(b) / 1e6, 1e-6);
  }
}

TEST(Decimal, DivisionRoundsHalfAwayFromZero) {
  EXPECT_EQ(Decimal::divide(d("1"), d("3"), 4)->to_string(), "0.3333");
  EXPECT_EQ(Decimal::divide(d("2"), d("3"), 4)->to_string(), "0.6667");
  EXPECT_EQ(Decimal::divide(d("-2"), d("3"), 4)->to_string(), "-0.6667");
  EXPECT_EQ(Decimal::divide(d("1"), d("8"), 2)->to_string(), "0.13");
  EXPECT_EQ(Decimal::divide(d("30"), d("2"), 4)->to_string(), "15");
  EXPECT_FALSE(Decimal::divide(d("1"), d("0"), 4).has_value());
}

}  // namespace
}  // namespace tableforge
