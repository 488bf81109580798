#include <doctest.h>

#include "cgode/precision.hpp"

using namespace cgode;

TEST_CASE("make_context basics") {
  PrecisionContext c16 = make_context(16);
  CHECK(c16.digits() == 16);
  CHECK(c16.eps().str() == "1.000000000000000e-16");

  PrecisionContext c420 = make_context(420);
  CHECK(c420.digits() == 420);
  // eps = 10^-420 formats back exactly at the context digit count.
  CHECK(c420.eps().str(8) == "1.0000000e-420");

  CHECK_THROWS_AS(make_context(3), ConfigError);
  CHECK_THROWS_AS(make_context(PrecisionContext::kMaxDigits + 1), ConfigError);
}

TEST_CASE("parse_decimal literals and errors") {
  PrecisionContext ctx = make_context(32);
  CHECK(parse_decimal("2.5", ctx).str(2) == "2.5e0");
  CHECK(parse_decimal("-1e3", ctx).to_double() == -1000.0);
  CHECK(parse_decimal("1e-420", make_context(420)).str(4) == "1.000e-420");

  CHECK_THROWS_AS(parse_decimal("abc", ctx), ParseError);
  CHECK_THROWS_AS(parse_decimal("8/3", ctx), ParseError);
  CHECK_THROWS_AS(parse_decimal("", ctx), ParseError);
  CHECK_THROWS_AS(parse_decimal("1.2e", ctx), ParseError);
  try {
    parse_decimal("12x4", ctx);
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.position() == 2);
  }
}

TEST_CASE("format/parse round-trip is string-stable") {
  PrecisionContext ctx = make_context(24);
  // Digits of 8/3: not representable exactly, but the printed form must
  // re-parse to the same printed form.
  BigScalar x = BigScalar(ctx, 8) / BigScalar(ctx, 3);
  std::string s1 = format_decimal(x);
  BigScalar y = parse_decimal(s1, ctx);
  CHECK(format_decimal(y) == s1);

  // Exact round-trip through str_exact recovers the bits.
  BigScalar z = parse_decimal(x.str_exact(), ctx);
  CHECK(z == x);

  CHECK(BigScalar(ctx, 0).str() == "0");
  CHECK(parse_decimal("0", ctx).str() == "0");
}

TEST_CASE("arithmetic accuracy near working precision") {
  PrecisionContext ctx = make_context(40);
  BigScalar a = parse_decimal("1.2345678901234567890123456789", ctx);
  BigScalar b = parse_decimal("9.87654321e-5", ctx);
  BigScalar round_trip = (a + b) - b;
  BigScalar err = abs(round_trip - a) / abs(a);
  // (a+b)-b agrees with a to >= digits-2 figures.
  CHECK(err < pow10(-38, ctx));

  CHECK(sqrt(BigScalar(ctx, 4)).cmp(2) == 0);
  BigScalar e1 = exp(BigScalar(ctx, 1));
  CHECK(e1.str(11) == "2.7182818285e0");
  CHECK(log10(pow10(-16, ctx)).cmp(-16) == 0);
}

TEST_CASE("mixed-context arithmetic is rejected") {
  PrecisionContext c16 = make_context(16);
  PrecisionContext c32 = make_context(32);
  BigScalar a(c16, 1);
  BigScalar b(c32, 1);
  CHECK_THROWS_AS(a + b, MixedPrecisionError);
  CHECK_THROWS_AS(a += b, MixedPrecisionError);
  CHECK_THROWS_AS((void)(a < b), MixedPrecisionError);
  // Same digit count from two separately made contexts is fine.
  BigScalar c(make_context(16), 2);
  CHECK((a + c).cmp(3) == 0);
}

TEST_CASE("in-place fused operations") {
  PrecisionContext ctx = make_context(20);
  BigScalar acc(ctx, 1);
  acc.add_mul(BigScalar(ctx, 3), BigScalar(ctx, 4));  // 1 + 12
  CHECK(acc.cmp(13) == 0);
  acc.sub_mul(BigScalar(ctx, 2), BigScalar(ctx, 5));  // 13 - 10
  CHECK(acc.cmp(3) == 0);
  acc.negate();
  CHECK(acc.cmp(-3) == 0);
}
