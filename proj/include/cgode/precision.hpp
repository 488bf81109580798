#pragma once

#include <mpfr.h>

#include <string>
#include <utility>

#include "cgode/errors.hpp"

namespace cgode {

class BigScalar;

// Working-precision descriptor. A context requests a number of significant
// decimal digits; arithmetic runs at the smallest binary precision that
// carries them, so the effective machine epsilon of a context is 10^-digits
// up to the binary/decimal grain. Contexts are immutable values; scalars
// from contexts with different digit counts must not be mixed.
class PrecisionContext {
 public:
  static constexpr int kMinDigits = 4;
  // Implementation-declared maximum. MPFR supports far more, but nothing in
  // this toolkit is specified beyond a few thousand digits.
  static constexpr int kMaxDigits = 10000;

  explicit PrecisionContext(int decimal_digits);

  int digits() const { return digits_; }
  mpfr_prec_t bits() const { return bits_; }

  // eps = 10^(-digits), correctly rounded: the working machine epsilon.
  BigScalar eps() const;
  // n_mach = -log10(eps) = digits, as a scalar of this context.
  BigScalar n_mach() const;

  BigScalar scalar(long value = 0) const;
  // Parses a signed decimal or scientific-notation literal.
  BigScalar parse(const std::string& decimal) const;

  bool compatible(const PrecisionContext& other) const {
    return digits_ == other.digits_;
  }
  bool operator==(const PrecisionContext& other) const {
    return digits_ == other.digits_;
  }

 private:
  int digits_;
  mpfr_prec_t bits_;
};

PrecisionContext make_context(int decimal_digits);

// Binary precision carrying `decimal_digits` significant decimal digits.
mpfr_prec_t precision_bits(int decimal_digits);

// Arbitrary-precision real number bound to a PrecisionContext. Value
// semantics; every operation rounds to the working precision (MPFR round to
// nearest). Binary operators allocate a fresh result; the *_assign methods
// and compound operators mutate in place and are what hot loops should use.
class BigScalar {
 public:
  BigScalar();  // empty sentinel; any arithmetic on it throws
  BigScalar(const PrecisionContext& ctx, long value);
  explicit BigScalar(const PrecisionContext& ctx) : BigScalar(ctx, 0) {}

  BigScalar(const BigScalar& other);
  BigScalar(BigScalar&& other) noexcept;
  BigScalar& operator=(const BigScalar& other);
  BigScalar& operator=(BigScalar&& other) noexcept;
  ~BigScalar();

  bool empty() const { return digits_ == 0; }
  int digits() const { return digits_; }
  PrecisionContext ctx() const;

  // Raw handle for read-only interop inside the library.
  mpfr_srcptr raw() const { return v_; }
  mpfr_ptr raw() { return v_; }

  void set(long value);
  void set(const BigScalar& other);  // same-context copy of the value
  void set_zero() { mpfr_set_zero(v_, 1); }

  // In-place arithmetic.
  BigScalar& operator+=(const BigScalar& b);
  BigScalar& operator-=(const BigScalar& b);
  BigScalar& operator*=(const BigScalar& b);
  BigScalar& operator/=(const BigScalar& b);
  BigScalar& operator*=(long b);
  BigScalar& operator/=(long b);
  BigScalar& negate();
  BigScalar& abs_assign();
  // *this += a*b, fused (single rounding).
  BigScalar& add_mul(const BigScalar& a, const BigScalar& b);
  // *this -= a*b, fused.
  BigScalar& sub_mul(const BigScalar& a, const BigScalar& b);

  friend BigScalar operator+(const BigScalar& a, const BigScalar& b);
  friend BigScalar operator-(const BigScalar& a, const BigScalar& b);
  friend BigScalar operator*(const BigScalar& a, const BigScalar& b);
  friend BigScalar operator/(const BigScalar& a, const BigScalar& b);
  friend BigScalar operator-(const BigScalar& a);
  friend BigScalar operator*(const BigScalar& a, long b);
  friend BigScalar operator*(long a, const BigScalar& b);
  friend BigScalar operator/(const BigScalar& a, long b);
  friend BigScalar operator/(long a, const BigScalar& b);
  friend BigScalar operator+(const BigScalar& a, long b);
  friend BigScalar operator-(const BigScalar& a, long b);

  friend bool operator<(const BigScalar& a, const BigScalar& b);
  friend bool operator>(const BigScalar& a, const BigScalar& b);
  friend bool operator<=(const BigScalar& a, const BigScalar& b);
  friend bool operator>=(const BigScalar& a, const BigScalar& b);
  friend bool operator==(const BigScalar& a, const BigScalar& b);
  friend bool operator!=(const BigScalar& a, const BigScalar& b);

  int sign() const { return mpfr_sgn(v_); }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_nan() const { return mpfr_nan_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  int cmp(long value) const { return mpfr_cmp_si(v_, value); }

  // Decimal serialization with `significant_digits` digits (default: the
  // context's digit count). Normalized scientific form, e.g. "-2.5000e-1".
  std::string str() const;
  std::string str(int significant_digits) const;
  // Enough digits that parsing back at the same precision recovers the
  // exact binary value (used by trajectory/checkpoint files).
  std::string str_exact() const;

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  long to_long() const { return mpfr_get_si(v_, MPFR_RNDN); }

 private:
  void require_nonempty() const;
  void require_same_ctx(const BigScalar& other) const;

  mpfr_t v_;
  int digits_ = 0;
};

// Parses `s` as a decimal literal under `ctx`. Throws ParseError with the
// offset of the first offending character on malformed input.
BigScalar parse_decimal(const std::string& s, const PrecisionContext& ctx);

// Formats with exactly `significant_digits` significant decimal digits
// (context digit count when omitted). parse(format(x)) formats back to the
// identical string.
std::string format_decimal(const BigScalar& x);
std::string format_decimal(const BigScalar& x, int significant_digits);

BigScalar sqrt(const BigScalar& a);
BigScalar exp(const BigScalar& a);
BigScalar log(const BigScalar& a);
BigScalar log10(const BigScalar& a);
BigScalar pow(const BigScalar& base, const BigScalar& exponent);
BigScalar pow(const BigScalar& base, long exponent);
// 10^e as a scalar of ctx.
BigScalar pow10(long e, const PrecisionContext& ctx);
BigScalar abs(const BigScalar& a);
const BigScalar& max(const BigScalar& a, const BigScalar& b);
const BigScalar& min(const BigScalar& a, const BigScalar& b);

}  // namespace cgode
