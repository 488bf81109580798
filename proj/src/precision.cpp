#include "cgode/precision.hpp"

#include <cctype>
#include <cmath>
#include <cstring>

namespace cgode {

namespace {
constexpr long double kLog2Of10 = 3.3219280948873623478703194294894L;
}

mpfr_prec_t precision_bits(int decimal_digits) {
  return static_cast<mpfr_prec_t>(
      std::ceil(static_cast<long double>(decimal_digits) * kLog2Of10));
}

PrecisionContext::PrecisionContext(int decimal_digits)
    : digits_(decimal_digits), bits_(precision_bits(decimal_digits)) {
  if (decimal_digits < kMinDigits) {
    throw ConfigError("precision request of " + std::to_string(decimal_digits) +
                      " digits is below the minimum of " +
                      std::to_string(kMinDigits));
  }
  if (decimal_digits > kMaxDigits) {
    throw ConfigError("precision request of " + std::to_string(decimal_digits) +
                      " digits exceeds the supported maximum of " +
                      std::to_string(kMaxDigits));
  }
}

PrecisionContext make_context(int decimal_digits) {
  return PrecisionContext(decimal_digits);
}

BigScalar PrecisionContext::eps() const { return pow10(-digits_, *this); }

BigScalar PrecisionContext::n_mach() const { return scalar(digits_); }

BigScalar PrecisionContext::scalar(long value) const {
  return BigScalar(*this, value);
}

BigScalar PrecisionContext::parse(const std::string& decimal) const {
  return parse_decimal(decimal, *this);
}

BigScalar::BigScalar() {
  // Minimal placeholder; flagged empty so any use is rejected.
  mpfr_init2(v_, MPFR_PREC_MIN);
  mpfr_set_nan(v_);
}

BigScalar::BigScalar(const PrecisionContext& ctx, long value)
    : digits_(ctx.digits()) {
  mpfr_init2(v_, ctx.bits());
  mpfr_set_si(v_, value, MPFR_RNDN);
}

BigScalar::BigScalar(const BigScalar& other) : digits_(other.digits_) {
  mpfr_init2(v_, mpfr_get_prec(other.v_));
  mpfr_set(v_, other.v_, MPFR_RNDN);
}

BigScalar::BigScalar(BigScalar&& other) noexcept : digits_(other.digits_) {
  v_[0] = other.v_[0];
  mpfr_init2(other.v_, MPFR_PREC_MIN);
  mpfr_set_nan(other.v_);
  other.digits_ = 0;
}

BigScalar& BigScalar::operator=(const BigScalar& other) {
  if (this != &other) {
    mpfr_set_prec(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);
    digits_ = other.digits_;
  }
  return *this;
}

BigScalar& BigScalar::operator=(BigScalar&& other) noexcept {
  if (this != &other) {
    mpfr_swap(v_, other.v_);
    std::swap(digits_, other.digits_);
  }
  return *this;
}

BigScalar::~BigScalar() { mpfr_clear(v_); }

PrecisionContext BigScalar::ctx() const {
  require_nonempty();
  return PrecisionContext(digits_);
}

void BigScalar::require_nonempty() const {
  if (digits_ == 0) {
    throw MixedPrecisionError("operation on an empty (default-constructed) scalar");
  }
}

void BigScalar::require_same_ctx(const BigScalar& other) const {
  require_nonempty();
  other.require_nonempty();
  if (digits_ != other.digits_) {
    throw MixedPrecisionError(
        "mixed-precision arithmetic: " + std::to_string(digits_) + " vs " +
        std::to_string(other.digits_) +
        " digit contexts (promote explicitly via parse/format)");
  }
}

void BigScalar::set(long value) {
  require_nonempty();
  mpfr_set_si(v_, value, MPFR_RNDN);
}

void BigScalar::set(const BigScalar& other) {
  require_same_ctx(other);
  mpfr_set(v_, other.v_, MPFR_RNDN);
}

BigScalar& BigScalar::operator+=(const BigScalar& b) {
  require_same_ctx(b);
  mpfr_add(v_, v_, b.v_, MPFR_RNDN);
  return *this;
}

BigScalar& BigScalar::operator-=(const BigScalar& b) {
  require_same_ctx(b);
  mpfr_sub(v_, v_, b.v_, MPFR_RNDN);
  return *this;
}

BigScalar& BigScalar::operator*=(const BigScalar& b) {
  require_same_ctx(b);
  mpfr_mul(v_, v_, b.v_, MPFR_RNDN);
  return *this;
}

BigScalar& BigScalar::operator/=(const BigScalar& b) {
  require_same_ctx(b);
  mpfr_div(v_, v_, b.v_, MPFR_RNDN);
  return *this;
}

BigScalar& BigScalar::operator*=(long b) {
  require_nonempty();
  mpfr_mul_si(v_, v_, b, MPFR_RNDN);
  return *this;
}

BigScalar& BigScalar::operator/=(long b) {
  require_nonempty();
  mpfr_div_si(v_, v_, b, MPFR_RNDN);
  return *this;
}

BigScalar& BigScalar::negate() {
  require_nonempty();
  mpfr_neg(v_, v_, MPFR_RNDN);
  return *this;
}

BigScalar& BigScalar::abs_assign() {
  require_nonempty();
  mpfr_abs(v_, v_, MPFR_RNDN);
  return *this;
}

BigScalar& BigScalar::add_mul(const BigScalar& a, const BigScalar& b) {
  require_same_ctx(a);
  require_same_ctx(b);
  mpfr_fma(v_, a.v_, b.v_, v_, MPFR_RNDN);
  return *this;
}

BigScalar& BigScalar::sub_mul(const BigScalar& a, const BigScalar& b) {
  require_same_ctx(a);
  require_same_ctx(b);
  // this - a*b = -(a*b - this)
  mpfr_fms(v_, a.v_, b.v_, v_, MPFR_RNDN);
  mpfr_neg(v_, v_, MPFR_RNDN);
  return *this;
}

BigScalar operator+(const BigScalar& a, const BigScalar& b) {
  a.require_same_ctx(b);
  BigScalar r(a.ctx());
  mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}

BigScalar operator-(const BigScalar& a, const BigScalar& b) {
  a.require_same_ctx(b);
  BigScalar r(a.ctx());
  mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}

BigScalar operator*(const BigScalar& a, const BigScalar& b) {
  a.require_same_ctx(b);
  BigScalar r(a.ctx());
  mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}

BigScalar operator/(const BigScalar& a, const BigScalar& b) {
  a.require_same_ctx(b);
  BigScalar r(a.ctx());
  mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}

BigScalar operator-(const BigScalar& a) {
  BigScalar r(a);
  r.negate();
  return r;
}

BigScalar operator*(const BigScalar& a, long b) {
  BigScalar r(a);
  r *= b;
  return r;
}

BigScalar operator*(long a, const BigScalar& b) { return b * a; }

BigScalar operator/(const BigScalar& a, long b) {
  BigScalar r(a);
  r /= b;
  return r;
}

BigScalar operator/(long a, const BigScalar& b) {
  BigScalar r(b.ctx());
  mpfr_si_div(r.v_, a, b.v_, MPFR_RNDN);
  return r;
}

BigScalar operator+(const BigScalar& a, long b) {
  BigScalar r(a);
  mpfr_add_si(r.v_, r.v_, b, MPFR_RNDN);
  return r;
}

BigScalar operator-(const BigScalar& a, long b) {
  BigScalar r(a);
  mpfr_sub_si(r.v_, r.v_, b, MPFR_RNDN);
  return r;
}

bool operator<(const BigScalar& a, const BigScalar& b) {
  a.require_same_ctx(b);
  return mpfr_less_p(a.v_, b.v_) != 0;
}
bool operator>(const BigScalar& a, const BigScalar& b) {
  a.require_same_ctx(b);
  return mpfr_greater_p(a.v_, b.v_) != 0;
}
bool operator<=(const BigScalar& a, const BigScalar& b) {
  a.require_same_ctx(b);
  return mpfr_lessequal_p(a.v_, b.v_) != 0;
}
bool operator>=(const BigScalar& a, const BigScalar& b) {
  a.require_same_ctx(b);
  return mpfr_greaterequal_p(a.v_, b.v_) != 0;
}
bool operator==(const BigScalar& a, const BigScalar& b) {
  a.require_same_ctx(b);
  return mpfr_equal_p(a.v_, b.v_) != 0;
}
bool operator!=(const BigScalar& a, const BigScalar& b) { return !(a == b); }

namespace {

// Validates the literal grammar: [+-] digits [. digits] [eE [+-] digits],
// requiring at least one digit in the significand. Returns the offset of the
// first invalid character, or npos when valid.
std::size_t find_literal_fault(const std::string& s) {
  std::size_t i = 0;
  const std::size_t n = s.size();
  if (n == 0) return 0;
  if (s[i] == '+' || s[i] == '-') ++i;
  std::size_t mantissa_digits = 0;
  while (i < n && std::isdigit(static_cast<unsigned char>(s[i]))) {
    ++i;
    ++mantissa_digits;
  }
  if (i < n && s[i] == '.') {
    ++i;
    while (i < n && std::isdigit(static_cast<unsigned char>(s[i]))) {
      ++i;
      ++mantissa_digits;
    }
  }
  if (mantissa_digits == 0) return i < n ? i : n;
  if (i < n && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < n && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < n && std::isdigit(static_cast<unsigned char>(s[i]))) {
      ++i;
      ++exp_digits;
    }
    if (exp_digits == 0) return i < n ? i : n;
  }
  return i == n ? std::string::npos : i;
}

}  // namespace

BigScalar parse_decimal(const std::string& s, const PrecisionContext& ctx) {
  const std::size_t fault = find_literal_fault(s);
  if (fault != std::string::npos) {
    throw ParseError("malformed decimal literal \"" + s + "\" at position " +
                         std::to_string(fault),
                     fault);
  }
  BigScalar r(ctx);
  // Grammar already validated; mpfr performs the correctly rounded conversion.
  mpfr_set_str(r.raw(), s.c_str(), 10, MPFR_RNDN);
  return r;
}

namespace {

std::string format_mpfr(mpfr_srcptr v, int significant_digits) {
  if (mpfr_nan_p(v)) return "nan";
  if (mpfr_inf_p(v)) return mpfr_sgn(v) < 0 ? "-inf" : "inf";
  if (mpfr_zero_p(v)) return mpfr_signbit(v) ? "-0" : "0";

  mpfr_exp_t exp10 = 0;
  char* raw = mpfr_get_str(nullptr, &exp10, 10,
                           static_cast<std::size_t>(significant_digits), v,
                           MPFR_RNDN);
  std::string digits(raw);
  mpfr_free_str(raw);

  std::string sign;
  if (!digits.empty() && digits[0] == '-') {
    sign = "-";
    digits.erase(0, 1);
  }
  // mpfr convention: value = 0.digits * 10^exp10. Normalize to d.ddd e(exp-1).
  std::string out = sign + digits.substr(0, 1);
  if (digits.size() > 1) out += "." + digits.substr(1);
  out += "e" + std::to_string(static_cast<long>(exp10) - 1);
  return out;
}

}  // namespace

std::string BigScalar::str() const {
  require_nonempty();
  return format_mpfr(v_, digits_);
}

std::string BigScalar::str(int significant_digits) const {
  require_nonempty();
  if (significant_digits < 2) {
    throw ConfigError("format_decimal requires at least 2 significant digits");
  }
  return format_mpfr(v_, significant_digits);
}

std::string BigScalar::str_exact() const {
  require_nonempty();
  // Digits needed for an exact binary round-trip at this precision.
  const int rt =
      static_cast<int>(std::ceil(static_cast<long double>(mpfr_get_prec(v_)) /
                                 kLog2Of10)) +
      1;
  return format_mpfr(v_, rt);
}

std::string format_decimal(const BigScalar& x) { return x.str(); }

std::string format_decimal(const BigScalar& x, int significant_digits) {
  return x.str(significant_digits);
}

BigScalar sqrt(const BigScalar& a) {
  BigScalar r(a.ctx());
  mpfr_sqrt(r.raw(), a.raw(), MPFR_RNDN);
  return r;
}

BigScalar exp(const BigScalar& a) {
  BigScalar r(a.ctx());
  mpfr_exp(r.raw(), a.raw(), MPFR_RNDN);
  return r;
}

BigScalar log(const BigScalar& a) {
  BigScalar r(a.ctx());
  mpfr_log(r.raw(), a.raw(), MPFR_RNDN);
  return r;
}

BigScalar log10(const BigScalar& a) {
  BigScalar r(a.ctx());
  mpfr_log10(r.raw(), a.raw(), MPFR_RNDN);
  return r;
}

BigScalar pow(const BigScalar& base, const BigScalar& exponent) {
  BigScalar r(base.ctx());
  mpfr_pow(r.raw(), base.raw(), exponent.raw(), MPFR_RNDN);
  return r;
}

BigScalar pow(const BigScalar& base, long exponent) {
  BigScalar r(base.ctx());
  mpfr_pow_si(r.raw(), base.raw(), exponent, MPFR_RNDN);
  return r;
}

BigScalar pow10(long e, const PrecisionContext& ctx) {
  BigScalar r(ctx, 10);
  mpfr_pow_si(r.raw(), r.raw(), e, MPFR_RNDN);
  return r;
}

BigScalar abs(const BigScalar& a) {
  BigScalar r(a);
  r.abs_assign();
  return r;
}

const BigScalar& max(const BigScalar& a, const BigScalar& b) {
  return a < b ? b : a;
}

const BigScalar& min(const BigScalar& a, const BigScalar& b) {
  return b < a ? b : a;
}

}  // namespace cgode
