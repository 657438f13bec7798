#pragma once

// Exact rational numbers.
//
// Values whose reduced numerator and denominator fit in int64 are kept inline
// and combined with 128-bit intermediates; anything larger is promoted to a
// shared, immutable GMP rational. Results are demoted back to the inline form
// whenever they fit, so the representation of a value is canonical.

#include <gmpxx.h>

#include <compare>
#include <concepts>
#include <cstdint>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace mba {

class Rational {
 public:
  Rational() = default;
  template <std::integral I>
  Rational(I value) : num_(checked_small(value)), den_(1) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t num, std::int64_t den) { assign_fraction(num, den); }

  explicit Rational(const mpq_class& value) { assign_big(value); }

  /// Parses "n", "-n", "n/d" (optionally signed numerator). Throws
  /// std::invalid_argument on malformed text or a zero denominator.
  static Rational parse(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty rational");
    std::size_t slash = text.find('/');
    auto valid_int = [](std::string_view s, bool allow_sign) {
      if (s.empty()) return false;
      std::size_t k = 0;
      if (allow_sign && (s[0] == '-' || s[0] == '+')) k = 1;
      if (k == s.size()) return false;
      for (; k < s.size(); ++k) {
        if (s[k] < '0' || s[k] > '9') return false;
      }
      return true;
    };
    std::string_view num_text = text.substr(0, slash);
    std::string_view den_text = slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
    if (!valid_int(num_text, true) || !valid_int(den_text, false)) {
      throw std::invalid_argument("malformed rational: " + std::string(text));
    }
    std::string n(num_text);
    if (!n.empty() && n[0] == '+') n.erase(0, 1);
    mpz_class num(n, 10);
    mpz_class den(std::string(den_text), 10);
    if (den == 0) throw std::invalid_argument("zero denominator: " + std::string(text));
    mpq_class q(num, den);
    q.canonicalize();
    return Rational(q);
  }

  /// Exact conversion of a finite double (every double is a dyadic rational).
  static Rational from_double(double value) {
    if (!(value == value) || value == std::numeric_limits<double>::infinity() ||
        value == -std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("non-finite double");
    }
    mpq_class q(value);
    return Rational(q);
  }

  bool is_big() const { return static_cast<bool>(big_); }
  /// Inline numerator/denominator; meaningful only when !is_big().
  std::int64_t small_num() const { return num_; }
  std::int64_t small_den() const { return den_; }
  bool is_zero() const { return !big_ && num_ == 0; }
  bool is_integer() const { return big_ ? big_->get_den() == 1 : den_ == 1; }
  int sign() const {
    if (big_) return sgn(*big_);
    return (num_ > 0) - (num_ < 0);
  }

  mpq_class to_mpq() const {
    if (big_) return *big_;
    mpq_class q;
    set_mpz_from_int64(q.get_num(), num_);
    set_mpz_from_int64(q.get_den(), den_);
    return q;
  }

  mpz_class numerator() const { return to_mpq().get_num(); }
  mpz_class denominator() const { return to_mpq().get_den(); }

  double to_double() const {
    if (big_) return big_->get_d();
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  /// "n" for integers, "n/d" otherwise.
  std::string str() const {
    if (big_) return big_->get_str();
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  /// Fixed-point rendering with `digits` fractional digits, rounded half away
  /// from zero. Computed exactly.
  std::string to_decimal(int digits = 12) const {
    mpq_class q = to_mpq();
    bool negative = sgn(q) < 0;
    if (negative) q = -q;
    mpz_class scale = 1;
    for (int k = 0; k < digits; ++k) scale *= 10;
    mpz_class scaled_num = q.get_num() * scale * 2 + q.get_den();
    mpz_class scaled_den = q.get_den() * 2;
    mpz_class rounded;
    mpz_fdiv_q(rounded.get_mpz_t(), scaled_num.get_mpz_t(), scaled_den.get_mpz_t());
    std::string body = rounded.get_str();
    if (digits > 0) {
      if (body.size() <= static_cast<std::size_t>(digits)) {
        body.insert(0, static_cast<std::size_t>(digits) + 1 - body.size(), '0');
      }
      body.insert(body.size() - static_cast<std::size_t>(digits), ".");
    }
    if (negative && rounded != 0) body.insert(0, "-");
    return body;
  }

  Rational operator-() const {
    if (big_) return Rational(mpq_class(-*big_));
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    if (!a.big_ && !b.big_) {
      if (a.den_ == b.den_) return from_wide(static_cast<Wide>(a.num_) + b.num_, a.den_);
      Wide n = static_cast<Wide>(a.num_) * b.den_ + static_cast<Wide>(b.num_) * a.den_;
      Wide d = static_cast<Wide>(a.den_) * b.den_;
      return from_wide(n, d);
    }
    return Rational(mpq_class(a.to_mpq() + b.to_mpq()));
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    if (!a.big_ && !b.big_) {
      if (a.den_ == b.den_) return from_wide(static_cast<Wide>(a.num_) - b.num_, a.den_);
      Wide n = static_cast<Wide>(a.num_) * b.den_ - static_cast<Wide>(b.num_) * a.den_;
      Wide d = static_cast<Wide>(a.den_) * b.den_;
      return from_wide(n, d);
    }
    return Rational(mpq_class(a.to_mpq() - b.to_mpq()));
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    if (!a.big_ && !b.big_) {
      if (a.num_ == 0 || b.num_ == 0) return Rational();
      std::int64_t g1 = gcd64(a.num_, b.den_);
      std::int64_t g2 = gcd64(b.num_, a.den_);
      Wide n = static_cast<Wide>(a.num_ / g1) * (b.num_ / g2);
      Wide d = static_cast<Wide>(a.den_ / g2) * (b.den_ / g1);
      return from_reduced_wide(n, d);
    }
    return Rational(mpq_class(a.to_mpq() * b.to_mpq()));
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.is_zero()) throw std::domain_error("division by zero");
    if (!a.big_ && !b.big_) {
      if (a.num_ == 0) return Rational();
      std::int64_t g1 = gcd64(a.num_, b.num_);
      std::int64_t g2 = gcd64(a.den_, b.den_);
      Wide n = static_cast<Wide>(a.num_ / g1) * (b.den_ / g2);
      Wide d = static_cast<Wide>(a.den_ / g2) * (b.num_ / g1);
      if (d < 0) {
        n = -n;
        d = -d;
      }
      return from_reduced_wide(n, d);
    }
    return Rational(mpq_class(a.to_mpq() / b.to_mpq()));
  }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    if (!a.big_ && !b.big_) return a.num_ == b.num_ && a.den_ == b.den_;
    if (a.big_ && b.big_) return *a.big_ == *b.big_;
    // Canonical form: a big value never equals a small one.
    return false;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    if (!a.big_ && !b.big_) {
      if (a.den_ == b.den_) return a.num_ <=> b.num_;
      Wide lhs = static_cast<Wide>(a.num_) * b.den_;
      Wide rhs = static_cast<Wide>(b.num_) * a.den_;
      return lhs <=> rhs;
    }
    int c = cmp(a.to_mpq(), b.to_mpq());
    return c <=> 0;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  using Wide = __int128;
  using UWide = unsigned __int128;

  static constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();

  template <std::integral I>
  static std::int64_t checked_small(I v) {
    // The inline range is symmetric: INT64_MIN is excluded.
    if constexpr (std::is_signed_v<I>) {
      if (static_cast<std::int64_t>(v) == std::numeric_limits<std::int64_t>::min()) {
        throw std::overflow_error("integer out of inline range");
      }
    } else {
      if (static_cast<std::uint64_t>(v) > static_cast<std::uint64_t>(kMax)) {
        throw std::overflow_error("integer out of inline range");
      }
    }
    return static_cast<std::int64_t>(v);
  }

  static std::int64_t gcd64(std::int64_t a, std::int64_t b) {
    std::uint64_t x = a < 0 ? static_cast<std::uint64_t>(-a) : static_cast<std::uint64_t>(a);
    std::uint64_t y = b < 0 ? static_cast<std::uint64_t>(-b) : static_cast<std::uint64_t>(b);
    while (y != 0) {
      std::uint64_t t = x % y;
      x = y;
      y = t;
    }
    return static_cast<std::int64_t>(x == 0 ? 1 : x);
  }

  static UWide gcd_wide(UWide a, UWide b) {
    while (b != 0) {
      UWide t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static bool fits(Wide v) { return v <= kMax && v >= -kMax; }

  static void set_mpz_from_int64(mpz_class& out, std::int64_t v) {
    if (v >= std::numeric_limits<long>::min() && v <= std::numeric_limits<long>::max()) {
      out = static_cast<long>(v);
    } else {
      out = std::to_string(v);
    }
  }

  static mpz_class mpz_from_wide(Wide v) {
    bool neg = v < 0;
    UWide u = neg ? static_cast<UWide>(-v) : static_cast<UWide>(v);
    mpz_class hi = static_cast<unsigned long>(static_cast<std::uint64_t>(u >> 64));
    mpz_class lo = static_cast<unsigned long>(static_cast<std::uint64_t>(u));
    mpz_class r = (hi << 64) + lo;
    return neg ? mpz_class(-r) : r;
  }

  // n/d with d > 0, not necessarily reduced.
  static Rational from_wide(Wide n, Wide d) {
    if (n == 0) return Rational();
    UWide un = n < 0 ? static_cast<UWide>(-n) : static_cast<UWide>(n);
    UWide g = gcd_wide(un, static_cast<UWide>(d));
    if (g > 1) {
      n /= static_cast<Wide>(g);
      d /= static_cast<Wide>(g);
    }
    return from_reduced_wide(n, d);
  }

  static Rational from_reduced_wide(Wide n, Wide d) {
    Rational r;
    if (fits(n) && fits(d)) {
      r.num_ = static_cast<std::int64_t>(n);
      r.den_ = static_cast<std::int64_t>(d);
      return r;
    }
    mpq_class q;
    q.get_num() = mpz_from_wide(n);
    q.get_den() = mpz_from_wide(d);
    r.big_ = std::make_shared<const mpq_class>(q);
    return r;
  }

  void assign_fraction(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::domain_error("zero denominator");
    *this = from_wide(den < 0 ? -static_cast<Wide>(num) : static_cast<Wide>(num),
                      den < 0 ? -static_cast<Wide>(den) : static_cast<Wide>(den));
  }

  void assign_big(const mpq_class& value) {
    mpq_class q = value;
    q.canonicalize();
    if (mpz_fits_slong_p(q.get_num_mpz_t()) && mpz_fits_slong_p(q.get_den_mpz_t())) {
      long n = q.get_num().get_si();
      long d = q.get_den().get_si();
      if (n != std::numeric_limits<long>::min()) {
        num_ = n;
        den_ = d;
        big_.reset();
        return;
      }
    }
    num_ = 0;
    den_ = 1;
    big_ = std::make_shared<const mpq_class>(q);
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
  std::shared_ptr<const mpq_class> big_;
};

inline Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }
inline const Rational& min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline const Rational& max(const Rational& a, const Rational& b) { return a < b ? b : a; }

/// Smallest integer >= r.
inline mpz_class ceil(const Rational& r) {
  mpq_class q = r.to_mpq();
  mpz_class out;
  mpz_cdiv_q(out.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return out;
}

}  // namespace mba
