#pragma once

// Exact signed rational numbers.
//
// Values whose numerator and denominator fit in 64 bits are stored inline and
// combined through 128-bit intermediates; anything larger spills into a boost
// cpp_rational. The representation is canonical (lowest terms, positive
// denominator, inline whenever it fits) so equality is structural.

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <compare>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mida {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

class Rational {
public:
    Rational() = default;
    Rational(std::int64_t value) : num_(value) {  // NOLINT: implicit from integers is intended
        if (value < kMin) assign_big(BigRational(BigInt(value)));
    }
    Rational(int value) : num_(value) {}           // NOLINT
    Rational(std::int64_t num, std::int64_t den) { assign128(num, den); }

    explicit Rational(const BigRational& value) { assign_big(value); }
    explicit Rational(const BigInt& value) { assign_big(BigRational(value)); }

    /// Parses "n", "-n" or "n/d" (d > 0). Throws std::invalid_argument.
    static Rational parse(std::string_view text);

    [[nodiscard]] bool is_small() const { return big_ == nullptr; }
    [[nodiscard]] int sign() const;
    [[nodiscard]] bool is_zero() const { return sign() == 0; }
    [[nodiscard]] bool is_integer() const;

    [[nodiscard]] BigRational to_big() const;
    [[nodiscard]] BigInt numerator() const;
    [[nodiscard]] BigInt denominator() const;
    [[nodiscard]] double to_double() const;
    [[nodiscard]] std::string to_string() const;

    Rational operator-() const;
    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b);
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

private:
    using i128 = __int128;
    using u128 = unsigned __int128;

    static constexpr std::int64_t kMin = std::numeric_limits<std::int64_t>::min() + 1;
    static constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();

    static u128 gcd128(u128 a, u128 b) {
        while (b != 0) {
            u128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }
    static u128 abs128(i128 v) { return v < 0 ? u128(-v) : u128(v); }
    static bool fits(i128 v) { return v >= kMin && v <= kMax; }

    static BigInt to_bigint(i128 v) {
        bool neg = v < 0;
        u128 m = abs128(v);
        BigInt r = static_cast<std::uint64_t>(m >> 64);
        r <<= 64;
        r += static_cast<std::uint64_t>(m);
        return neg ? BigInt(-r) : r;
    }

    void assign128(i128 num, i128 den) {
        if (den == 0) throw std::domain_error("Rational: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        u128 g = gcd128(abs128(num), u128(den));
        if (g > 1) {
            num /= i128(g);
            den /= i128(g);
        }
        if (fits(num) && fits(den)) {
            num_ = std::int64_t(num);
            den_ = std::int64_t(den);
            big_.reset();
        } else {
            big_ = std::make_shared<const BigRational>(to_bigint(num), to_bigint(den));
            num_ = 0;
            den_ = 1;
        }
    }

    void assign_big(const BigRational& v) {
        const BigInt& n = boost::multiprecision::numerator(v);
        const BigInt& d = boost::multiprecision::denominator(v);
        if (n >= kMin && n <= kMax && d <= kMax) {
            num_ = n.convert_to<std::int64_t>();
            den_ = d.convert_to<std::int64_t>();
            big_.reset();
        } else {
            big_ = std::make_shared<const BigRational>(v);
            num_ = 0;
            den_ = 1;
        }
    }

    static Rational from_big(const BigRational& v) {
        Rational r;
        r.assign_big(v);
        return r;
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
    std::shared_ptr<const BigRational> big_;
};

inline Rational Rational::parse(std::string_view text) {
    auto fail = [&] { throw std::invalid_argument("not a rational number: \"" + std::string(text) + "\""); };
    auto parse_int = [&](std::string_view s) -> BigInt {
        std::string_view digits = s;
        bool neg = false;
        if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) {
            neg = digits.front() == '-';
            digits.remove_prefix(1);
        }
        if (digits.empty()) fail();
        BigInt v = 0;
        for (char c : digits) {
            if (c < '0' || c > '9') fail();
            v = v * 10 + (c - '0');
        }
        return neg ? BigInt(-v) : v;
    };
    auto slash = text.find('/');
    if (slash == std::string_view::npos) return Rational(BigRational(parse_int(text)));
    std::string_view den_text = text.substr(slash + 1);
    if (!den_text.empty() && (den_text.front() == '-' || den_text.front() == '+')) fail();
    BigInt den = parse_int(den_text);
    if (den == 0) fail();
    return Rational(BigRational(parse_int(text.substr(0, slash)), den));
}

inline int Rational::sign() const {
    if (big_) return big_->sign();
    return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0);
}

inline bool Rational::is_integer() const {
    if (big_) return boost::multiprecision::denominator(*big_) == 1;
    return den_ == 1;
}

inline BigRational Rational::to_big() const {
    if (big_) return *big_;
    return BigRational(BigInt(num_), BigInt(den_));
}

inline BigInt Rational::numerator() const {
    return big_ ? BigInt(boost::multiprecision::numerator(*big_)) : BigInt(num_);
}

inline BigInt Rational::denominator() const {
    return big_ ? BigInt(boost::multiprecision::denominator(*big_)) : BigInt(den_);
}

inline double Rational::to_double() const {
    if (big_) return big_->convert_to<double>();
    return double(num_) / double(den_);
}

inline std::string Rational::to_string() const {
    if (big_) {
        std::string s = boost::multiprecision::numerator(*big_).str();
        const auto& d = boost::multiprecision::denominator(*big_);
        if (d != 1) s += "/" + d.str();
        return s;
    }
    std::string s = std::to_string(num_);
    if (den_ != 1) s += "/" + std::to_string(den_);
    return s;
}

inline Rational Rational::operator-() const {
    if (big_) return from_big(-*big_);
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
}

inline Rational operator+(const Rational& a, const Rational& b) {
    if (a.big_ || b.big_) return Rational::from_big(a.to_big() + b.to_big());
    if (a.den_ == 1 && b.den_ == 1) {
        std::int64_t s;
        if (!__builtin_add_overflow(a.num_, b.num_, &s) && s >= Rational::kMin) return Rational(s);
    }
    Rational r;
    if (a.den_ == b.den_) {
        r.assign128(Rational::i128(a.num_) + b.num_, a.den_);
    } else {
        auto g = std::gcd(a.den_, b.den_);
        Rational::i128 num = Rational::i128(a.num_) * (b.den_ / g) + Rational::i128(b.num_) * (a.den_ / g);
        r.assign128(num, Rational::i128(a.den_) * (b.den_ / g));
    }
    return r;
}

inline Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

inline Rational operator*(const Rational& a, const Rational& b) {
    if (a.big_ || b.big_) return Rational::from_big(a.to_big() * b.to_big());
    if (a.num_ == 0 || b.num_ == 0) return Rational();
    auto g1 = std::gcd(a.num_, b.den_);
    auto g2 = std::gcd(b.num_, a.den_);
    Rational r;
    r.assign128(Rational::i128(a.num_ / g1) * (b.num_ / g2), Rational::i128(a.den_ / g2) * (b.den_ / g1));
    return r;
}

inline Rational operator/(const Rational& a, const Rational& b) {
    if (b.is_zero()) throw std::domain_error("Rational: division by zero");
    if (a.big_ || b.big_) return Rational::from_big(a.to_big() / b.to_big());
    Rational inv;
    inv.assign128(b.den_, b.num_);
    return a * inv;
}

inline bool operator==(const Rational& a, const Rational& b) {
    if (a.big_ || b.big_) {
        if (!a.big_ || !b.big_) return false;  // canonical form: small values are never stored big
        return *a.big_ == *b.big_;
    }
    return a.num_ == b.num_ && a.den_ == b.den_;
}

inline std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    if (a.big_ || b.big_) {
        auto x = a.to_big(), y = b.to_big();
        if (x < y) return std::strong_ordering::less;
        if (x > y) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }
    if (a.den_ == b.den_) return a.num_ <=> b.num_;
    Rational::i128 l = Rational::i128(a.num_) * b.den_;
    Rational::i128 r = Rational::i128(b.num_) * a.den_;
    if (l < r) return std::strong_ordering::less;
    if (l > r) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

inline Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }
inline const Rational& max(const Rational& a, const Rational& b) { return a < b ? b : a; }
inline const Rational& min(const Rational& a, const Rational& b) { return b < a ? b : a; }

/// Least common multiple of the denominators of a range of rationals.
template <class Range>
BigInt denominator_lcm(const Range& values) {
    BigInt l = 1;
    for (const Rational& v : values) {
        BigInt d = v.denominator();
        if (d != 1) l = boost::multiprecision::lcm(l, d);
    }
    return l;
}

/// Up to 15 significant digits, locale independent.
inline std::string to_decimal(double v, int significant = 15) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, significant);
    return std::string(buf, res.ptr);
}

}  // namespace mida
