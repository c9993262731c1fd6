#pragma once

// Exact non-negative rational weights. Clause weights come from decimal
// hyperparameters, so denominators stay small powers of ten; arithmetic is
// exact and WCNF export can scale to integers without rounding.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace metaqnl {

class Rational {
 public:
  constexpr Rational() : num_(0), den_(1) {}
  Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) { normalize(); }

  static Rational parse(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty rational");
    std::size_t dot = text.find('.');
    bool neg = text[0] == '-';
    std::string digits = text;
    if (dot == std::string::npos) return Rational(std::stoll(text), 1);
    digits.erase(dot, 1);
    std::int64_t den = 1;
    for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
    (void)neg;
    return Rational(std::stoll(digits), den);
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend Rational operator*(const Rational& a, std::int64_t k) { return Rational(a.num_ * k, a.den_); }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return a.num_ * b.den_ < b.num_ * a.den_;
  }
  friend bool operator<=(const Rational& a, const Rational& b) { return a < b || a == b; }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator>=(const Rational& a, const Rational& b) { return b <= a; }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  void normalize() {
    if (den_ == 0) throw std::invalid_argument("zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }
  std::int64_t num_;
  std::int64_t den_;
};

// A soft-clause weight: a finite positive rational, or "hard" (infinite).
struct Weight {
  bool hard = false;
  Rational value;

  static Weight top() { return Weight{true, Rational()}; }
  static Weight finite(Rational r) { return Weight{false, r}; }

  static Weight parse(const std::string& text) {
    if (text == "hard" || text == "inf" || text == "infinity") return top();
    return finite(Rational::parse(text));
  }
  std::string str() const { return hard ? "hard" : value.str(); }
};

}  // namespace metaqnl
