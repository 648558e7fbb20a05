#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>

namespace mosto {

// A delay stored as integer picoseconds. Every RTT, path length and modeled
// time goes through this type so that sums compare exactly.
class Delay {
 public:
  static constexpr std::int64_t kPicosPerMs = 1'000'000'000;

  constexpr Delay() = default;
  static constexpr Delay from_picos(std::int64_t ps) { return Delay(ps); }
  static Delay from_ms(double ms) {
    return Delay(static_cast<std::int64_t>(std::llround(ms * static_cast<double>(kPicosPerMs))));
  }
  static constexpr Delay infinite() { return Delay(std::numeric_limits<std::int64_t>::max()); }
  static constexpr Delay zero() { return Delay(0); }

  constexpr std::int64_t picos() const { return ps_; }
  double ms() const { return static_cast<double>(ps_) / static_cast<double>(kPicosPerMs); }
  constexpr bool is_infinite() const { return ps_ == std::numeric_limits<std::int64_t>::max(); }

  constexpr Delay operator+(Delay o) const { return Delay(ps_ + o.ps_); }
  constexpr Delay operator-(Delay o) const { return Delay(ps_ - o.ps_); }
  constexpr Delay& operator+=(Delay o) { ps_ += o.ps_; return *this; }
  constexpr Delay operator*(std::int64_t k) const { return Delay(ps_ * k); }

  constexpr auto operator<=>(const Delay&) const = default;

 private:
  constexpr explicit Delay(std::int64_t ps) : ps_(ps) {}
  std::int64_t ps_ = 0;
};

// Largest RTT accepted anywhere (1000 s). Keeps every path sum far from overflow.
inline constexpr double kMaxRttMs = 1.0e6;

}  // namespace mosto
