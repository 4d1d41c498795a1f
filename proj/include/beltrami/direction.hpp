#pragma once

// Exact translation directions on the flat 3-torus.
//
// Each component lives in Z[sqrt2, sqrt3] = span_Z{1, sqrt2, sqrt3, sqrt6}. Since
// {1, sqrt2, sqrt3, sqrt6} is linearly independent over Q, the resonance test
// k . v == 0 for integer k reduces to four integer equations. No floating
// point tolerance is involved anywhere in that test.

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "beltrami/core.hpp"

namespace beltrami {

/// a + b sqrt2 + c sqrt3 + d sqrt6 with integer coefficients.
struct Surd {
  std::array<std::int64_t, 4> c{0, 0, 0, 0};

  static Surd integer(std::int64_t a) { return Surd{{a, 0, 0, 0}}; }

  double value() const {
    return static_cast<double>(c[0]) + static_cast<double>(c[1]) * std::sqrt(2.0) +
           static_cast<double>(c[2]) * std::sqrt(3.0) + static_cast<double>(c[3]) * std::sqrt(6.0);
  }
  bool is_zero() const { return c[0] == 0 && c[1] == 0 && c[2] == 0 && c[3] == 0; }
  bool is_integer() const { return c[1] == 0 && c[2] == 0 && c[3] == 0; }

  std::string to_string() const {
    static constexpr const char* kBasis[4] = {"", "sqrt2", "sqrt3", "sqrt6"};
    std::ostringstream os;
    bool first = true;
    for (int i = 0; i < 4; ++i) {
      if (c[i] == 0) continue;
      if (!first) os << (c[i] > 0 ? "+" : "");
      if (i == 0) {
        os << c[i];
      } else if (c[i] == 1) {
        os << kBasis[i];
      } else if (c[i] == -1) {
        os << "-" << kBasis[i];
      } else {
        os << c[i] << kBasis[i];
      }
      first = false;
    }
    return first ? "0" : os.str();
  }

  friend bool operator==(const Surd&, const Surd&) = default;
};

class Direction {
 public:
  Direction(const Surd& a, const Surd& b, const Surd& c, std::string label = {})
      : comps_{a, b, c}, label_(std::move(label)) {
    if (a.is_zero() && b.is_zero() && c.is_zero()) {
      throw UnsupportedDirection("direction must be non-zero");
    }
    if (label_.empty()) label_ = components_string();
  }

  static Direction axis(int i) {
    if (i < 0 || i > 2) throw UnsupportedDirection("axis index must be 0, 1 or 2");
    std::array<Surd, 3> s{};
    s[i] = Surd::integer(1);
    return Direction(s[0], s[1], s[2], "e" + std::to_string(i + 1));
  }

  static Direction integer(int a, int b, int c) {
    return Direction(Surd::integer(a), Surd::integer(b), Surd::integer(c));
  }

  /// The rationally independent direction (1, sqrt2, sqrt6).
  static Direction irrational() {
    return Direction(Surd::integer(1), Surd{{0, 1, 0, 0}}, Surd{{0, 0, 0, 1}}, "irrational");
  }

  /// Accepts "e1" | "e2" | "e3" | "irrational" | a comma separated triple of
  /// components, each an integer or an integer multiple of sqrt2, sqrt3, sqrt6, sqrt12
  /// (e.g. "1,1,0" or "1,sqrt2,sqrt6"). Anything else is rejected.
  static Direction parse(std::string_view text) {
    const std::string t = trim(text);
    if (t == "e1") return axis(0);
    if (t == "e2") return axis(1);
    if (t == "e3") return axis(2);
    if (t == "irrational") return irrational();
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : t) {
      if (ch == ',') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    parts.push_back(cur);
    if (parts.size() != 3) {
      throw UnsupportedDirection("direction '" + t + "' is not a supported exact direction");
    }
    return Direction(parse_component(parts[0]), parse_component(parts[1]),
                     parse_component(parts[2]));
  }

  const Surd& operator[](int i) const { return comps_[i]; }
  const std::string& label() const noexcept { return label_; }

  Vec3 numeric() const { return Vec3(comps_[0].value(), comps_[1].value(), comps_[2].value()); }

  /// Exact g(v, v) when it is an integer (always the case for e_i, integer vectors and
  /// (1, sqrt2, sqrt6)); otherwise the floating-point value.
  double norm_squared() const { return numeric().squaredNorm(); }

  /// Exact test k . v == 0.
  bool orthogonal_to(const Wavevector& k) const {
    for (int b = 0; b < 4; ++b) {
      std::int64_t s = 0;
      for (int i = 0; i < 3; ++i) s += static_cast<std::int64_t>(k[i]) * comps_[i].c[b];
      if (s != 0) return false;
    }
    return true;
  }

  bool is_integer() const {
    return comps_[0].is_integer() && comps_[1].is_integer() && comps_[2].is_integer();
  }

  std::string components_string() const {
    return comps_[0].to_string() + "," + comps_[1].to_string() + "," + comps_[2].to_string();
  }

  friend bool operator==(const Direction& a, const Direction& b) { return a.comps_ == b.comps_; }

 private:
  static std::string trim(std::string_view s) {
    std::string out;
    for (char ch : s) {
      if (!std::isspace(static_cast<unsigned char>(ch))) out.push_back(ch);
    }
    return out;
  }

  static Surd parse_component(const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty()) throw UnsupportedDirection("empty direction component");
    const auto pos = s.find("sqrt");
    std::string coeff = pos == std::string::npos ? s : s.substr(0, pos);
    if (!coeff.empty() && coeff.back() == '*') coeff.pop_back();
    std::int64_t a = 1;
    if (coeff == "-") {
      a = -1;
    } else if (coeff == "+" || (coeff.empty() && pos != std::string::npos)) {
      a = 1;
    } else {
      std::size_t used = 0;
      try {
        a = std::stoll(coeff, &used);
      } catch (const std::exception&) {
        throw UnsupportedDirection("direction component '" + s + "' is not exact");
      }
      if (used != coeff.size()) {
        throw UnsupportedDirection("direction component '" + s + "' is not exact");
      }
    }
    if (pos == std::string::npos) return Surd::integer(a);
    std::string radicand = s.substr(pos + 4);
    if (!radicand.empty() && radicand.front() == '(' && radicand.back() == ')') {
      radicand = radicand.substr(1, radicand.size() - 2);
    }
    if (radicand == "2") return Surd{{0, a, 0, 0}};
    if (radicand == "3") return Surd{{0, 0, a, 0}};
    if (radicand == "6") return Surd{{0, 0, 0, a}};
    if (radicand == "12") return Surd{{0, 0, 2 * a, 0}};
    if (radicand == "1") return Surd::integer(a);
    if (radicand == "4") return Surd::integer(2 * a);
    throw UnsupportedDirection("radicand '" + radicand + "' is outside Q(sqrt2, sqrt3)");
  }

  std::array<Surd, 3> comps_;
  std::string label_;
};

}  // namespace beltrami
