#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace singletsim {

// Plain 3-vector. Arithmetic only; no normalization promise.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }

    constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Measurement direction or shared random direction on the unit sphere.
// Construction normalizes the input; vectors shorter than kDegenerateNorm are
// rejected because their direction is meaningless.
class UnitVector3 {
public:
    static constexpr double kNormTolerance = 1e-9;
    static constexpr double kDegenerateNorm = 1e-12;

    UnitVector3(double x, double y, double z) : UnitVector3(Vec3{x, y, z}) {}

    explicit UnitVector3(const Vec3& v) {
        const double n = v.norm();
        if (!(n >= kDegenerateNorm)) {
            throw std::invalid_argument("UnitVector3: zero vector (norm " +
                                        std::to_string(n) + " below " +
                                        std::to_string(kDegenerateNorm) + ")");
        }
        v_ = {v.x / n, v.y / n, v.z / n};
    }

    double x() const { return v_.x; }
    double y() const { return v_.y; }
    double z() const { return v_.z; }
    const Vec3& vec() const { return v_; }

    UnitVector3 operator-() const {
        UnitVector3 r = *this;
        r.v_ = -r.v_;
        return r;
    }

    friend double dot(const UnitVector3& a, const UnitVector3& b) { return a.v_.dot(b.v_); }
    friend double dot(const UnitVector3& a, const Vec3& b) { return a.v_.dot(b); }
    friend double dot(const Vec3& a, const UnitVector3& b) { return a.dot(b.v_); }

    bool operator==(const UnitVector3& o) const = default;

private:
    Vec3 v_{0.0, 0.0, 1.0};
};

inline UnitVector3 x_axis() { return {1.0, 0.0, 0.0}; }
inline UnitVector3 y_axis() { return {0.0, 1.0, 0.0}; }
inline UnitVector3 z_axis() { return {0.0, 0.0, 1.0}; }

// A two-valued outcome. Only +1 and -1 are representable.
class Sign {
public:
    constexpr Sign() = default;  // +1

    static constexpr Sign plus() { return Sign(+1); }
    static constexpr Sign minus() { return Sign(-1); }

    static constexpr Sign from_int(int v) {
        if (v != 1 && v != -1) throw std::invalid_argument("Sign: value must be +1 or -1");
        return Sign(v);
    }

    constexpr int value() const { return v_; }

    constexpr Sign operator-() const { return Sign(-v_); }
    friend constexpr Sign operator*(Sign a, Sign b) { return Sign(a.v_ * b.v_); }

    friend constexpr bool operator==(Sign a, Sign b) = default;
    friend constexpr auto operator<=>(Sign a, Sign b) = default;

    // 0 for +1, 1 for -1; the canonical table index.
    constexpr std::size_t index() const { return v_ > 0 ? 0 : 1; }

private:
    constexpr explicit Sign(int v) : v_(static_cast<std::int8_t>(v)) {}
    std::int8_t v_ = 1;
};

using SignPair = std::pair<Sign, Sign>;

// sign(t) with the fixed tie-break sign(0) = +1, so every protocol stays a
// total function on the measure-zero tie set.
inline Sign sgn(double t) {
    if (!std::isfinite(t)) throw std::domain_error("sgn: non-finite input");
    return t >= 0.0 ? Sign::plus() : Sign::minus();
}

// Heaviside step with the same tie-break as sgn.
inline double theta(double t) { return t >= 0.0 ? 1.0 : 0.0; }

}  // namespace singletsim
