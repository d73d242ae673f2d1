#pragma once

#include <cmath>
#include <cstddef>

namespace pscat {

// Transverse vector. The library works in at most two transverse dimensions;
// 1-d quantities live in the x slot with y pinned to zero.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    double& operator[](std::size_t i) { return i == 0 ? x : y; }
    double operator[](std::size_t i) const { return i == 0 ? x : y; }

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double c) const { return {x * c, y * c}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }

    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec2 operator*(double c, const Vec2& v) { return v * c; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

inline Vec2 rotate(const Vec2& v, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

} // namespace pscat
