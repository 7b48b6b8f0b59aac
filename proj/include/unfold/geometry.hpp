#pragma once

#include <cmath>
#include <ostream>

namespace unfold {

struct Vec2 {
    double x{0.0};
    double y{0.0};

    Vec2() = default;
    Vec2(double xx, double yy) : x(xx), y(yy) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }

    double norm() const { return std::hypot(x, y); }
    double norm_inf() const { return std::max(std::fabs(x), std::fabs(y)); }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline std::ostream& operator<<(std::ostream& os, const Vec2& v) {
    return os << "(" << v.x << ", " << v.y << ")";
}

// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
    double a{0.0}, b{0.0}, c{0.0}, d{0.0};

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 diag(double l1, double l2) { return {l1, 0.0, 0.0, l2}; }

    Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    Mat2 operator*(const Mat2& m) const {
        return {a * m.a + b * m.c, a * m.b + b * m.d, c * m.a + d * m.c, c * m.b + d * m.d};
    }
    Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
    Mat2 operator+(const Mat2& m) const { return {a + m.a, b + m.b, c + m.c, d + m.d}; }

    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }
    Mat2 inverse() const {
        const double dt = det();
        return {d / dt, -b / dt, -c / dt, a / dt};
    }
    // Spectral radius of a real 2x2 matrix.
    double spectral_radius() const {
        const double tr = trace();
        const double disc = tr * tr - 4.0 * det();
        if (disc >= 0.0) {
            const double r = std::sqrt(disc);
            return std::max(std::fabs((tr + r) / 2.0), std::fabs((tr - r) / 2.0));
        }
        return std::sqrt(std::fabs(det()));
    }
};

// Second derivative tensor of a plane map: h[k][i][j] = d^2 f_k / (dx_i dx_j).
struct Hess2 {
    double h[2][2][2]{};
};

struct Box {
    Vec2 lo;
    Vec2 hi;

    bool contains(const Vec2& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    }
    bool contains(const Box& inner) const {
        return contains(inner.lo) && contains(inner.hi);
    }
    // Axis-aligned boxes are disjoint iff separated along some axis.
    bool disjoint(const Box& o) const {
        return hi.x < o.lo.x || o.hi.x < lo.x || hi.y < o.lo.y || o.hi.y < lo.y;
    }
    Vec2 center() const { return {(lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0}; }
    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    double diameter() const { return std::hypot(width(), height()); }

    static Box around(const Vec2& c, double rx, double ry) {
        return {{c.x - rx, c.y - ry}, {c.x + rx, c.y + ry}};
    }
};

// One-dimensional position + first and second derivative with respect to a
// curve parameter u. Used to push local curves through compositions exactly.
struct Jet {
    double v{0.0};
    double d1{0.0};
    double d2{0.0};
};

struct Jet2 {
    Jet x;
    Jet y;

    Vec2 point() const { return {x.v, y.v}; }
    Vec2 tangent() const { return {x.d1, y.d1}; }
    // Plane curvature |x'y'' - y'x''| / (x'^2 + y'^2)^(3/2) of the traced curve.
    double curvature() const {
        const double num = std::fabs(x.d1 * y.d2 - y.d1 * x.d2);
        const double sp = x.d1 * x.d1 + y.d1 * y.d1;
        return num / std::pow(sp, 1.5);
    }
    // Slope dy/dx along the traced curve.
    double slope() const { return y.d1 / x.d1; }
};

// Push a jet through a fixed map given value, Jacobian and Hessian at the point.
inline Jet2 push_jet(const Jet2& in, const Vec2& f, const Mat2& J, const Hess2& H) {
    Jet2 out;
    const double ux = in.x.d1, uy = in.y.d1;
    const double vx = in.x.d2, vy = in.y.d2;
    out.x.v = f.x;
    out.y.v = f.y;
    out.x.d1 = J.a * ux + J.b * uy;
    out.y.d1 = J.c * ux + J.d * uy;
    const double qx = H.h[0][0][0] * ux * ux + 2.0 * H.h[0][0][1] * ux * uy + H.h[0][1][1] * uy * uy;
    const double qy = H.h[1][0][0] * ux * ux + 2.0 * H.h[1][0][1] * ux * uy + H.h[1][1][1] * uy * uy;
    out.x.d2 = J.a * vx + J.b * vy + qx;
    out.y.d2 = J.c * vx + J.d * vy + qy;
    return out;
}

} // namespace unfold
