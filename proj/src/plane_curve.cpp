#include "unfold/plane_curve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "unfold/errors.hpp"

namespace unfold {

namespace {

// Natural cubic spline coefficients by the standard tridiagonal solve.
void build_spline(const std::vector<double>& t, const std::vector<double>& v,
                  std::vector<double>& a, std::vector<double>& b,
                  std::vector<double>& c, std::vector<double>& d) {
    const std::size_t n = t.size();
    a = v;
    b.assign(n, 0.0);
    c.assign(n, 0.0);
    d.assign(n, 0.0);
    if (n < 3) {
        if (n == 2) b[0] = (v[1] - v[0]) / (t[1] - t[0]);
        return;
    }
    std::vector<double> h(n - 1), alpha(n, 0.0), l(n), mu(n), z(n);
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = t[i + 1] - t[i];
    for (std::size_t i = 1; i + 1 < n; ++i)
        alpha[i] = 3.0 * ((v[i + 1] - v[i]) / h[i] - (v[i] - v[i - 1]) / h[i - 1]);
    l[0] = 1.0;
    mu[0] = z[0] = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        l[i] = 2.0 * (t[i + 1] - t[i - 1]) - h[i - 1] * mu[i - 1];
        mu[i] = h[i] / l[i];
        z[i] = (alpha[i] - h[i - 1] * z[i - 1]) / l[i];
    }
    l[n - 1] = 1.0;
    z[n - 1] = c[n - 1] = 0.0;
    for (std::size_t j = n - 1; j-- > 0;) {
        c[j] = z[j] - mu[j] * c[j + 1];
        b[j] = (v[j + 1] - v[j]) / h[j] - h[j] * (c[j + 1] + 2.0 * c[j]) / 3.0;
        d[j] = (c[j + 1] - c[j]) / (3.0 * h[j]);
    }
}

} // namespace

double PlaneCurve::Spline::eval(const std::vector<double>& t, double s, int deriv) const {
    auto it = std::upper_bound(t.begin(), t.end(), s);
    std::size_t i = (it == t.begin()) ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    if (i >= t.size() - 1) i = t.size() - 2;
    const double dt = s - t[i];
    switch (deriv) {
        case 0: return a[i] + dt * (b[i] + dt * (c[i] + dt * d[i]));
        case 1: return b[i] + dt * (2.0 * c[i] + dt * 3.0 * d[i]);
        default: return 2.0 * c[i] + 6.0 * d[i] * dt;
    }
}

PlaneCurve::PlaneCurve(std::vector<double> s, std::vector<double> x, std::vector<double> y)
    : s_(std::move(s)) {
    if (s_.size() < 2 || s_.size() != x.size() || s_.size() != y.size())
        throw ValidationError("PlaneCurve: need >= 2 consistent samples");
    for (std::size_t i = 0; i + 1 < s_.size(); ++i)
        if (!(s_[i + 1] > s_[i]))
            throw ValidationError("PlaneCurve: parametrization must be strictly monotone");
    build_spline(s_, x, sx_.a, sx_.b, sx_.c, sx_.d);
    build_spline(s_, y, sy_.a, sy_.b, sy_.c, sy_.d);
}

PlaneCurve PlaneCurve::from_function(const std::function<Vec2(double)>& f, double s_lo,
                                     double s_hi, std::size_t count) {
    if (count < 2) throw ValidationError("PlaneCurve: count must be >= 2");
    std::vector<double> s(count), x(count), y(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = s_lo + (s_hi - s_lo) * static_cast<double>(i) /
                                    static_cast<double>(count - 1);
        const Vec2 p = f(t);
        s[i] = t;
        x[i] = p.x;
        y[i] = p.y;
    }
    return PlaneCurve(std::move(s), std::move(x), std::move(y));
}

PlaneCurve PlaneCurve::graph(const std::function<double(double)>& g, double x_lo,
                             double x_hi, std::size_t count) {
    return from_function([&](double x) { return Vec2{x, g(x)}; }, x_lo, x_hi, count);
}

Vec2 PlaneCurve::eval(double s) const { return {sx_.eval(s_, s, 0), sy_.eval(s_, s, 0)}; }
Vec2 PlaneCurve::d1(double s) const { return {sx_.eval(s_, s, 1), sy_.eval(s_, s, 1)}; }
Vec2 PlaneCurve::d2(double s) const { return {sx_.eval(s_, s, 2), sy_.eval(s_, s, 2)}; }

double PlaneCurve::height_at_x(double x) const {
    // Curves used as graphs are parametrized by x; fall back to a search when not.
    const Vec2 at = eval(x);
    if (std::fabs(at.x - x) < 1e-9 * std::max(1.0, std::fabs(x))) return at.y;
    double lo = s_min(), hi = s_max();
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (lo + hi);
        if ((eval(m).x < x) == (eval(lo).x < x))
            lo = m;
        else
            hi = m;
    }
    return eval(0.5 * (lo + hi)).y;
}

void PlaneCurve::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw ValidationError("PlaneCurve: cannot open " + path);
    os << "s,x,y,dx,dy,curvature\n";
    os.precision(17);
    for (double s : s_) {
        const Vec2 p = eval(s), v = d1(s);
        os << s << "," << p.x << "," << p.y << "," << v.x << "," << v.y << ","
           << curvature_at(*this, s) << "\n";
    }
}

double curvature_at(const PlaneCurve& curve, double s) {
    const Vec2 v = curve.d1(s);
    const Vec2 w = curve.d2(s);
    const double speed = v.norm();
    if (speed < 1e-14) throw NumericError("curvature_at: degenerate tangent");
    return std::fabs(v.x * w.y - v.y * w.x) / (speed * speed * speed);
}

} // namespace unfold
