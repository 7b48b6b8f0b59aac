#include "unfold/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace unfold {

double golden_min(const std::function<double(double)>& f, double a, double b,
                  double tol_rel, int max_iter) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    const double scale = std::max({std::fabs(a), std::fabs(b), 1e-30});
    for (int i = 0; i < max_iter && (b - a) > tol_rel * scale; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    // Parabolic refinement through (a, c-or-d, b).
    const double m = (fc < fd) ? c : d;
    const double fm = std::min(fc, fd);
    const double h = (b - a) / 4.0;
    if (h > 0.0) {
        const double fl = f(m - h), fr = f(m + h);
        const double denom = fl - 2.0 * fm + fr;
        if (denom > 0.0) {
            double shift = 0.5 * h * (fl - fr) / denom;
            shift = std::clamp(shift, -h, h);
            return m + shift;
        }
    }
    return m;
}

double bisect(const std::function<double(double)>& f, double a, double b,
              double ftol, int max_iter) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw NumericError("bisect: endpoints do not bracket a sign change");
    double m = a, fm = fa;
    for (int i = 0; i < max_iter; ++i) {
        m = 0.5 * (a + b);
        fm = f(m);
        if (std::fabs(fm) <= ftol) return m;
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    return m;
}

double newton1d(const std::function<double(double)>& f,
                const std::function<double(double)>& df, double x0, double ftol,
                int max_iter) {
    double x = x0;
    for (int i = 0; i < max_iter; ++i) {
        const double fx = f(x);
        if (std::fabs(fx) <= ftol) return x;
        const double d = df(x);
        if (d == 0.0 || !std::isfinite(d))
            throw NumericError("newton1d: vanishing derivative");
        x -= fx / d;
        if (!std::isfinite(x)) throw NumericError("newton1d: diverged");
    }
    if (std::fabs(f(x)) <= ftol) return x;
    throw NumericError("newton1d: no convergence");
}

double central_diff(const std::function<double(double)>& f, double x, double h) {
    const double d1 = (f(x + h) - f(x - h)) / (2.0 * h);
    const double d2 = (f(x + h / 2.0) - f(x - h / 2.0)) / h;
    return (4.0 * d2 - d1) / 3.0;
}

LinearFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    LinearFit out;
    const std::size_t n = std::min(xs.size(), ys.size());
    out.count = n;
    if (n < 2) throw ValidationError("fit_line: need at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    const double dn = static_cast<double>(n);
    const double vx = sxx - sx * sx / dn;
    const double cxy = sxy - sx * sy / dn;
    const double vy = syy - sy * sy / dn;
    if (vx <= 0.0) throw ValidationError("fit_line: degenerate abscissae");
    out.slope = cxy / vx;
    out.intercept = (sy - out.slope * sx) / dn;
    out.r2 = (vy > 0.0) ? (cxy * cxy) / (vx * vy) : 1.0;
    return out;
}

} // namespace unfold
