#include "unfold/critical_orbit.hpp"

#include <cmath>
#include <sstream>

#include "unfold/errors.hpp"

namespace unfold {

GluingCoefficients measure_gluing(const UnfoldingModel& model, const Params& p) {
    const Vec2 c = model.critical_point(p);
    GluingCoefficients out;
    const Mat2 J = model.gluing_jacobian(p, c);
    const Hess2 H = model.gluing_hessian(p, c);
    out.B = J.b;
    out.C = J.c;
    out.D = H.h[1][1][1];
    out.Q = out.D / 2.0;
    return out;
}

LoopStages::LoopStages(const UnfoldingModel& model, const ThetaSelection& theta, Params p,
                       int n, bool integer_theta)
    : model_(model), p_(p), n_(n), theta_n_(theta.theta_steps(n)) {
    if (n < 2) throw ValidationError("loop: n must be >= 2");
    if (theta_n_ < 1)
        throw ValidationError("loop: theta * n must reach one linear step; increase n");
    theta_exp_ = integer_theta ? static_cast<double>(theta_n_) : theta.theta_exponent(n);
    c_height_ = model.critical_height(p, 0.0);
}

Jet2 LoopStages::seed(double u) const {
    Jet2 j;
    j.x = {0.0, 0.0, 0.0};
    j.y = {c_height_ + u, 1.0, 0.0};
    return j;
}

// All return stages are evaluated in offset form around the pinned critical
// value: G(c + d) = z + G_diff(c, d). Adding the tiny offsets to the tiny
// anchor height afterwards loses nothing, while the absolute evaluation of
// the return would drown the structure in the ulp of the O(1) coordinates.
namespace {

Jet2 push_gluing_offset(const UnfoldingModel& m, const Params& p, const Vec2& z,
                        const Jet2& d) {
    const Vec2 c = m.critical_point(p);
    const Vec2 at = c + d.point();
    const Vec2 diff = m.gluing_difference(p, c, d.point());
    Jet2 out = push_jet(d, diff, m.gluing_jacobian(p, at), m.gluing_hessian(p, at));
    out.x.v += z.x;
    out.y.v += z.y;
    return out;
}

Jet2 push_linear_jet(const UnfoldingModel& m, const Params& p, const Jet2& in, double k) {
    const double lk = std::pow(m.lambda(p), k), mk = std::pow(m.mu(p), k);
    Jet2 out = in;
    out.x.v *= lk;
    out.x.d1 *= lk;
    out.x.d2 *= lk;
    out.y.v *= mk;
    out.y.d1 *= mk;
    out.y.d2 *= mk;
    return out;
}

// Offset of a stage point from the critical point, as a jet.
Jet2 offset_from_critical(const UnfoldingModel& m, const Params& p, const Jet2& abs) {
    const Vec2 c = m.critical_point(p);
    Jet2 d = abs;
    d.x.v -= c.x;
    d.y.v -= c.y;
    return d;
}

} // namespace

Jet2 LoopStages::at_z_curve(double u) const {
    Jet2 seed;
    seed.x = {0.0, 0.0, 0.0};
    seed.y = {u, 1.0, 0.0};  // offset from the critical point
    return push_gluing_offset(model_, p_, model_.critical_value(p_), seed);
}
Jet2 LoopStages::at_cprime(double u) const {
    return push_linear_jet(model_, p_, at_z_curve(u), theta_exp_);
}
Jet2 LoopStages::at_z1_curve(double u) const {
    const Jet2 d = offset_from_critical(model_, p_, at_cprime(u));
    return push_gluing_offset(model_, p_, model_.critical_value(p_), d);
}
Jet2 LoopStages::at_z2_curve(double u) const {
    return push_linear_jet(model_, p_, at_z1_curve(u), n_);
}
Jet2 LoopStages::at_z3_curve(double u) const {
    const Jet2 d = offset_from_critical(model_, p_, at_z2_curve(u));
    return push_gluing_offset(model_, p_, model_.critical_value(p_), d);
}

namespace {

// Newton polish of a stationary point of u -> jet.y, then boundary check.
double polish_min(const std::function<Jet2(double)>& f, double u, double lo, double hi) {
    for (int i = 0; i < 8; ++i) {
        const Jet2 j = f(u);
        if (j.y.d2 == 0.0) break;
        const double step = j.y.d1 / j.y.d2;
        double next = u - step;
        if (next < lo) next = 0.5 * (u + lo);
        if (next > hi) next = 0.5 * (u + hi);
        if (next == u) break;
        u = next;
    }
    return u;
}

struct MinResult {
    double u;
    bool interior;
};

MinResult minimize_stage(const std::function<Jet2(double)>& f, double lo, double hi) {
    const double u0 = golden_min([&](double u) { return f(u).y.v; }, lo, hi);
    const double u = polish_min(f, u0, lo, hi);
    const double margin = 1e-3 * (hi - lo);
    return {u, u > lo + margin && u < hi - margin};
}

// Geometry of a fold tip: the last stage is a return whose image has a
// horizontal tangency at the minimum. The raw jet there is a cancelling 0/0,
// so the tangent and curvature are evaluated through the Jacobian identity
// J.c x' + J.d y' = 0 at the critical parameter.
struct TipGeometry {
    double x_tangent{0.0};
    double y_second{0.0};
    double curvature{0.0};
    double slope{0.0};
    bool bracketed{false};
};

TipGeometry tip_geometry(const UnfoldingModel& model, const Params& p, const Jet2& pre,
                         const std::function<Jet2(double)>& stage, double u, double du) {
    TipGeometry tip;
    const Vec2 q = pre.point();
    const Mat2 J = model.gluing_jacobian(p, q);
    const Hess2 H = model.gluing_hessian(p, q);
    const double px1 = pre.x.d1, px2 = pre.x.d2, py2 = pre.y.d2;
    if (J.d == 0.0 || px1 == 0.0) {
        tip.slope = std::fabs(stage(u).slope());
        tip.curvature = stage(u).curvature();
        return tip;
    }
    const double py1 = -J.c * px1 / J.d;  // exact null direction of dY/du
    tip.x_tangent = J.a * px1 + J.b * py1;
    const double quad = H.h[1][0][0] * px1 * px1 + 2.0 * H.h[1][0][1] * px1 * py1 +
                        H.h[1][1][1] * py1 * py1;
    tip.y_second = J.c * px2 + J.d * py2 + quad;
    tip.curvature = std::fabs(tip.y_second) / (tip.x_tangent * tip.x_tangent);
    // Certify the critical point by a sign change of dY/du across u.
    const double gl = stage(u - du).y.d1, gr = stage(u + du).y.d1;
    tip.bracketed = (gl < 0.0 && gr > 0.0) || (gl > 0.0 && gr < 0.0);
    tip.slope = tip.bracketed ? 0.0 : std::fabs(stage(u).slope());
    return tip;
}

} // namespace

LoopTrace trace_loop(const UnfoldingModel& model, const ThetaSelection& theta,
                     const Params& p, int n, double L, bool branch_high,
                     bool integer_theta) {
    const LoopStages st(model, theta, p, n, integer_theta);
    const double lam = model.lambda(p), mu = model.mu(p);
    const double seed_cap = model.max_seed_offset();

    // Gamma crossings of the theta*n image of W^u_loc(z), one on each branch.
    auto gap = [&](double u) {
        const Jet2 j = st.at_cprime(u);
        return j.y.v - model.critical_height(p, j.x.v);
    };
    auto find_crossing = [&](double sign) {
        double hi = 1e-6;
        if (gap(sign * hi) < 0.0) {
            while (hi < seed_cap && gap(sign * hi) < 0.0) hi *= 1.6;
            if (hi >= seed_cap)
                throw NumericError("trace_loop: theta*n image misses the critical curve");
        } else {
            // The crossing sits below the starting offset (steep quadratics).
            while (hi > 1e-280 && gap(sign * hi / 1.6) >= 0.0) hi /= 1.6;
            if (hi <= 1e-280)
                throw NumericError("trace_loop: critical-curve crossing collapsed");
        }
        const double lo = hi / 1.6;
        return bisect([&](double u) { return gap(sign * u); }, lo, hi, 0.0, 200) * sign;
    };
    const double up = find_crossing(+1.0), un = find_crossing(-1.0);
    const double yp = st.at_cprime(up).y.v, yn = st.at_cprime(un).y.v;
    double u_star;
    if (std::fabs(yp - yn) > 1e-12 * std::max(std::fabs(yp), 1.0))
        u_star = (yp > yn) == branch_high ? up : un;
    else
        u_star = branch_high ? std::max(up, un) : std::min(up, un);

    // Largest half-window around the crossing staying on its branch.
    const double branch_cap =
        std::min(0.9 * std::fabs(u_star), seed_cap - std::fabs(u_star));
    auto window_for_extent = [&](const std::function<Jet2(double)>& f, double target) {
        double h = 1e-14 * std::max(std::fabs(u_star), 1e-6);
        for (int i = 0; i < 200; ++i) {
            if (h >= branch_cap) return branch_cap;
            const double extent =
                std::max(std::fabs(f(u_star + h).y.v - f(u_star).y.v),
                         std::fabs(f(u_star - h).y.v - f(u_star).y.v));
            if (extent >= target) return h;
            h *= 2.0;
        }
        return std::min(branch_cap, h);
    };

    LoopTrace out;
    // Window targets scale with the measured gluing coefficients so that the
    // quadratic and linear displacement terms stay balanced on every backend.
    const GluingCoefficients gc = measure_gluing(model, p);
    const double c_scale = std::max(std::fabs(gc.C), 1e-12);
    const double q_scale = std::max(std::fabs(gc.Q), 1e-12);
    for (int attempt = 0; attempt < 2; ++attempt) {
        const double Leff = L * (attempt + 1 == 1 ? 1.0 : 2.0);
        // c' segment diameter ~ sqrt(L C / Q) lambda^{theta n / 2}.
        const double diam_target = std::sqrt(Leff * c_scale / q_scale) *
                                   std::pow(lam, 0.5 * st.theta_exponent());
        const double h1 =
            window_for_extent([&](double u) { return st.at_cprime(u); }, diam_target);
        auto z1f = [&](double u) { return st.at_z1_curve(u); };
        MinResult m1 = minimize_stage(z1f, u_star - h1, u_star + h1);
        // When the first-return structure sits below double resolution around
        // the much larger base height, accept the crossing point itself.
        const double z1_extent =
            std::fabs(z1f(u_star + h1).y.v - z1f(u_star).y.v);
        const bool z1_resolvable =
            z1_extent > 1e3 * 2.2e-16 * std::fabs(z1f(u_star).y.v);
        if (!z1_resolvable) m1 = {u_star, true};

        // z2 segment vertical size ~ L C (lambda^theta mu)^n.
        const double vert_target =
            Leff * c_scale * std::pow(std::pow(lam, theta.theta) * mu, n);
        const double h2 =
            window_for_extent([&](double u) { return st.at_z2_curve(u); }, vert_target);
        auto z3f = [&](double u) { return st.at_z3_curve(u); };
        const MinResult m3 = minimize_stage(z3f, u_star - h2, u_star + h2);

        if ((!m1.interior || !m3.interior) && attempt == 0) continue;
        if (!m1.interior || !m3.interior)
            throw NumericError("trace_loop: minimum not interior even after enlarging L");

        out.n = n;
        out.theta_n = st.theta_n();
        out.params = p;
        out.z = model.critical_value(p);
        out.u_cprime = u_star;
        out.u_z1 = m1.u;
        out.u_z3 = m3.u;
        out.seed_halfwidth = h2;
        out.L_used = Leff;

        const Jet2 jz1 = st.at_z1_curve(m1.u);
        out.z1 = jz1.point();
        const TipGeometry tip1 =
            tip_geometry(model, p, st.at_cprime(m1.u), z1f, m1.u, 1e-3 * h1);
        out.slope_z1 = tip1.slope;
        out.z2 = model.apply_linear(p, out.z1, n);
        const Jet2 jz3 = st.at_z3_curve(m3.u);
        out.z3 = jz3.point();
        const TipGeometry tip3 =
            tip_geometry(model, p, st.at_z2_curve(m3.u), z3f, m3.u, 1e-3 * h2);
        out.slope_z3 = tip3.slope;
        out.curvature_z3 = tip3.curvature;

        out.waypoints = {st.seed(m3.u).point(),        st.at_z_curve(m3.u).point(),
                         st.at_cprime(m3.u).point(),   st.at_z1_curve(m3.u).point(),
                         st.at_z2_curve(m3.u).point(), out.z3};
        // The second return must land inside the gluing window, otherwise the
        // loop is outside its asymptotic regime at this depth.
        if (!model.in_gluing_window(out.waypoints[4]))
            throw NumericError("trace_loop: second return misses the gluing window");

        if (!(out.z3.y > 0.0))
            throw NumericError("trace_loop: z3 fell below the stable manifold");
        if (!(out.z3.y < model.seed_height(p)))
            throw NumericError("trace_loop: z3 sits above the seed wedge");
        out.n0 = static_cast<int>(
            std::floor(n + std::log(out.z3.y / model.seed_height(p)) / std::log(mu)));

        // Linear steps lifting z3 to the seed height; at a tangency parameter
        // this is exactly the climb into the transversal window.
        out.climb = std::max(
            1, static_cast<int>(std::lround(std::log(model.seed_height(p) / out.z3.y) /
                                            std::log(mu))));
        return out;
    }
    throw NumericError("trace_loop: unreachable");
}

double solve_return_a(const UnfoldingModel& model, int n, double t, double ftol) {
    auto residual = [&](double a) {
        const Params p{t, a};
        const Vec2 z = model.critical_value(p);
        const double mun = std::pow(model.mu(p), n);
        const double ln = std::pow(model.lambda(p), n);
        return mun * z.y - model.critical_height(p, ln * z.x);
    };
    const double a0 = std::pow(model.mu(Params{t, 0.0}), -n);
    const double h = std::max(a0 * 1e-6, 1e-300);
    return newton1d(residual,
                    [&](double a) { return (residual(a + h) - residual(a - h)) / (2.0 * h); },
                    a0, ftol);
}

double z3_speed(const UnfoldingModel& model, const ThetaSelection& theta, const Params& p,
                int n, ParamDirection dir, double L) {
    auto z3y = [&](double t, double a) {
        return trace_loop(model, theta, Params{t, a}, n, L).z3.y;
    };
    if (dir == ParamDirection::T) {
        const double h = 1e-6 * std::max(std::fabs(p.t), 1e-2);
        return central_diff([&](double t) { return z3y(t, p.a); }, p.t, h);
    }
    const double h = 1e-6 * std::max(std::fabs(p.a), 1e-12);
    return central_diff([&](double a) { return z3y(p.t, a); }, p.a, h);
}

RegressionReport z3_curvature_growth(const UnfoldingModel& model,
                                     const ThetaSelection& theta, double t, int n_lo,
                                     int n_hi, double L) {
    RegressionReport rep;
    for (int n = n_lo; n <= n_hi; ++n) {
        try {
            const double a = solve_return_a(model, n, t);
            const LoopTrace tr = trace_loop(model, theta, Params{t, a}, n, L);
            if (!(tr.curvature_z3 > 0.0)) continue;
            rep.xs.push_back(static_cast<double>(n));
            rep.ys.push_back(std::log(tr.curvature_z3));
        } catch (const NumericError&) {
            continue;
        }
    }
    if (rep.xs.size() < 4)
        throw NumericError("z3_curvature_growth: fewer than 4 successful depths");
    rep.fit = fit_line(rep.xs, rep.ys);
    const double lam = model.lambda(Params{t, 0.0}), mu = model.mu(Params{t, 0.0});
    rep.theoretical_slope =
        std::log(std::pow(mu, 4.0) / std::pow(lam, 2.0 - 3.0 * theta.theta));
    return rep;
}

std::string LoopTrace::to_json() const {
    std::ostringstream os;
    os.precision(17);
    auto pt = [&](const Vec2& v) {
        std::ostringstream s;
        s.precision(17);
        s << "[" << v.x << "," << v.y << "]";
        return s.str();
    };
    os << "{\"n\":" << n << ",\"theta_n\":" << theta_n << ",\"t\":" << params.t
       << ",\"a\":" << params.a << ",\"z\":" << pt(z) << ",\"z1\":" << pt(z1)
       << ",\"z2\":" << pt(z2) << ",\"z3\":" << pt(z3) << ",\"n0\":" << n0
       << ",\"climb\":" << climb << ",\"curvature_z3\":" << curvature_z3
       << ",\"slope_z1\":" << slope_z1 << ",\"slope_z3\":" << slope_z3
       << ",\"waypoints\":[";
    for (std::size_t i = 0; i < waypoints.size(); ++i)
        os << (i ? "," : "") << pt(waypoints[i]);
    os << "]}";
    return os.str();
}

} // namespace unfold
