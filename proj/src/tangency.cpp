#include "unfold/tangency.hpp"

#include <algorithm>
#include <cmath>

#include "unfold/errors.hpp"

namespace unfold {

namespace {

Jet2 push_gluing(const UnfoldingModel& m, const Params& p, const Jet2& in) {
    const Vec2 q = in.point();
    return push_jet(in, m.apply_gluing(p, q), m.gluing_jacobian(p, q),
                    m.gluing_hessian(p, q));
}

Jet2 push_transversal(const UnfoldingModel& m, const Params& p, const Jet2& in) {
    const Vec2 q = in.point();
    return push_jet(in, m.apply_transversal(p, q), m.transversal_jacobian(p, q),
                    m.transversal_hessian(p, q));
}

Jet2 push_linear(const UnfoldingModel& m, const Params& p, const Jet2& in, int k) {
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

} // namespace

double ReturnCurve::deriv(double t) const {
    const double h = 3e-4;
    return central_diff([&](double tt) { return eval(tt); }, t, h);
}

double ReturnCurve::residual(double t) const {
    const double a = eval(t);
    const Params p{t, a};
    const Vec2 z = model_->critical_value(p);
    const double mun = std::pow(model_->mu(p), n_);
    const double ln = std::pow(model_->lambda(p), n_);
    return std::fabs(mun * z.y - model_->critical_height(p, ln * z.x));
}

double TangencyStrip::lower(double t) const {
    const Params p{t, a_center(t)};
    const double lam = model->lambda(p), mu = model->mu(p);
    return p.a + (eps / std::pow(mu, n0_ref / 2.0) - C_const) * std::pow(lam, theta * n);
}

double TangencyStrip::upper(double t) const {
    const Params p{t, a_center(t)};
    const double mu = model->mu(p);
    return p.a + T_const / std::pow(mu, n + n0_ref / 2.0);
}

bool TangencyStrip::contains(double t, double a) const {
    return a >= lower(t) && a <= upper(t);
}

double TangencyStrip::width_constant(double rho, double alpha) const {
    const double width = upper(0.0) - lower(0.0);
    return width / std::pow(rho, n * (1.0 + alpha) - 1.0);
}

TangencyStrip make_strip(ModelPtr model, const ThetaSelection& theta, int n, int n0_ref,
                         double eps, double T) {
    TangencyStrip s;
    s.n = n;
    s.n0_ref = n0_ref;
    s.eps = eps;
    s.T_const = T;
    s.theta = theta.theta;
    s.model = model;
    const Params base{0.0, solve_return_a(*model, n, 0.0)};
    s.C_const = std::fabs(measure_gluing(*model, base).C);
    s.E_const = s.C_const - eps / std::pow(model->mu(base), n0_ref / 2.0);
    return s;
}

namespace {

struct GapEval {
    double g;
    LoopTrace trace;
};

// Vertical gap between z3 and the wedge W_level along the return curve a_n.
GapEval tangency_gap(const UnfoldingModel& model, const ThetaSelection& theta, int n,
                     int level, double t, double L, bool integer_theta) {
    const double a = solve_return_a(model, n, t);
    const Params p{t, a};
    LoopTrace tr = trace_loop(model, theta, p, n, L, true, integer_theta);
    const double lam = model.lambda(p), mu = model.mu(p);
    const double wx = std::pow(lam, level) * tr.z3.x;
    const double wlevel = std::pow(mu, -level) * model.seed_height(p); // constant seed
    (void)wx;
    return {tr.z3.y - wlevel, tr};
}

} // namespace

TangencyCertificate find_secondary_tangency(const ModelPtr& model,
                                            const ThetaSelection& theta,
                                            const TangencyStrip& strip, double t_start,
                                            int kappa, bool integer_theta) {
    const int n = strip.n;
    const double t0 = model->window().t0;
    const double L = 10.0;
    GapEval start =
        tangency_gap(*model, theta, n, /*level placeholder*/ 0, t_start, L, integer_theta);
    const int n0_star = start.trace.n0;
    const int n0_target = n0_star + kappa;
    const int level = n - n0_target;
    if (level <= 0)
        throw ValidationError("find_secondary_tangency: target wedge index must be positive");

    auto gap = [&](double t) {
        return tangency_gap(*model, theta, n, level, t, L, integer_theta);
    };
    GapEval cur = gap(t_start);
    const double dir = cur.g < 0.0 ? 1.0 : -1.0;

    double t_prev = t_start, g_prev = cur.g;
    double t = t_start;
    bool bracketed = false;
    double t_lo = 0.0, t_hi = 0.0;
    for (int it = 0; it < 200 && !bracketed; ++it) {
        const double h = std::max(1e-6, 1e-3 * std::fabs(t) + 1e-6);
        const double gp = (gap(t + h).g - gap(t - h).g) / (2.0 * h);
        double step = std::fabs(gp) > 0.0 ? 0.9 * std::fabs(cur.g / gp) : 1e-3;
        step = std::clamp(step, 1e-6, 0.02);
        t_prev = t;
        g_prev = cur.g;
        t += dir * step;
        if (std::fabs(t) > t0)
            throw NumericError("find_secondary_tangency: no sign change inside the "
                               "parameter window; scanned up to t = " + std::to_string(t));
        cur = gap(t);
        if ((cur.g > 0.0) != (g_prev > 0.0)) {
            bracketed = true;
            t_lo = std::min(t_prev, t);
            t_hi = std::max(t_prev, t);
        }
    }
    if (!bracketed)
        throw NumericError("find_secondary_tangency: gap never changed sign");

    const double t_star =
        bisect([&](double tt) { return gap(tt).g; }, t_lo, t_hi, 1e-11, 300);
    GapEval fin = gap(t_star);

    TangencyCertificate cert;
    cert.t_star = t_star;
    cert.a_star = solve_return_a(*model, n, t_star);
    cert.n0 = n0_target;
    cert.level = level;
    cert.residual = std::fabs(fin.g);
    const double h = 1e-5;
    cert.dg_dt = (gap(t_star + h).g - gap(t_star - h).g) / (2.0 * h);
    cert.curvature = fin.trace.curvature_z3;
    cert.distance = std::fabs(t_star - t_start);
    return cert;
}

TangencyCertificate find_nearest_tangency(const ModelPtr& model,
                                          const ThetaSelection& theta,
                                          const TangencyStrip& strip, double t_start,
                                          bool integer_theta) {
    std::optional<TangencyCertificate> best;
    for (int kappa : {1, 0}) {
        try {
            TangencyCertificate c = find_secondary_tangency(model, theta, strip, t_start,
                                                            kappa, integer_theta);
            if (!best || c.distance < best->distance) best = c;
        } catch (const NumericError&) {
        }
    }
    if (!best)
        throw NumericError("find_nearest_tangency: no tangency reachable inside the window");
    return *best;
}

double TangencyCurveB::eval(double t) const {
    if (ts.empty()) throw ValidationError("TangencyCurveB: empty curve");
    auto it = std::lower_bound(ts.begin(), ts.end(), t);
    if (it == ts.begin()) return as.front();
    if (it == ts.end()) return as.back();
    const std::size_t i = static_cast<std::size_t>(it - ts.begin());
    const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
    return as[i - 1] + w * (as[i] - as[i - 1]);
}

double TangencyCurveB::slope(double t) const {
    const std::size_t i = nearest_index(t);
    const std::size_t j = (i + 1 < ts.size()) ? i + 1 : i - 1;
    return (as[j] - as[i]) / (ts[j] - ts[i]);
}

std::size_t TangencyCurveB::nearest_index(double t) const {
    std::size_t best = 0;
    double bd = std::fabs(ts[0] - t);
    for (std::size_t i = 1; i < ts.size(); ++i) {
        const double d = std::fabs(ts[i] - t);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

namespace {

struct TangencySolver {
    const UnfoldingModel& model;
    const ThetaSelection& theta;
    int n;
    int level;
    double L;
    bool integer_theta{false};

    struct Residual {
        double r1;        // vertical coincidence with the wedge
        double r2;        // derivative of the height along the curve
        double r2_norm;   // criticality residual, dimensionless
        Jet2 jet;
    };

    Residual residual(double t, double a, double u) const {
        const Params p{t, a};
        const LoopStages st(model, theta, p, n, integer_theta);
        const Jet2 j = st.at_z3_curve(u);
        const double mu = model.mu(p);
        const double wlevel = std::pow(mu, -level) * model.seed_height(p);
        Residual r;
        r.jet = j;
        r.r1 = j.y.v - wlevel;  // the wedge is horizontal for constant seeds
        r.r2 = j.y.d1;
        const double scale = std::fabs(j.y.d2) * std::max(std::fabs(u), 1e-6) + 1e-300;
        r.r2_norm = std::fabs(r.r2) / scale;
        return r;
    }

    // 2-D Newton in (u, a) at fixed t on (height gap, height criticality).
    bool solve(double t, double& u, double& a, double tol1, double tol2) const {
        for (int it = 0; it < 50; ++it) {
            const Residual r = residual(t, a, u);
            if (std::fabs(r.r1) <= tol1 && r.r2_norm <= tol2) return true;
            const double dr1_du = r.jet.y.d1;
            const double dr2_du = r.jet.y.d2;
            const double ha = std::max(1e-7 * std::fabs(a), 1e-18);
            const Residual rp = residual(t, a + ha, u);
            const Residual rm = residual(t, a - ha, u);
            const double dr1_da = (rp.r1 - rm.r1) / (2.0 * ha);
            const double dr2_da = (rp.r2 - rm.r2) / (2.0 * ha);
            const double det = dr1_du * dr2_da - dr1_da * dr2_du;
            if (det == 0.0 || !std::isfinite(det)) return false;
            const double du = (r.r1 * dr2_da - r.r2 * dr1_da) / det;
            const double da = (r.r2 * dr1_du - r.r1 * dr2_du) / det;
            u -= du;
            a -= da;
            if (!std::isfinite(u) || !std::isfinite(a)) return false;
        }
        const Residual r = residual(t, a, u);
        return std::fabs(r.r1) <= tol1 && r.r2_norm <= tol2;
    }
};

} // namespace

TangencyCurveB continue_tangency_curve(const ModelPtr& model, const ThetaSelection& theta,
                                       const TangencyCertificate& seed,
                                       const TangencyStrip& strip, double L,
                                       bool integer_theta) {
    const int n = strip.n;
    TangencySolver solver{*model, theta, n, seed.level, L, integer_theta};
    TangencyCurveB curve;
    curve.n = n;
    curve.n0 = seed.n0;
    curve.integer_theta = integer_theta;
    curve.complete = true;

    // Solve tolerances tied to the geometric scale of the tangency.
    const LoopTrace tr0 = trace_loop(*model, theta, Params{seed.t_star, seed.a_star}, n, L,
                                     true, integer_theta);
    const double scale1 = std::max(std::fabs(tr0.z3.y), 1e-280);
    const double tol1 = std::min(1e-10, 1e-4 * scale1);
    const double tol2 = 1e-10;

    const double t0 = model->window().t0;
    const double dt0 = std::min(1e-3, 2.0 * t0 / 64.0);

    struct Sample {
        double t, a, u, r1, r2;
    };
    std::vector<Sample> samples;

    auto push_sample = [&](double t, double a, double u) {
        const auto r = solver.residual(t, a, u);
        if (!strip.contains(t, a))
            throw PropertyError("continue_tangency_curve: curve left its strip");
        samples.push_back({t, a, u, r.r1, r.r2_norm});
    };

    double u0 = tr0.u_z3;
    double a0 = seed.a_star;
    if (!solver.solve(seed.t_star, u0, a0, tol1, tol2))
        throw NumericError("continue_tangency_curve: seed correction failed");
    push_sample(seed.t_star, a0, u0);

    for (const double dir : {+1.0, -1.0}) {
        double t = seed.t_star, a = a0, u = u0;
        double slope_est = 0.0;
        bool have_slope = false;
        double dt = dt0;
        int halvings = 0;
        while (true) {
            double t_next = t + dir * dt;
            bool clipped = false;
            if (std::fabs(t_next) > t0) {
                t_next = dir > 0 ? t0 : -t0;
                clipped = true;
                if (std::fabs(t_next - t) < 1e-12) break;
            }
            double a_try = have_slope ? a + slope_est * (t_next - t) : a;
            double u_try = u;
            if (solver.solve(t_next, u_try, a_try, tol1, tol2)) {
                push_sample(t_next, a_try, u_try);
                if (std::fabs(t_next - t) > 0.0) {
                    slope_est = (a_try - a) / (t_next - t);
                    have_slope = true;
                }
                t = t_next;
                a = a_try;
                u = u_try;
                halvings = 0;
                dt = std::min(dt * 2.0, dt0);
                if (clipped) break;
            } else {
                dt /= 2.0;
                if (++halvings > 10) {
                    curve.complete = false;
                    break;
                }
            }
        }
    }

    std::sort(samples.begin(), samples.end(),
              [](const Sample& a, const Sample& b) { return a.t < b.t; });
    for (const Sample& s : samples) {
        curve.ts.push_back(s.t);
        curve.as.push_back(s.a);
        curve.us.push_back(s.u);
        curve.res1.push_back(s.r1);
        curve.res2.push_back(s.r2);
    }
    if (curve.ts.size() < 3)
        throw NumericError("continue_tangency_curve: continuation collapsed");
    curve.window_halfwidth = 0.25 * (strip.upper(seed.t_star) - strip.lower(seed.t_star));
    return curve;
}

// ---------------------------------------------------------------------------
// Renormalized model
// ---------------------------------------------------------------------------

RenormalizedModel::RenormalizedModel(ModelPtr parent, ThetaSelection theta,
                                     TangencyCurveB curve, double window_halfwidth)
    : parent_(std::move(parent)),
      theta_(theta),
      curve_(std::move(curve)),
      window_halfwidth_(window_halfwidth) {
    if (!curve_.integer_theta)
        throw ValidationError("renormalize: the parent curve must be continued with "
                              "integer theta steps");
    const double t_ref = curve_.ts[curve_.ts.size() / 2];
    const Params p_ref{t_ref, curve_.eval(t_ref)};
    const LoopTrace tr = trace_loop(*parent_, theta_, p_ref, curve_.n, 10.0, true, true);
    winding_.l_low = 0;
    winding_.theta_n = tr.theta_n;
    winding_.n = curve_.n;
    winding_.slot = tr.climb;
    winding_.l_up = 0;
    winding_.n0_type = curve_.n0;
    chain_steps_ = 3 * parent_->gluing_steps() + tr.theta_n + curve_.n + tr.climb +
                   parent_->transversal_steps();

    // Seed window: parent offsets must stay inside the parent gluing window.
    const Scales sc = scales(p_ref);
    const double parent_room = 0.25 - std::fabs(sc.c_height - 1.0) - 0.03;
    seed_window_ = std::max(0.02, parent_room * sc.sy * 0.95);
}

Jet2 RenormalizedModel::chain_jet(const Params& pp, const Jet2& seed) const {
    Jet2 j = push_gluing(*parent_, pp, seed);
    j = push_linear(*parent_, pp, j, winding_.theta_n);
    j = push_gluing(*parent_, pp, j);
    j = push_linear(*parent_, pp, j, winding_.n);
    j = push_gluing(*parent_, pp, j);
    j = push_linear(*parent_, pp, j, winding_.slot);
    j = push_transversal(*parent_, pp, j);
    return j;
}

double RenormalizedModel::raw_critical_offset(const Params& pp) const {
    const double c_parent = parent_->critical_height(pp, 0.0);
    auto dchain = [&](double u) {
        Jet2 s;
        s.x = {0.0, 0.0, 0.0};
        s.y = {c_parent + u, 1.0, 0.0};
        return chain_jet(pp, s);
    };
    // Start from the continued tangency offset at this t.
    double u = curve_.us[curve_.nearest_index(pp.t)];
    for (int i = 0; i < 60; ++i) {
        const Jet2 j = dchain(u);
        if (j.y.d2 == 0.0) break;
        const double step = j.y.d1 / j.y.d2;
        u -= step;
        if (std::fabs(step) < 1e-18 + 1e-14 * std::fabs(u)) break;
    }
    return u;
}

RenormalizedModel::Scales RenormalizedModel::scales(const Params& pp) const {
    const double c_parent = parent_->critical_height(pp, 0.0);
    const double u = raw_critical_offset(pp);
    Scales sc;
    sc.c_height = c_parent + u;
    sc.sy = 1.0 / sc.c_height;
    Jet2 s;
    s.x = {0.0, 0.0, 0.0};
    s.y = {sc.c_height, 1.0, 0.0};
    const Jet2 z = chain_jet(pp, s);
    if (z.x.v == 0.0) throw NumericError("renormalize: degenerate critical value");
    sc.sx = 1.0 / z.x.v;
    return sc;
}

double RenormalizedModel::raw_z_y(const Params& pp) const {
    const Scales sc = scales(pp);
    Jet2 s;
    s.x = {0.0, 0.0, 0.0};
    s.y = {sc.c_height, 1.0, 0.0};
    return chain_jet(pp, s).y.v;
}

const RenormalizedModel::ChainBase& RenormalizedModel::chain_base(
    const Params& p, const Params& pp) const {
    for (const auto& [key, value] : base_cache_)
        if (key.t == p.t && key.a == p.a) return value;
    ChainBase cb;
    cb.sc = scales(pp);
    cb.kinds.push_back(StepKind::Gluing);
    for (int i = 0; i < winding_.theta_n; ++i) cb.kinds.push_back(StepKind::Linear);
    cb.kinds.push_back(StepKind::Gluing);
    for (int i = 0; i < winding_.n; ++i) cb.kinds.push_back(StepKind::Linear);
    cb.kinds.push_back(StepKind::Gluing);
    for (int i = 0; i < winding_.slot; ++i) cb.kinds.push_back(StepKind::Linear);
    cb.kinds.push_back(StepKind::Transversal);
    Vec2 q{0.0, cb.sc.c_height};
    for (StepKind kind : cb.kinds) {
        cb.orbit.push_back(q);
        switch (kind) {
            case StepKind::Linear: q = parent_->apply_linear(pp, q, 1); break;
            case StepKind::Gluing: q = parent_->apply_gluing(pp, q); break;
            default: q = parent_->apply_transversal(pp, q); break;
        }
    }
    // Pin the chain end height to the chart normalization z_y = a-hat.
    cb.z_end = {q.x, p.a / cb.sc.sy};
    if (base_cache_.size() > 16) base_cache_.erase(base_cache_.begin());
    base_cache_.push_back({p, std::move(cb)});
    return base_cache_.back().second;
}

Params RenormalizedModel::parent_params(const Params& p) const {
    for (const auto& [key, value] : param_cache_)
        if (key.t == p.t && key.a == p.a) return value;
    // Solve sy(t,a) * raw_z_y(t,a) = a_hat for the parent a.
    const double t = p.t;
    double a = curve_.eval(t);
    auto value = [&](double aa) {
        const Params pp{t, aa};
        return scales(pp).sy * raw_z_y(pp) - p.a;
    };
    double f = value(a);
    for (int it = 0; it < 80; ++it) {
        const double ha = std::max(1e-8 * std::fabs(a), 1e-20);
        const double fp = value(a + ha);
        const double d = (fp - f) / ha;
        if (d == 0.0 || !std::isfinite(d))
            throw NumericError("renormalize: parameter solve stalled");
        const double step = f / d;
        a -= step;
        f = value(a);
        if (std::fabs(step) <= 1e-15 * std::fabs(a) + 1e-300) break;
    }
    if (param_cache_.size() > 64) param_cache_.erase(param_cache_.begin());
    param_cache_.push_back({p, Params{t, a}});
    return Params{t, a};
}

double RenormalizedModel::lambda(const Params& p) const {
    return parent_->lambda(parent_params(p));
}
double RenormalizedModel::mu(const Params& p) const {
    return parent_->mu(parent_params(p));
}
double RenormalizedModel::dlambda_dt(const Params& p) const {
    const double h = 1e-5;
    return (lambda(Params{p.t + h, p.a}) - lambda(Params{p.t - h, p.a})) / (2.0 * h);
}
double RenormalizedModel::dlambda_da(const Params& p) const {
    const double h = std::max(1e-6 * std::fabs(p.a), 1e-18);
    return (lambda(Params{p.t, p.a + h}) - lambda(Params{p.t, p.a - h})) / (2.0 * h);
}
double RenormalizedModel::dmu_dt(const Params& p) const {
    const double h = 1e-5;
    return (mu(Params{p.t + h, p.a}) - mu(Params{p.t - h, p.a})) / (2.0 * h);
}
double RenormalizedModel::dmu_da(const Params& p) const {
    const double h = std::max(1e-6 * std::fabs(p.a), 1e-18);
    return (mu(Params{p.t, p.a + h}) - mu(Params{p.t, p.a - h})) / (2.0 * h);
}

ParamWindow RenormalizedModel::window() const {
    ParamWindow w;
    const double lo = curve_.ts.front(), hi = curve_.ts.back();
    w.t0 = 0.9 * std::min(std::fabs(lo), std::fabs(hi));
    // The unfolding coordinate stays meaningful while the chain's final climb
    // still lands inside the transversal window.
    w.a0 = 0.5 * 0.66 * seed_window_;
    return w;
}

Vec2 RenormalizedModel::apply_gluing(const Params& p, Vec2 q) const {
    const Params pp = parent_params(p);
    const Scales sc = scales(pp);
    Jet2 s;
    s.x = {q.x / sc.sx, 0.0, 0.0};
    s.y = {q.y / sc.sy, 1.0, 0.0};
    const Jet2 out = chain_jet(pp, s);
    return {sc.sx * out.x.v, sc.sy * out.y.v};
}

Mat2 RenormalizedModel::gluing_jacobian(const Params& p, Vec2 q) const {
    const Params pp = parent_params(p);
    const Scales sc = scales(pp);
    const Vec2 q_par{q.x / sc.sx, q.y / sc.sy};
    // Two jet pushes along the coordinate directions give the full Jacobian.
    Jet2 sx;
    sx.x = {q_par.x, 1.0, 0.0};
    sx.y = {q_par.y, 0.0, 0.0};
    Jet2 sy;
    sy.x = {q_par.x, 0.0, 0.0};
    sy.y = {q_par.y, 1.0, 0.0};
    const Jet2 ox = chain_jet(pp, sx);
    const Jet2 oy = chain_jet(pp, sy);
    Mat2 J;
    J.a = sc.sx * ox.x.d1 / sc.sx;
    J.b = sc.sx * oy.x.d1 / sc.sy;
    J.c = sc.sy * ox.y.d1 / sc.sx;
    J.d = sc.sy * oy.y.d1 / sc.sy;
    return J;
}

Hess2 RenormalizedModel::gluing_hessian(const Params& p, Vec2 q) const {
    const Params pp = parent_params(p);
    const Scales sc = scales(pp);
    const Vec2 q_par{q.x / sc.sx, q.y / sc.sy};
    // Second derivatives from jets along x, y and the diagonal direction.
    auto jet_along = [&](double dx, double dy) {
        Jet2 s;
        s.x = {q_par.x, dx, 0.0};
        s.y = {q_par.y, dy, 0.0};
        return chain_jet(pp, s);
    };
    const Jet2 jx = jet_along(1.0 / sc.sx, 0.0);
    const Jet2 jy = jet_along(0.0, 1.0 / sc.sy);
    const Jet2 jd = jet_along(1.0 / sc.sx, 1.0 / sc.sy);
    Hess2 H;
    const double fxx_x = jx.x.d2, fxx_y = jx.y.d2;
    const double fyy_x = jy.x.d2, fyy_y = jy.y.d2;
    const double fxy_x = (jd.x.d2 - fxx_x - fyy_x) / 2.0;
    const double fxy_y = (jd.y.d2 - fxx_y - fyy_y) / 2.0;
    H.h[0][0][0] = sc.sx * fxx_x;
    H.h[0][0][1] = H.h[0][1][0] = sc.sx * fxy_x;
    H.h[0][1][1] = sc.sx * fyy_x;
    H.h[1][0][0] = sc.sy * fxx_y;
    H.h[1][0][1] = H.h[1][1][0] = sc.sy * fxy_y;
    H.h[1][1][1] = sc.sy * fyy_y;
    return H;
}

Vec2 RenormalizedModel::gluing_difference(const Params& p, Vec2 base, Vec2 d) const {
    // Offset-exact evaluation along the cached chain orbit when anchored at
    // the critical point; otherwise the naive difference.
    if (std::fabs(base.x) > 1e-9 || std::fabs(base.y - 1.0) > 1e-9)
        return UnfoldingModel::gluing_difference(p, base, d);
    const Params pp = parent_params(p);
    const ChainBase& cb = chain_base(p, pp);
    Vec2 dp{d.x / cb.sc.sx, d.y / cb.sc.sy};
    for (std::size_t k = 0; k < cb.kinds.size(); ++k)
        dp = parent_->step_difference(pp, cb.orbit[k], dp, cb.kinds[k]);
    return {cb.sc.sx * dp.x, cb.sc.sy * dp.y};
}

Vec2 RenormalizedModel::apply_transversal(const Params& p, Vec2 q) const {
    const Params pp = parent_params(p);
    const Scales sc = scales(pp);
    const Vec2 q_par{q.x / sc.sx, q.y / sc.sy};
    const Vec2 out = parent_->apply_transversal(pp, q_par);
    return {sc.sx * out.x, sc.sy * out.y};
}

Mat2 RenormalizedModel::transversal_jacobian(const Params& p, Vec2 q) const {
    const Params pp = parent_params(p);
    const Scales sc = scales(pp);
    const Vec2 q_par{q.x / sc.sx, q.y / sc.sy};
    const Mat2 J = parent_->transversal_jacobian(pp, q_par);
    return {J.a, J.b * sc.sx / sc.sy, J.c * sc.sy / sc.sx, J.d};
}

Hess2 RenormalizedModel::transversal_hessian(const Params& p, Vec2 q) const {
    const Params pp = parent_params(p);
    const Scales sc = scales(pp);
    const Vec2 q_par{q.x / sc.sx, q.y / sc.sy};
    Hess2 H = parent_->transversal_hessian(pp, q_par);
    const double fx[2] = {sc.sx, sc.sy};
    Hess2 out;
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                out.h[k][i][j] = fx[k] * H.h[k][i][j] / (fx[i] * fx[j]);
    return out;
}

Box RenormalizedModel::gluing_window_box() const {
    return Box::around({0.0, 1.0}, 0.5, seed_window_);
}

Box RenormalizedModel::transversal_window_box() const {
    return Box::around({0.0, transversal_window_center()}, 0.5, 0.66 * seed_window_);
}

double RenormalizedModel::max_seed_offset() const { return 0.96 * seed_window_; }

double RenormalizedModel::critical_height(const Params& p, double x) const {
    const Params pp = parent_params(p);
    const Scales sc = scales(pp);
    const double x_par = x / sc.sx;
    double y = sc.c_height;
    for (int i = 0; i < 60; ++i) {
        Jet2 s;
        s.x = {x_par, 0.0, 0.0};
        s.y = {y, 1.0, 0.0};
        const Jet2 j = chain_jet(pp, s);
        if (j.y.d2 == 0.0) break;
        const double step = j.y.d1 / j.y.d2;
        y -= step;
        if (std::fabs(step) < 1e-18 + 1e-15 * std::fabs(y)) break;
    }
    return sc.sy * y;
}

Vec2 RenormalizedModel::critical_value(const Params& p) const {
    // By the chart normalization the critical value is (1, a-hat) exactly.
    return {1.0, p.a};
}

double RenormalizedModel::seed_height(const Params& p) const {
    const Params pp = parent_params(p);
    return scales(pp).sy * parent_->seed_height(pp);
}

double RenormalizedModel::transversal_window_center() const {
    const double t_ref = curve_.ts[curve_.ts.size() / 2];
    const Params pp{t_ref, curve_.eval(t_ref)};
    return scales(pp).sy * parent_->seed_height(pp);
}

double RenormalizedModel::gamma_half_width() const { return 0.05; }

double RenormalizedModel::unfolding_derivative(double t) const {
    const double b = curve_.eval(t);
    const double h = std::max(1e-8 * std::fabs(b), 1e-18);
    auto zy = [&](double a) {
        const Params pp{t, a};
        return scales(pp).sy * raw_z_y(pp);
    };
    return (zy(b + h) - zy(b - h)) / (2.0 * h);
}

RenormalizedPtr renormalize(ModelPtr parent, const ThetaSelection& theta,
                            const TangencyCurveB& curve, double window_halfwidth) {
    return std::make_shared<RenormalizedModel>(std::move(parent), theta, curve,
                                               window_halfwidth);
}

namespace {

StripRecursion strip_children(const ModelPtr& model, const ThetaSelection& theta,
                              int n_base, int depth_budget, double t_ref,
                              bool integer_theta) {
    StripRecursion out;
    out.child_model = model;
    for (int j = 0; j < depth_budget; ++j) {
        const int n_child = n_base + j;
        StripChild sc;
        const double a_ref = solve_return_a(*model, n_child, t_ref);
        const LoopTrace tr = trace_loop(*model, theta, Params{t_ref, a_ref}, n_child,
                                        10.0, true, integer_theta);
        sc.strip = make_strip(model, theta, n_child, tr.n0);
        sc.certificate =
            find_nearest_tangency(model, theta, sc.strip, t_ref, integer_theta);
        sc.curve = continue_tangency_curve(model, theta, sc.certificate, sc.strip, 10.0,
                                           integer_theta);
        const LoopTrace trc =
            trace_loop(*model, theta, Params{sc.certificate.t_star, sc.certificate.a_star},
                       n_child, 10.0, true, integer_theta);
        sc.winding.l_low = 0;
        sc.winding.theta_n = trc.theta_n;
        sc.winding.n = n_child;
        sc.winding.slot = trc.climb;
        sc.winding.l_up = 0;
        sc.winding.n0_type = sc.certificate.n0;
        out.children.push_back(std::move(sc));
    }

    // Sibling windows: a quarter of the vertical distance to the nearest sibling.
    for (std::size_t i = 0; i < out.children.size(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        const double bi = out.children[i].curve.eval(t_ref);
        for (std::size_t k = 0; k < out.children.size(); ++k) {
            if (k == i) continue;
            nearest =
                std::min(nearest, std::fabs(out.children[k].curve.eval(t_ref) - bi));
        }
        if (std::isfinite(nearest))
            out.children[i].curve.window_halfwidth =
                std::min(out.children[i].curve.window_halfwidth, nearest / 4.0);
    }

    // Sibling strips must be pairwise disjoint.
    const double t_lo = out.children.front().curve.ts.front();
    const double t_hi = out.children.front().curve.ts.back();
    for (std::size_t i = 0; i < out.children.size(); ++i) {
        for (std::size_t k = i + 1; k < out.children.size(); ++k) {
            for (double frac : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                const double t = t_lo + frac * (t_hi - t_lo);
                const auto& si = out.children[i].strip;
                const auto& sk = out.children[k].strip;
                const bool overlap =
                    si.lower(t) <= sk.upper(t) && sk.lower(t) <= si.upper(t);
                if (overlap)
                    throw PropertyError("strip_recursion: sibling strips intersect");
            }
        }
    }
    return out;
}

} // namespace

StripRecursion strip_recursion_primary(const ModelPtr& model, const ThetaSelection& theta,
                                       int n_base, int depth_budget, bool integer_theta) {
    if (depth_budget < 1)
        throw ValidationError("strip_recursion: depth budget exhausted");
    return strip_children(model, theta, n_base, depth_budget, 0.0, integer_theta);
}

StripRecursion strip_recursion(const ModelPtr& model, const ThetaSelection& theta,
                               const TangencyCurveB& parent, int depth_budget) {
    if (depth_budget < 1)
        throw ValidationError("strip_recursion: depth budget exhausted");
    RenormalizedPtr child_model =
        renormalize(model, theta, parent, parent.window_halfwidth);
    const RenormalizedModel& child = *child_model;
    StripRecursion out;
    out.child_model = child_model;

    // Unfolding-window checks: the tangency persists along the curve (P1) and
    // the gap responds to the unfolding parameter (P2).
    const double t_ref = parent.ts[parent.ts.size() / 2];
    const double dz = child.unfolding_derivative(t_ref);
    if (!(std::fabs(dz) > 0.0) || !std::isfinite(dz))
        throw PropertyError("strip_recursion: window fails the unfolding condition (P2)");

    // Smallest child depth entering the asymptotic regime: the displacement
    // Q C^2 (lambda^theta mu)^{2n} must drop below the wedge scale.
    ModelPtr child_ptr = child_model;
    const Params base_p{t_ref, 0.0};
    const GluingCoefficients gc = measure_gluing(child, base_p);
    const double lam = child.lambda(base_p), mu_c = child.mu(base_p);
    const double decay = -std::log(std::pow(lam, theta.theta) * mu_c);
    const double bulk = std::log(std::max(std::fabs(gc.Q) * gc.C * gc.C, 1.0) * 40.0);
    int n_base = std::max(std::max(6, static_cast<int>(std::ceil(1.0 / theta.theta)) + 1),
                          static_cast<int>(std::ceil(bulk / (2.0 * decay))));
    int tries = 0;
    while (true) {
        try {
            const double a = solve_return_a(child, n_base, t_ref);
            trace_loop(child, theta, Params{t_ref, a}, n_base);
            break;
        } catch (const std::exception&) {
            if (++tries > 60)
                throw NumericError("strip_recursion: no feasible child depth");
            ++n_base;
        }
    }
    StripRecursion built = strip_children(child_ptr, theta, n_base, depth_budget, t_ref,
                                          /*integer_theta=*/false);
    out.children = std::move(built.children);
    return out;
}

} // namespace unfold
