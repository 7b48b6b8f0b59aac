#include "unfold/sinks.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "unfold/errors.hpp"

namespace unfold {

double SinkStrip::halfwidth(double t) const {
    const Params p{t, center(t)};
    return eps0 / std::pow(model->mu(p), 2 * n);
}

bool SinkStrip::contains(double t, double a) const {
    return std::fabs(a - center(t)) <= halfwidth(t);
}

double max_quadratic_coefficient(const UnfoldingModel& model, const Params& p) {
    double q = 0.0;
    // Sample the second derivative over a band around the critical point.
    for (int i = -4; i <= 4; ++i) {
        for (int j = -4; j <= 4; ++j) {
            Vec2 pt{0.1 * i, model.critical_height(p, 0.0) + 0.02 * j};
            if (!model.in_gluing_window(pt)) continue;
            const Hess2 h = model.gluing_hessian(p, pt);
            q = std::max(q, std::fabs(h.h[1][1][1]) / 2.0);
        }
    }
    if (q == 0.0) throw NumericError("max_quadratic_coefficient: degenerate gluing");
    return q;
}

SinkStrip make_sink_strip(ModelPtr model, int n, double eps0) {
    SinkStrip s;
    s.n = n;
    s.eps0 = eps0;
    s.model = std::move(model);
    return s;
}

namespace {

// The sink return F^{n+N} around the on-curve critical value, evaluated in
// offset coordinates: the image offset of center + d is
//   [z(p) - center] + G_diff(c, (c_n - c) + Lambda^n d)
// which stays exact at box scales far below the ulp of the absolute
// coordinates.
struct SinkReturn {
    const UnfoldingModel& model;
    Params p;          // parameters being certified
    Vec2 center;       // critical value on the return curve
    Vec2 climbed;      // Lambda^n center
    Vec2 crit;         // critical point (0, c(0))
    Vec2 kick;         // z(p) - center
    int n;

    static SinkReturn make(const UnfoldingModel& model, const Params& p, int n,
                           const Vec2& center) {
        SinkReturn r{model, p, center, {}, {}, {}, n};
        r.climbed = model.apply_linear(p, center, n);
        r.crit = model.critical_point(p);
        r.kick = model.critical_value(p) - center;
        return r;
    }

    Vec2 offset_image(Vec2 d, Mat2* jac = nullptr) const {
        const double ln = std::pow(model.lambda(p), n);
        const double mn = std::pow(model.mu(p), n);
        const Vec2 d_climbed{ln * d.x, mn * d.y};
        const Vec2 dg = (climbed - crit) + d_climbed;
        const Vec2 diff = model.gluing_difference(p, crit, dg);
        if (jac) {
            const Vec2 at = crit + dg;
            *jac = model.gluing_jacobian(p, at) * Mat2::diag(ln, mn);
        }
        return kick + diff;
    }
};

} // namespace

SinkCertificate certify_sink(const ModelPtr& model, const ThetaSelection& theta,
                             const Params& params, int n, int boundary_samples) {
    (void)theta;
    const double t = params.t;
    const double a_n = solve_return_a(*model, n, t);
    const Params on_curve{t, a_n};
    const double mu = model->mu(on_curve);
    const double q_tilde = max_quadratic_coefficient(*model, on_curve);
    const double delta = 1.0 / (4.0 * q_tilde);
    const double eps0 = 1.0 / (32.0 * q_tilde);
    if (std::fabs(params.a - a_n) > eps0 / std::pow(mu, 2 * n))
        throw ValidationError("certify_sink: parameters outside the sink strip A_n");

    SinkCertificate cert;
    cert.n = n;
    cert.period = n + model->gluing_steps();
    cert.box_center = model->critical_value(on_curve);
    cert.half_x = 1.0 / 3.0;
    cert.half_y = delta / std::pow(mu, 2 * n);

    const SinkReturn ret = SinkReturn::make(*model, params, n, cert.box_center);

    // Boundary containment with margin, sampled densely on all four edges;
    // everything happens in offset coordinates around the box center.
    double min_margin_frac = std::numeric_limits<double>::infinity();
    auto probe = [&](const Vec2& d) {
        const Vec2 image = ret.offset_image(d);
        const double off_x = std::fabs(image.x);
        const double off_y = std::fabs(image.y);
        if (off_x > cert.half_x || off_y > cert.half_y)
            throw NumericError("certify_sink: containment violated at a boundary sample");
        min_margin_frac = std::min({min_margin_frac, (cert.half_x - off_x) / cert.half_x,
                                    (cert.half_y - off_y) / cert.half_y});
    };
    for (int i = 0; i < boundary_samples; ++i) {
        const double s = -1.0 + 2.0 * i / (boundary_samples - 1);
        probe({s * cert.half_x, +cert.half_y});
        probe({s * cert.half_x, -cert.half_y});
        probe({+cert.half_x, s * cert.half_y});
        probe({-cert.half_x, s * cert.half_y});
    }
    cert.boundary_margin = min_margin_frac;

    // Unique periodic point by Newton on the offset return.
    Vec2 d{0.0, 0.0};
    Mat2 J;
    for (int it = 0; it < 80; ++it) {
        const Vec2 image = ret.offset_image(d, &J);
        const Vec2 res = image - d;
        if (res.norm_inf() <= 1e-10 * cert.half_y) break;
        const Mat2 A{J.a - 1.0, J.b, J.c, J.d - 1.0};
        d = d - A.inverse() * res;
        if (std::fabs(d.x) > 2.0 * cert.half_x || std::fabs(d.y) > 2.0 * cert.half_y)
            throw NumericError("certify_sink: periodic-point Newton left the box");
    }
    const Vec2 residual = ret.offset_image(d, &J) - d;
    if (residual.norm_inf() > 1e-8 * cert.half_y)
        throw NumericError("certify_sink: periodic-point Newton did not converge");
    cert.periodic_point = cert.box_center + d;
    cert.spectral_radius = J.spectral_radius();
    cert.entry22 = J.d;
    cert.det_abs = std::fabs(J.det());
    if (!(cert.spectral_radius < 1.0))
        throw NumericError("certify_sink: periodic point is not attracting");

    // No smaller period: the climbing heights of the sink orbit are strictly
    // monotone, so no intermediate iterate can re-enter the box.
    Vec2 orbit = d;
    for (int k = 1; k <= n; ++k) {
        orbit = {model->lambda(params) * orbit.x, model->mu(params) * orbit.y};
        const Vec2 abs_off = model->apply_linear(params, cert.box_center, k) +
                             orbit - cert.box_center;
        if (std::fabs(abs_off.x) <= cert.half_x && std::fabs(abs_off.y) <= cert.half_y)
            throw PropertyError("certify_sink: a smaller period divides the return");
    }
    return cert;
}

namespace {

struct BoxBuild {
    NewhouseBox box;
    TangencyCurveB curve;
};

BoxBuild build_box(const ModelPtr& model, const ThetaSelection& theta,
                   const TangencyCertificate& cert, const TangencyCurveB& curve,
                   const SinkStrip& sink_strip, int boundary_samples, int generation) {
    NewhouseBox box;
    box.generation = generation;
    box.labels.push_back({curve.n, curve.n0});

    auto gap = [&](double t) { return curve.eval(t) - sink_strip.center(t); };
    auto cross = [&](double target, double lo, double hi) {
        return bisect([&](double t) { return gap(t) - target; }, lo, hi, 0.0, 200);
    };
    const double t_star = cert.t_star;
    const double half = sink_strip.halfwidth(t_star);
    const double range = curve.ts.back() - curve.ts.front();
    double lo = std::max(curve.ts.front(), t_star - 0.25 * range);
    double hi = std::min(curve.ts.back(), t_star + 0.25 * range);
    // The slope difference to a_n is negative, so b - a_n falls through the strip.
    box.t_lo = cross(+half, lo, t_star);
    box.t_hi = cross(-half, t_star, hi);

    double a_min = std::numeric_limits<double>::infinity(), a_max = -a_min;
    const int samples = 33;
    for (int i = 0; i < samples; ++i) {
        const double t = box.t_lo + (box.t_hi - box.t_lo) * i / (samples - 1);
        const double c = sink_strip.center(t), h = sink_strip.halfwidth(t);
        a_min = std::min(a_min, c - h);
        a_max = std::max(a_max, c + h);
        box.curve_t.push_back(t);
        box.curve_a.push_back(curve.eval(t));
    }
    box.a_lo = a_min;
    box.a_hi = a_max;

    box.certificates.push_back(
        certify_sink(model, theta, Params{t_star, cert.a_star}, curve.n, boundary_samples));
    return {box, curve};
}

} // namespace

std::vector<NewhouseBox> newhouse_recursion(const ModelPtr& model,
                                            const ThetaSelection& theta, int generations,
                                            const NewhouseOptions& opt) {
    if (generations < 1) throw ValidationError("newhouse_recursion: generations must be >= 1");
    const double q_tilde = max_quadratic_coefficient(
        *model, Params{0.0, solve_return_a(*model, opt.n_lo, 0.0)});
    const double eps0 = 1.0 / (32.0 * q_tilde);

    std::vector<NewhouseBox> boxes;
    std::vector<TangencyCurveB> curves;
    for (int n = opt.n_lo; n <= opt.n_hi; ++n) {
        const double a0 = solve_return_a(*model, n, 0.0);
        const LoopTrace tr = trace_loop(*model, theta, Params{0.0, a0}, n);
        const TangencyStrip strip = make_strip(model, theta, n, tr.n0);
        int built = 0;
        for (int kappa : {1, 0}) {
            if (built >= opt.types_per_n) break;
            try {
                const TangencyCertificate cert =
                    find_secondary_tangency(model, theta, strip, 0.0, kappa);
                const TangencyCurveB curve =
                    continue_tangency_curve(model, theta, cert, strip);
                const SinkStrip sink_strip = make_sink_strip(model, n, eps0);
                BoxBuild bb = build_box(model, theta, cert, curve, sink_strip,
                                        opt.boundary_samples, 1);
                boxes.push_back(std::move(bb.box));
                curves.push_back(std::move(bb.curve));
                ++built;
            } catch (const NumericError&) {
                continue;
            }
        }
    }

    // Pairwise disjointness of first-generation boxes.
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        for (std::size_t k = i + 1; k < boxes.size(); ++k) {
            const bool t_overlap =
                boxes[i].t_lo <= boxes[k].t_hi && boxes[k].t_lo <= boxes[i].t_hi;
            const bool a_overlap =
                boxes[i].a_lo <= boxes[k].a_hi && boxes[k].a_lo <= boxes[i].a_hi;
            if (t_overlap && a_overlap)
                throw PropertyError("newhouse_recursion: generation-1 boxes intersect");
        }
    }

    if (generations >= 2) {
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            NewhouseBox& parent = boxes[i];
            try {
                const StripRecursion rec =
                    strip_recursion(model, theta, curves[i], opt.child_budget);
                for (const StripChild& childc : rec.children) {
                    const ModelPtr child_model = rec.child_model;
                    const double child_q = max_quadratic_coefficient(
                        *child_model,
                        Params{childc.certificate.t_star, childc.certificate.a_star});
                    const SinkStrip child_sink =
                        make_sink_strip(child_model, childc.curve.n, 1.0 / (32.0 * child_q));
                    BoxBuild bb = build_box(child_model, theta, childc.certificate,
                                            childc.curve, child_sink,
                                            opt.boundary_samples, parent.generation + 1);
                    NewhouseBox child = std::move(bb.box);
                    child.labels.insert(child.labels.begin(), parent.labels.begin(),
                                        parent.labels.end());
                    // Nesting: the child window sits inside the parent window and the
                    // child carries every parent certificate plus its own.
                    if (child.t_lo < parent.t_lo - 1e-12 || child.t_hi > parent.t_hi + 1e-12)
                        throw PropertyError("newhouse_recursion: child box not nested");
                    child.certificates.insert(child.certificates.begin(),
                                              parent.certificates.begin(),
                                              parent.certificates.end());
                    for (std::size_t c1 = 0; c1 < child.certificates.size(); ++c1)
                        for (std::size_t c2 = c1 + 1; c2 < child.certificates.size(); ++c2)
                            if (child.certificates[c1].period == child.certificates[c2].period)
                                throw PropertyError(
                                    "newhouse_recursion: certificate periods collide");
                    parent.children.push_back(std::move(child));
                }
            } catch (const NumericError&) {
                // Box discarded from deeper recursion; keep its own certificate.
                continue;
            }
        }
    }
    return boxes;
}

DimensionReport nh_box_dimension(const ModelPtr& model, const ThetaSelection& theta,
                                 const std::vector<NewhouseBox>& boxes) {
    // Matched-scale covering counts: each depth n is counted at the vertical
    // scale of its own sink strip.
    std::map<int, std::vector<const NewhouseBox*>> by_n;
    for (const NewhouseBox& b : boxes)
        if (b.generation == 1) by_n[b.labels.back().first].push_back(&b);
    if (by_n.size() < 2)
        throw NumericError("nh_box_dimension: insufficient scale range (need >= 2 depths)");

    const double q_tilde = max_quadratic_coefficient(
        *model, Params{0.0, solve_return_a(*model, by_n.begin()->first, 0.0)});
    const double eps0 = 1.0 / (32.0 * q_tilde);

    DimensionReport rep;
    double eps_min = std::numeric_limits<double>::infinity(), eps_max = 0.0;
    for (const auto& [n, group] : by_n) {
        const double mu = model->mu(Params{0.0, solve_return_a(*model, n, 0.0)});
        const double eps = eps0 * std::pow(mu, -2.0 * n);
        eps_min = std::min(eps_min, eps);
        eps_max = std::max(eps_max, eps);
        double count = 0.0;
        for (const NewhouseBox* b : group) {
            const double cols = (b->t_hi - b->t_lo) / eps + 1.0;
            const double rows = std::fabs(b->curve_a.back() - b->curve_a.front()) / eps;
            count += cols + rows;
        }
        rep.log_inv_eps.push_back(std::log(1.0 / eps));
        rep.log_count.push_back(std::log(count));
    }
    if (!(eps_max / eps_min >= 100.0))
        throw NumericError("nh_box_dimension: scales span fewer than 2 decades");
    rep.fit = fit_line(rep.log_inv_eps, rep.log_count);

    double ratio = 0.0;
    const ParamWindow w = model->window();
    for (int i = 0; i <= 16; ++i) {
        const Params p{-w.t0 + 2.0 * w.t0 * i / 16.0, 0.0};
        ratio = std::max(ratio, std::log(1.0 / model->lambda(p)) / std::log(model->mu(p)));
    }
    rep.theoretical_slope = 0.5 * theta.theta * ratio;
    return rep;
}

} // namespace unfold
