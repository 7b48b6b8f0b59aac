#include "unfold/model.hpp"

#include <cmath>

#include "unfold/errors.hpp"

namespace unfold {

void GluingMap::validate() const {
    if (B == 0.0) throw ValidationError("gluing: coefficient B must be nonzero");
    if (Q <= 0.0) throw ValidationError("gluing: quadratic coefficient Q must be positive");
}

Vec2 UnfoldingModel::apply_linear(const Params& p, Vec2 q, int k) const {
    const double l = lambda(p), m = mu(p);
    const double lk = std::pow(l, k), mk = std::pow(m, k);
    return {q.x * lk, q.y * mk};
}

Mat2 UnfoldingModel::linear_jacobian(const Params& p, int k) const {
    return Mat2::diag(std::pow(lambda(p), k), std::pow(mu(p), k));
}

Box UnfoldingModel::gluing_window_box() const {
    return Box::around({0.0, 1.0}, 0.6, 0.25);
}

Box UnfoldingModel::transversal_window_box() const {
    return Box::around({0.0, transversal_window_center()}, 0.6, 0.2);
}

StepResult UnfoldingModel::step(const Params& p, Vec2 q) const {
    if (in_gluing_window(q)) return {apply_gluing(p, q), StepKind::Gluing};
    if (in_transversal_window(q)) return {apply_transversal(p, q), StepKind::Transversal};
    if (q_domain().contains(q)) return {apply_linear(p, q, 1), StepKind::Linear};
    throw NumericError("step: point escaped the chart domain");
}

Mat2 UnfoldingModel::step_jacobian(const Params& p, Vec2 q, StepKind kind) const {
    switch (kind) {
        case StepKind::Linear: return linear_jacobian(p, 1);
        case StepKind::Gluing: return gluing_jacobian(p, q);
        default: return transversal_jacobian(p, q);
    }
}

Hess2 UnfoldingModel::step_hessian(const Params& p, Vec2 q, StepKind kind) const {
    switch (kind) {
        case StepKind::Linear: return Hess2{};
        case StepKind::Gluing: return gluing_hessian(p, q);
        default: return transversal_hessian(p, q);
    }
}

Jet2 UnfoldingModel::step_jet(const Params& p, const Jet2& j, StepKind* kind_out) const {
    const Vec2 q = j.point();
    const StepResult r = step(p, q);
    if (kind_out) *kind_out = r.kind;
    return push_jet(j, r.point, step_jacobian(p, q, r.kind), step_hessian(p, q, r.kind));
}

Vec2 UnfoldingModel::gluing_difference(const Params& p, Vec2 base, Vec2 d) const {
    return apply_gluing(p, base + d) - apply_gluing(p, base);
}

Vec2 UnfoldingModel::transversal_difference(const Params& p, Vec2 base, Vec2 d) const {
    return apply_transversal(p, base + d) - apply_transversal(p, base);
}

Vec2 UnfoldingModel::step_difference(const Params& p, Vec2 base, Vec2 d,
                                     StepKind kind) const {
    switch (kind) {
        case StepKind::Linear: return {lambda(p) * d.x, mu(p) * d.y};
        case StepKind::Gluing: return gluing_difference(p, base, d);
        default: return transversal_difference(p, base, d);
    }
}

Vec2 UnfoldingModel::critical_value(const Params& p) const {
    return apply_gluing(p, critical_point(p));
}

PlaneCurve UnfoldingModel::seed_stable_curve(const Params& p, std::size_t samples) const {
    const double h = seed_height(p);
    return PlaneCurve::graph([h](double) { return h; }, -2.0, 2.0, samples);
}

void UnfoldingModel::validate_eigen_conditions() const {
    const ParamWindow w = window();
    const int grid = 21;
    double lmax = 0.0, mmax = 0.0;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            Params p{-w.t0 + 2.0 * w.t0 * i / (grid - 1), -w.a0 + 2.0 * w.a0 * j / (grid - 1)};
            const double l = lambda(p), m = mu(p);
            if (!(l > 0.0) || !(l < 1.0))
                throw ValidationError("stable eigenvalue must satisfy 0 < lambda < 1 on the window");
            if (!(m > 1.0))
                throw ValidationError("unstable eigenvalue must satisfy mu > 1 on the window");
            if (!(dmu_dt(p) > 0.0))
                throw ValidationError("the unstable eigenvalue must increase with t");
            lmax = std::max(lmax, l);
            mmax = std::max(mmax, m);
        }
    }
    if (!(lmax * mmax * mmax * mmax < 1.0))
        throw ValidationError("eigenvalue condition lambda_max * mu_max^3 < 1 violated on the window");
}

} // namespace unfold
