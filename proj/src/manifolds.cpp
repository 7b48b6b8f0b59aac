#include "unfold/manifolds.hpp"

#include <cmath>

#include "unfold/errors.hpp"

namespace unfold {

StableWedge pullback_stable(const PlaneCurve& seed, int n, const UnfoldingModel& model,
                            const Params& p, std::size_t samples) {
    if (n < 0) throw ValidationError("pullback_stable: n must be >= 0");
    const double l = model.lambda(p), m = model.mu(p);
    const double ln = std::pow(l, n), mn = std::pow(m, -n);
    StableWedge out;
    out.n = n;
    out.curve = PlaneCurve::graph(
        [&](double x) { return mn * seed.height_at_x(ln * x); }, -2.0, 2.0, samples);
    double sup = 0.0;
    for (double s : out.curve.knots()) sup = std::max(sup, std::fabs(out.curve.eval(s).y));
    out.sup_abs = sup;
    return out;
}

PlaneCurve stable_speed(const PlaneCurve& seed, int n, const UnfoldingModel& model,
                        const Params& p, ParamDirection dir,
                        const PlaneCurve* seed_param_derivative, std::size_t samples) {
    const double l = model.lambda(p), m = model.mu(p);
    const double dl = dir == ParamDirection::T ? model.dlambda_dt(p) : model.dlambda_da(p);
    const double dm = dir == ParamDirection::T ? model.dmu_dt(p) : model.dmu_da(p);
    const double ln = std::pow(l, n), mn = std::pow(m, -n);
    const double ratio_n = std::pow(l / m, n);
    return PlaneCurve::graph(
        [&](double x) {
            const double wn = mn * seed.height_at_x(ln * x);
            const double wprime = seed.d1(ln * x).y;
            double v = -(n / m) * dm * wn + ratio_n * (n / l) * dl * wprime * x;
            if (seed_param_derivative)
                v += mn * seed_param_derivative->height_at_x(ln * x);
            return v;
        },
        -2.0, 2.0, samples);
}

PlaneCurve gamma_curve(const UnfoldingModel& model, const Params& p, std::size_t samples) {
    const double x0 = model.gamma_half_width();
    return PlaneCurve::graph([&](double x) { return model.critical_height(p, x); }, -x0,
                             x0, samples);
}

PlaneCurve gamma_preimage(const UnfoldingModel& model, const Params& p, int n,
                          std::size_t samples) {
    if (n < 0) throw ValidationError("gamma_preimage: n must be >= 0");
    const double l = model.lambda(p), m = model.mu(p);
    const double ln = std::pow(l, n), mn = std::pow(m, -n);
    const double x0 = model.gamma_half_width();
    const double half = std::min(2.0, x0 / ln);
    if (!(half > 0.0)) throw NumericError("gamma_preimage: domain escape");
    return PlaneCurve::graph(
        [&](double x) { return mn * model.critical_height(p, ln * x); }, -half, half,
        samples);
}

} // namespace unfold
