#include "unfold/ideal_model.hpp"

#include <cmath>

#include "unfold/errors.hpp"

namespace unfold {

IdealModel::IdealModel(double lambda0, double mu0, GluingMap g, int n_steps, int m_steps,
                       ParamWindow window, double q2_height)
    : lambda0_(lambda0),
      mu0_(mu0),
      gluing_(g),
      n_steps_(n_steps),
      m_steps_(m_steps),
      window_(window),
      q2_height_(q2_height) {}

Vec2 IdealModel::apply_gluing(const Params& p, Vec2 q) const {
    const GluingMap& g = gluing_;
    const double dy = q.y - 1.0;
    const double x_out = 1.0 + g.A * q.x + g.B * dy + p.t * g.E + p.a * g.F;
    const double y_out =
        g.C * q.x + g.Q * dy * dy + p.a * (1.0 + q.x * g.phi_x + dy * dy * g.phi_y);
    return {x_out, y_out};
}

Mat2 IdealModel::gluing_jacobian(const Params& p, Vec2 q) const {
    const GluingMap& g = gluing_;
    const double dy = q.y - 1.0;
    return {g.A, g.B, g.C + p.a * g.phi_x, 2.0 * dy * (g.Q + p.a * g.phi_y)};
}

Hess2 IdealModel::gluing_hessian(const Params& p, Vec2) const {
    Hess2 h;
    h.h[1][1][1] = 2.0 * (gluing_.Q + p.a * gluing_.phi_y);
    return h;
}

Vec2 IdealModel::gluing_difference(const Params& p, Vec2 base, Vec2 d) const {
    const GluingMap& g = gluing_;
    const double dy0 = base.y - 1.0;
    const double quad = 2.0 * dy0 * d.y + d.y * d.y;
    const double dx_out = g.A * d.x + g.B * d.y;
    const double dy_out =
        g.C * d.x + g.Q * quad + p.a * (g.phi_x * d.x + g.phi_y * quad);
    return {dx_out, dy_out};
}

Vec2 IdealModel::apply_transversal(const Params&, Vec2 q) const {
    return {q.x - 1.0, q.y - q2_height_};
}

Vec2 IdealModel::critical_value(const Params& p) const {
    // G(0,1) = (1 + tE + aF, a), the critical value sits at height a exactly.
    return {1.0 + p.t * gluing_.E + p.a * gluing_.F, p.a};
}

ModelPtr make_ideal_model(double lambda0, double mu0, const GluingMap& gluing,
                          int n_steps, int m_steps, ParamWindow window, double q2_height) {
    if (!(lambda0 > 0.0 && lambda0 < 1.0))
        throw ValidationError("make_ideal_model: need 0 < lambda0 < 1");
    if (!(mu0 > 1.0)) throw ValidationError("make_ideal_model: need mu0 > 1");
    if (!(lambda0 * mu0 * mu0 * mu0 < 1.0))
        throw ValidationError("make_ideal_model: lambda0 * mu0^3 must be < 1");
    gluing.validate();
    if (n_steps != 1 || m_steps != 1)
        throw ValidationError(
            "make_ideal_model: the ideal backend applies its returns as single "
            "composite steps (N = M = 1)");
    if (!(q2_height > 1.0 / mu0 && q2_height < 2.0))
        throw ValidationError("make_ideal_model: q2 height must lie in (1/mu, 2)");
    auto model = std::make_shared<IdealModel>(lambda0, mu0, gluing, n_steps, m_steps,
                                              window, q2_height);
    model->validate_eigen_conditions();
    return model;
}

} // namespace unfold
