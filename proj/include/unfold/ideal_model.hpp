#pragma once

#include "unfold/model.hpp"

namespace unfold {

// The normal-form backend: exactly linear on the chart box, quadratic gluing
// block with explicit coefficients, rigid transversal return. mu depends on t
// only, lambda is constant.
class IdealModel final : public UnfoldingModel {
public:
    IdealModel(double lambda0, double mu0, GluingMap g, int n_steps, int m_steps,
               ParamWindow window, double q2_height = 1.5);

    std::string backend_name() const override { return "ideal"; }

    double lambda(const Params&) const override { return lambda0_; }
    double mu(const Params& p) const override { return mu0_ + p.t; }
    double dlambda_dt(const Params&) const override { return 0.0; }
    double dlambda_da(const Params&) const override { return 0.0; }
    double dmu_dt(const Params&) const override { return 1.0; }
    double dmu_da(const Params&) const override { return 0.0; }

    int gluing_steps() const override { return n_steps_; }
    int transversal_steps() const override { return m_steps_; }
    ParamWindow window() const override { return window_; }

    Vec2 apply_gluing(const Params& p, Vec2 q) const override;
    Mat2 gluing_jacobian(const Params& p, Vec2 q) const override;
    Hess2 gluing_hessian(const Params& p, Vec2 q) const override;
    Vec2 gluing_difference(const Params& p, Vec2 base, Vec2 d) const override;
    Vec2 transversal_difference(const Params&, Vec2, Vec2 d) const override { return d; }

    Vec2 apply_transversal(const Params& p, Vec2 q) const override;
    Mat2 transversal_jacobian(const Params&, Vec2) const override { return Mat2::identity(); }
    Hess2 transversal_hessian(const Params&, Vec2) const override { return Hess2{}; }

    double critical_height(const Params&, double) const override { return 1.0; }
    Vec2 critical_value(const Params& p) const override;
    double seed_height(const Params&) const override { return q2_height_; }
    double transversal_window_center() const override { return q2_height_; }

    const GluingMap& gluing() const { return gluing_; }

private:
    double lambda0_;
    double mu0_;
    GluingMap gluing_;
    int n_steps_;
    int m_steps_;
    ParamWindow window_;
    double q2_height_;
};

// Builds the ideal backend, validating the eigenvalue conditions on the window.
ModelPtr make_ideal_model(double lambda0, double mu0, const GluingMap& gluing,
                          int n_steps, int m_steps,
                          ParamWindow window = ParamWindow{}, double q2_height = 1.5);

} // namespace unfold
