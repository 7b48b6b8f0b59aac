#pragma once

#include <memory>
#include <string>
#include <vector>

#include "unfold/geometry.hpp"
#include "unfold/plane_curve.hpp"

namespace unfold {

struct Params {
    double t{0.0};
    double a{0.0};
};

struct ParamWindow {
    double t0{0.19};
    double a0{0.05};

    bool contains(const Params& p) const {
        return std::fabs(p.t) <= t0 && std::fabs(p.a) <= a0;
    }
};

// Coefficients of the composite return map near the primary critical point,
// in coordinates centered at (0,1) in the domain and at the image of (0,1):
//   x_out = x_img + A x + B (y-1) + t E + a F
//   y_out = C x + Q (y-1)^2 + a [1 + x phi_x + (y-1)^2 phi_y]
struct GluingMap {
    double A{0.0};
    double B{1.0};
    double C{1.0};
    double E{0.0};
    double F{0.0};
    double Q{1.0};
    double phi_x{0.0};
    double phi_y{0.0};

    void validate() const;
};

enum class StepKind { Linear, Gluing, Transversal };

struct StepResult {
    Vec2 point;
    StepKind kind;
};

// Two-parameter family with a linear saddle block on the chart box [-2,2]^2,
// a composite gluing return near the critical point and a composite
// transversal return near q2. All phase-space quantities are in chart
// coordinates.
class UnfoldingModel {
public:
    virtual ~UnfoldingModel() = default;

    virtual std::string backend_name() const = 0;

    virtual double lambda(const Params& p) const = 0;
    virtual double mu(const Params& p) const = 0;
    virtual double dlambda_dt(const Params& p) const = 0;
    virtual double dlambda_da(const Params& p) const = 0;
    virtual double dmu_dt(const Params& p) const = 0;
    virtual double dmu_da(const Params& p) const = 0;

    virtual int gluing_steps() const = 0;       // N
    virtual int transversal_steps() const = 0;  // M
    virtual ParamWindow window() const = 0;

    Box q_domain() const { return {{-2.0, -2.0}, {2.0, 2.0}}; }

    // k forward linear iterates inside the chart (k < 0 pulls back).
    virtual Vec2 apply_linear(const Params& p, Vec2 q, int k) const;
    virtual Mat2 linear_jacobian(const Params& p, int k) const;

    virtual Vec2 apply_gluing(const Params& p, Vec2 q) const = 0;
    virtual Mat2 gluing_jacobian(const Params& p, Vec2 q) const = 0;
    virtual Hess2 gluing_hessian(const Params& p, Vec2 q) const = 0;

    // Exact image offset G(base + d) - G(base); overridden where the naive
    // difference would cancel catastrophically.
    virtual Vec2 gluing_difference(const Params& p, Vec2 base, Vec2 d) const;
    virtual Vec2 transversal_difference(const Params& p, Vec2 base, Vec2 d) const;
    Vec2 step_difference(const Params& p, Vec2 base, Vec2 d, StepKind kind) const;


    virtual Vec2 apply_transversal(const Params& p, Vec2 q) const = 0;
    virtual Mat2 transversal_jacobian(const Params& p, Vec2 q) const = 0;
    virtual Hess2 transversal_hessian(const Params& p, Vec2 q) const = 0;

    virtual Box gluing_window_box() const;
    virtual Box transversal_window_box() const;
    bool in_gluing_window(const Vec2& q) const { return gluing_window_box().contains(q); }
    bool in_transversal_window(const Vec2& q) const {
        return transversal_window_box().contains(q);
    }

    // Largest seed offset along the local unstable axis at the critical point
    // for which the composite returns stay valid.
    virtual double max_seed_offset() const { return 0.24; }

    // One composite step with window dispatch; throws NumericError on escape.
    StepResult step(const Params& p, Vec2 q) const;
    Mat2 step_jacobian(const Params& p, Vec2 q, StepKind kind) const;
    Hess2 step_hessian(const Params& p, Vec2 q, StepKind kind) const;
    Jet2 step_jet(const Params& p, const Jet2& j, StepKind* kind_out = nullptr) const;

    // Height c(x,t,a) of the critical curve Gamma near the critical point.
    virtual double critical_height(const Params& p, double x) const = 0;
    Vec2 critical_point(const Params& p) const { return {0.0, critical_height(p, 0.0)}; }
    virtual Vec2 critical_value(const Params& p) const;

    // Height of the transversal homoclinic point q2 on the local unstable axis,
    // which seeds the stable-manifold pullbacks.
    virtual double seed_height(const Params& p) const = 0;
    // Window-dispatch center for the transversal return; parameter independent.
    virtual double transversal_window_center() const { return seed_height(Params{}); }
    PlaneCurve seed_stable_curve(const Params& p, std::size_t samples = 512) const;

    // Half-extent of the x-range on which critical_height is defined.
    virtual double gamma_half_width() const { return 0.5; }

    // Validates window-level invariants ((F3), derivative signs). Throws.
    void validate_eigen_conditions() const;
};

using ModelPtr = std::shared_ptr<const UnfoldingModel>;

// Theta and alpha selection satisfying the spectral inequalities.
struct ThetaSelection {
    double theta{0.0};
    double alpha{0.0};
    double theta0{0.0};
    double theta1{0.0};

    // Real theta-phase exponent: the diagonal linear block embeds in the flow
    // diag(lambda^s, mu^s), so the geometric layer uses the exact exponent.
    double theta_exponent(int n) const { return theta * n; }
    // Integer count used by the combinatorial layer (chains, windings).
    int theta_steps(int n) const { return static_cast<int>(std::lround(theta * n)); }
};

} // namespace unfold
