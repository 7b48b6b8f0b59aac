#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "unfold/critical_orbit.hpp"
#include "unfold/model.hpp"

namespace unfold {

// The curve a_n(t) along which the critical value returns to the critical
// curve after n linear iterates.
class ReturnCurve {
public:
    ReturnCurve(ModelPtr model, int n) : model_(std::move(model)), n_(n) {}

    int n() const { return n_; }
    double eval(double t) const { return solve_return_a(*model_, n_, t); }
    double deriv(double t) const;
    // |mu^n z_y - c(lambda^n z_x)| at the solved point.
    double residual(double t) const;

private:
    ModelPtr model_;
    int n_;
};

// The parameter strip B_n that confines the secondary tangency curves.
struct TangencyStrip {
    int n{0};
    int n0_ref{0};
    double eps{0.1};
    double T_const{100.0};
    double C_const{1.0};
    double E_const{0.0};
    double theta{0.0};
    ModelPtr model;

    double a_center(double t) const { return solve_return_a(*model, n, t); }
    double lower(double t) const;
    double upper(double t) const;
    bool contains(double t, double a) const;
    // Fitted constant for the abstract r-strip width bound with rho = 1/mu_max.
    double width_constant(double rho, double alpha) const;
};

TangencyStrip make_strip(ModelPtr model, const ThetaSelection& theta, int n, int n0_ref,
                         double eps = 0.1, double T = 100.0);

struct TangencyCertificate {
    double t_star{0.0};
    double a_star{0.0};
    int n0{0};           // tangency type
    int level{0};        // wedge index n - n0
    double residual{0.0};
    double dg_dt{0.0};
    double curvature{0.0};
    double distance{0.0};  // |t_star - t_start|
};

// Walks t along a_n and brackets the vertical gap between z3 and the target
// wedge. kappa > 0 targets type n0* + kappa above the current configuration,
// kappa <= 0 targets type n0* + kappa by moving down.
TangencyCertificate find_secondary_tangency(const ModelPtr& model,
                                            const ThetaSelection& theta,
                                            const TangencyStrip& strip, double t_start,
                                            int kappa, bool integer_theta = false);

// Tries kappa in {+1, 0} and returns the closer tangency.
TangencyCertificate find_nearest_tangency(const ModelPtr& model,
                                          const ThetaSelection& theta,
                                          const TangencyStrip& strip, double t_start,
                                          bool integer_theta = false);

// A continued curve of secondary tangencies of fixed type.
struct TangencyCurveB {
    int n{0};
    int n0{0};
    bool integer_theta{false};
    std::vector<double> ts;
    std::vector<double> as;
    std::vector<double> us;       // seed offsets of the tangency point
    std::vector<double> res1;     // vertical coincidence residuals
    std::vector<double> res2;     // slope coincidence residuals
    double window_halfwidth{0.0}; // half-width of the unfolding neighborhood U
    bool complete{false};

    double eval(double t) const;   // linear interpolation between samples
    double slope(double t) const;  // finite difference on neighboring samples
    std::size_t nearest_index(double t) const;
};

TangencyCurveB continue_tangency_curve(const ModelPtr& model, const ThetaSelection& theta,
                                       const TangencyCertificate& seed,
                                       const TangencyStrip& strip, double L = 10.0,
                                       bool integer_theta = false);

// A model view renormalized around a continued tangency curve: same saddle and
// eigenvalues, gluing given by the full secondary loop, parameters (t, a-hat)
// with the critical value height equal to a-hat.
class RenormalizedModel final : public UnfoldingModel {
public:
    RenormalizedModel(ModelPtr parent, ThetaSelection theta, TangencyCurveB curve,
                      double window_halfwidth);

    std::string backend_name() const override { return "renormalized"; }

    double lambda(const Params& p) const override;
    double mu(const Params& p) const override;
    double dlambda_dt(const Params& p) const override;
    double dlambda_da(const Params& p) const override;
    double dmu_dt(const Params& p) const override;
    double dmu_da(const Params& p) const override;

    int gluing_steps() const override { return chain_steps_; }
    int transversal_steps() const override { return parent_->transversal_steps(); }
    ParamWindow window() const override;

    Vec2 apply_gluing(const Params& p, Vec2 q) const override;
    Mat2 gluing_jacobian(const Params& p, Vec2 q) const override;
    Hess2 gluing_hessian(const Params& p, Vec2 q) const override;
    Vec2 gluing_difference(const Params& p, Vec2 base, Vec2 d) const override;

    Vec2 apply_transversal(const Params& p, Vec2 q) const override;
    Mat2 transversal_jacobian(const Params& p, Vec2 q) const override;
    Hess2 transversal_hessian(const Params& p, Vec2 q) const override;

    Box gluing_window_box() const override;
    Box transversal_window_box() const override;
    double max_seed_offset() const override;

    double critical_height(const Params& p, double x) const override;
    Vec2 critical_value(const Params& p) const override;
    double seed_height(const Params& p) const override;
    double transversal_window_center() const override;
    double gamma_half_width() const override;

    // Maps renormalized parameters to parent parameters.
    Params parent_params(const Params& p) const;
    // Winding counts of the loop: (l_low, theta_n, n, climb-slot, l_up).
    struct Winding {
        int l_low{0};
        int theta_n{0};
        int n{0};
        int slot{0};
        int l_up{0};
        int n0_type{0};
    };
    const Winding& winding() const { return winding_; }
    const TangencyCurveB& curve() const { return curve_; }
    const ModelPtr& parent() const { return parent_; }

    // The realized field value of the unfolding condition dz_y/da at a-hat=0.
    double unfolding_derivative(double t) const;

    Jet2 chain_jet(const Params& parent_p, const Jet2& seed) const;

private:
    struct Scales {
        double sy{1.0};
        double sx{1.0};
        double c_height{1.0};
    };
    Scales scales(const Params& parent_p) const;
    struct ChainBase {
        std::vector<Vec2> orbit;       // chain orbit of the critical seed point
        std::vector<StepKind> kinds;
        Scales sc;
        Vec2 z_end;                    // chain end, height pinned by the chart
    };
    const ChainBase& chain_base(const Params& p, const Params& parent_p) const;
    double raw_critical_offset(const Params& parent_p) const;  // u* of the chain minimum
    double raw_z_y(const Params& parent_p) const;

    ModelPtr parent_;
    ThetaSelection theta_;
    TangencyCurveB curve_;
    double window_halfwidth_;
    Winding winding_;
    int chain_steps_{0};
    double seed_window_{0.1};
    mutable std::vector<std::pair<Params, ChainBase>> base_cache_;
    mutable std::vector<std::pair<Params, Params>> param_cache_;
};

using RenormalizedPtr = std::shared_ptr<const RenormalizedModel>;

RenormalizedPtr renormalize(ModelPtr parent, const ThetaSelection& theta,
                            const TangencyCurveB& curve, double window_halfwidth);

// One induction step: child tangency strips inside a parent strip, each with a
// certified descendant curve.
struct StripChild {
    TangencyStrip strip;
    TangencyCertificate certificate;
    TangencyCurveB curve;
    RenormalizedModel::Winding winding;
};

struct StripRecursion {
    ModelPtr child_model;  // the model the children live on
    std::vector<StripChild> children;
};

// First application of the induction: children of the primary tangency line
// a = 0 inside the trivial strip.
StripRecursion strip_recursion_primary(const ModelPtr& model, const ThetaSelection& theta,
                                       int n_base, int depth_budget,
                                       bool integer_theta = false);

// Deeper application around a continued secondary-tangency curve, through the
// renormalized view.
StripRecursion strip_recursion(const ModelPtr& model, const ThetaSelection& theta,
                               const TangencyCurveB& parent, int depth_budget);

} // namespace unfold
