#pragma once

#include <array>

#include "unfold/model.hpp"

namespace unfold {
namespace henon {

// F_{a,b}(x, y) = (a - x^2 - b y, x).
Vec2 map(double a, double b, Vec2 q);
Mat2 jacobian(double b, Vec2 q);

// The saddle continued from (-2, -2) at (a, b) = (2, 0); Newton-polished.
Vec2 saddle(double a, double b);

// (mu, lambda) with |mu| > |lambda| at the saddle.
std::pair<double, double> eigenvalues(double a, double b);

// Fixed points of the one-dimensional core x -> a - x^2.
std::array<double, 2> core_fixed_points(double a);

// Degree-3 polynomial normal-form chart at the saddle. The chart maps
// straightened coordinates to the plane; the conjugated map is diag(lambda,mu)
// up to a quartic remainder.
struct NormalFormChart {
    Vec2 p;             // the saddle
    double lambda{0.0};
    double mu{0.0};
    // Vec2 coefficient per monomial u^i v^j, i + j <= 3.
    std::array<Vec2, 10> coef{};
    double valid_radius{0.2};

    Vec2 forward(Vec2 xi) const;   // chart coords -> plane
    Mat2 forward_jacobian(Vec2 xi) const;
    Vec2 inverse(Vec2 w) const;    // plane -> chart coords; Newton
};

// Builds the chart, checking the non-resonance gaps |lambda^i mu^j - eig|
// down to the given tolerance.
NormalFormChart build_chart(double a, double b, double resonance_tol = 1e-6);

} // namespace henon

class HenonModel final : public UnfoldingModel {
public:
    explicit HenonModel(double b0);

    std::string backend_name() const override { return "henon"; }

    double lambda(const Params& p) const override;
    double mu(const Params& p) const override;
    double dlambda_dt(const Params& p) const override;
    double dlambda_da(const Params& p) const override;
    double dmu_dt(const Params& p) const override;
    double dmu_da(const Params& p) const override;

    int gluing_steps() const override { return n_steps_; }
    int transversal_steps() const override { return 1; }
    ParamWindow window() const override { return window_; }

    Vec2 apply_gluing(const Params& p, Vec2 q) const override;
    Mat2 gluing_jacobian(const Params& p, Vec2 q) const override;
    Hess2 gluing_hessian(const Params& p, Vec2 q) const override;

    Vec2 apply_transversal(const Params&, Vec2) const override;
    Mat2 transversal_jacobian(const Params&, Vec2) const override;
    Hess2 transversal_hessian(const Params&, Vec2) const override { return Hess2{}; }

    double critical_height(const Params& p, double x) const override;
    double seed_height(const Params&) const override { return 1.5; }
    double transversal_window_center() const override { return 1.5; }
    double gamma_half_width() const override { return 0.05; }

    // Henon parameters realizing the model parameters; a_H solves the
    // critical-value normalization z_y = a.
    std::pair<double, double> henon_params(const Params& p) const;
    // The tangency parameter a*(b(t)) where the critical value height vanishes.
    double tangency_a(double t) const;
    // Residual |dY/dy| of the solved critical curve at chart abscissa x.
    double gamma_residual(const Params& p, double x) const;

    double b0() const { return b0_; }

private:
    struct ChartData {
        henon::NormalFormChart chart;
        int n_steps{0};
        double scale_x{1.0};
        double scale_y{1.0};
        double a_henon{0.0};
        double b_henon{0.0};
    };

    double b_of_t(double t) const;
    // Chart and return structure at given Henon parameters.
    ChartData structure_at(double a_h, double b_h) const;
    // Solves the a-normalization and caches per model parameter.
    const ChartData& data_for(const Params& p) const;

    Vec2 chart_point(const ChartData& d, Vec2 q) const;    // scaled -> plane
    Vec2 chart_coords(const ChartData& d, Vec2 w) const;   // plane -> scaled
    Vec2 return_map(const ChartData& d, Vec2 q) const;
    Mat2 return_jacobian(const ChartData& d, Vec2 q) const;
    double dy_dy(const ChartData& d, double x, double y) const;
    double critical_height_unscaled(const ChartData& d, double x_unscaled) const;

    double b0_;
    int n_steps_{0};
    ParamWindow window_{0.02, 5e-4};
    int t_sign_{1};

    mutable std::vector<std::pair<Params, ChartData>> cache_;
};

// Builds the Henon backend; b must be small enough that the continued saddle
// satisfies the eigenvalue condition.
ModelPtr make_henon_model(double b);

} // namespace unfold
