#pragma once

#include "unfold/model.hpp"
#include "unfold/plane_curve.hpp"

namespace unfold {

enum class ParamDirection { T, A };

// Pullback W_n of a seed stable graph W: W_n(x) = mu^{-n} W(lambda^n x).
struct StableWedge {
    int n{0};
    PlaneCurve curve;
    double sup_abs{0.0};
};

StableWedge pullback_stable(const PlaneCurve& seed, int n, const UnfoldingModel& model,
                            const Params& p, std::size_t samples = 512);

// Closed-form parameter derivative of W_n as a graph, with the seed's own
// parameter dependence supplied by the caller (zero by default).
PlaneCurve stable_speed(const PlaneCurve& seed, int n, const UnfoldingModel& model,
                        const Params& p, ParamDirection dir,
                        const PlaneCurve* seed_param_derivative = nullptr,
                        std::size_t samples = 512);

// The critical curve Gamma as a graph over x in [-x0, x0].
PlaneCurve gamma_curve(const UnfoldingModel& model, const Params& p,
                       std::size_t samples = 256);

// Gamma_n, the n-step linear preimage of Gamma, as a graph.
PlaneCurve gamma_preimage(const UnfoldingModel& model, const Params& p, int n,
                          std::size_t samples = 256);

} // namespace unfold
