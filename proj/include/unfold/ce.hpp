#pragma once

#include <vector>

#include "unfold/model.hpp"
#include "unfold/partition.hpp"

namespace unfold {

// Cone-field constants for the derivative growth condition.
struct ConeSpec {
    double angle{0.2};  // half-angle of the vertical cone, radians
    double C{0.01};
    double rho{1.05};

    // Checks cos(angle) > rho/mu and 1 < rho < lambda^theta mu^2 < mu.
    void validate(const UnfoldingModel& model, const ThetaSelection& theta) const;
};

struct CEReport {
    int T{0};
    double worst_margin{0.0};  // min over vectors and times of |Df^s v| / (C rho^s |v|)
    int worst_step{0};
    bool cone_return{false};
    std::vector<Vec2> field_samples;  // the contracted field X(f^T) near the base point

    bool valid() const { return worst_margin >= 1.0 && cone_return; }
};

// Finite Collet-Eckmann certificate along the orbit of x over T composite steps.
CEReport verify_tce(const UnfoldingModel& model, const ThetaSelection& theta,
                    const ConeSpec& cone, const Params& p, Vec2 x, int T,
                    int samples = 64);

struct InductionReport {
    double linearity_error{0.0};  // IH_Q
    double K{0.0};                // measured two-sided constant, inflated 2x
    double angle_ratio_min{0.0};
    double angle_ratio_max{0.0};
    double family_bound{0.0};     // sup of |DG|, |D2G| over the pieces
    bool hypotheses_ok{true};
    std::vector<std::string> failures;
};

// Numerically validates the induction hypotheses on a realized base partition.
InductionReport check_induction_hypotheses(const UnfoldingModel& model,
                                           const ThetaSelection& theta,
                                           const ConeSpec& cone,
                                           const PartitionRealization& base,
                                           const Params& p);

// The displayed step-5 growth inequality instantiated with a measured K.
bool ce_step5_inequality(const UnfoldingModel& model, const ThetaSelection& theta,
                         const ConeSpec& cone, double K, const Params& p, int n, int k);

// Smallest depth n at which all step inequalities of the induction hold.
int ce_min_depth(const UnfoldingModel& model, const ThetaSelection& theta,
                 const ConeSpec& cone, double K, const Params& p);

} // namespace unfold
