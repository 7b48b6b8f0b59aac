#pragma once

#include <cstdint>
#include <string>

#include "unfold/model.hpp"

namespace unfold {

// Everything the tools need to reproduce a run.
struct RunConfig {
    std::string backend{"ideal"};
    double lambda0{0.01};
    double mu0{3.0};
    GluingMap gluing{};
    int n_steps{1};
    int m_steps{1};
    ParamWindow window{0.19, 0.05};
    double q2_height{1.5};
    double henon_b{0.001};

    // search / scan knobs
    int theta_grid{10000};
    double seed_scale{10.0};    // the constant L sizing local unstable segments
    int kappa{1};               // wedge offset targeted by the tangency search
    double eps_strip{0.1};      // epsilon in the tangency strip bounds
    double big_t_strip{100.0};  // T in the tangency strip bounds
    int generations{3};
    std::uint64_t seed{12345};

    std::string to_json() const;
    static RunConfig from_json(const std::string& text);
    static RunConfig load(const std::string& path);

    // FNV-1a hash of the canonical serialization.
    std::uint64_t hash() const;
};

ModelPtr build_model(const RunConfig& cfg);

} // namespace unfold
