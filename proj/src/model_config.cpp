#include "unfold/model_config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "unfold/errors.hpp"
#include "unfold/henon.hpp"
#include "unfold/ideal_model.hpp"

namespace unfold {

using nlohmann::json;

std::string RunConfig::to_json() const {
    json j;
    j["backend"] = backend;
    j["lambda0"] = lambda0;
    j["mu0"] = mu0;
    j["gluing"] = {{"A", gluing.A}, {"B", gluing.B}, {"C", gluing.C},
                   {"E", gluing.E}, {"F", gluing.F}, {"Q", gluing.Q}};
    j["N"] = n_steps;
    j["M"] = m_steps;
    j["window"] = {{"t0", window.t0}, {"a0", window.a0}};
    j["q2_height"] = q2_height;
    j["henon_b"] = henon_b;
    j["theta_grid"] = theta_grid;
    j["seed_scale"] = seed_scale;
    j["kappa"] = kappa;
    j["eps_strip"] = eps_strip;
    j["T_strip"] = big_t_strip;
    j["generations"] = generations;
    j["seed"] = seed;
    return j.dump(2);
}

RunConfig RunConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("config: invalid JSON: ") + e.what());
    }
    RunConfig cfg;
    cfg.backend = j.value("backend", cfg.backend);
    cfg.lambda0 = j.value("lambda0", cfg.lambda0);
    cfg.mu0 = j.value("mu0", cfg.mu0);
    if (j.contains("gluing")) {
        const auto& g = j["gluing"];
        cfg.gluing.A = g.value("A", cfg.gluing.A);
        cfg.gluing.B = g.value("B", cfg.gluing.B);
        cfg.gluing.C = g.value("C", cfg.gluing.C);
        cfg.gluing.E = g.value("E", cfg.gluing.E);
        cfg.gluing.F = g.value("F", cfg.gluing.F);
        cfg.gluing.Q = g.value("Q", cfg.gluing.Q);
    }
    cfg.n_steps = j.value("N", cfg.n_steps);
    cfg.m_steps = j.value("M", cfg.m_steps);
    if (j.contains("window")) {
        cfg.window.t0 = j["window"].value("t0", cfg.window.t0);
        cfg.window.a0 = j["window"].value("a0", cfg.window.a0);
    }
    cfg.q2_height = j.value("q2_height", cfg.q2_height);
    cfg.henon_b = j.value("henon_b", cfg.henon_b);
    cfg.theta_grid = j.value("theta_grid", cfg.theta_grid);
    cfg.seed_scale = j.value("seed_scale", cfg.seed_scale);
    cfg.kappa = j.value("kappa", cfg.kappa);
    cfg.eps_strip = j.value("eps_strip", cfg.eps_strip);
    cfg.big_t_strip = j.value("T_strip", cfg.big_t_strip);
    cfg.generations = j.value("generations", cfg.generations);
    cfg.seed = j.value("seed", cfg.seed);
    if (cfg.backend != "ideal" && cfg.backend != "henon")
        throw ValidationError("config: backend must be \"ideal\" or \"henon\"");
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("config: cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return from_json(ss.str());
}

std::uint64_t RunConfig::hash() const {
    const std::string s = to_json();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

ModelPtr build_model(const RunConfig& cfg) {
    if (cfg.backend == "ideal")
        return make_ideal_model(cfg.lambda0, cfg.mu0, cfg.gluing, cfg.n_steps, cfg.m_steps,
                                cfg.window, cfg.q2_height);
    return make_henon_model(cfg.henon_b);
}

} // namespace unfold
