#pragma once

#include <json.hpp>

#include "tower.hpp"

namespace holoweld {

inline nlohmann::json tower_to_json(const TowerModel& m) {
    nlohmann::json j;
    j["D"] = m.D;
    j["seed"] = m.seed;
    j["eps_targets"] = m.eps_targets;
    j["rng"] = Rng::name();
    auto& levels = j["levels"] = nlohmann::json::array();
    for (const auto& lv : m.levels) {
        nlohmann::json jl;
        jl["a"] = lv.a;
        auto& classes = jl["classes"] = nlohmann::json::array();
        for (const auto& cl : lv.classes) {
            nlohmann::json jc;
            jc["mass"] = cl.mass;
            auto& fibers = jc["fibers"] = nlohmann::json::array();
            for (const auto& f : cl.fibers)
                fibers.push_back({{"weight", f.weight},
                                  {"jitter", {f.jitter.real(), f.jitter.imag()}}});
            jc["C"] = cl.config.C;
            auto& pts = jc["points"] = nlohmann::json::array();
            for (cplx p : cl.config.points) pts.push_back({p.real(), p.imag()});
            jc["labels"] = cl.config.labels;
            classes.push_back(std::move(jc));
        }
        levels.push_back(std::move(jl));
    }
    return j;
}

inline TowerModel tower_from_json(const nlohmann::json& j) {
    TowerModel m;
    m.D = j.at("D").get<double>();
    m.seed = j.value("seed", 0ULL);
    m.eps_targets = j.value("eps_targets", std::vector<double>{});
    for (const auto& jl : j.at("levels")) {
        TowerLevel lv;
        lv.a = jl.at("a").get<double>();
        for (const auto& jc : jl.at("classes")) {
            TowerClass cl;
            cl.mass = jc.at("mass").get<double>();
            for (const auto& jf : jc.at("fibers")) {
                TowerFiber f;
                f.weight = jf.at("weight").get<double>();
                f.jitter = {jf.at("jitter")[0].get<double>(), jf.at("jitter")[1].get<double>()};
                cl.fibers.push_back(f);
            }
            cl.config.C = jc.value("C", 1.0);
            for (const auto& jp : jc.at("points"))
                cl.config.points.push_back({jp[0].get<double>(), jp[1].get<double>()});
            cl.config.labels = jc.value("labels", std::vector<int>{});
            lv.classes.push_back(std::move(cl));
        }
        m.levels.push_back(std::move(lv));
    }
    if (m.eps_targets.empty()) m.eps_targets.assign(m.levels.size(), 0.01);
    m.validate();
    return m;
}

} // namespace holoweld
