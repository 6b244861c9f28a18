#include "aidcots/json_io.hpp"

namespace aidcots {

namespace {

const char* kind_name(BusKind k) {
    switch (k) {
        case BusKind::Slack: return "slack";
        case BusKind::PV: return "pv";
        case BusKind::PQ: return "pq";
    }
    return "?";
}

BusKind kind_from(const std::string& s) {
    if (s == "slack") return BusKind::Slack;
    if (s == "pv") return BusKind::PV;
    if (s == "pq") return BusKind::PQ;
    throw Error("unknown bus kind: " + s);
}

}  // namespace

Json network_to_json(const Network& net) {
    Json j;
    j["name"] = net.name();
    j["base_mva"] = net.base_mva();
    j["buses"] = Json::array();
    for (const Bus& b : net.buses()) {
        j["buses"].push_back({{"id", b.id},
                              {"kind", kind_name(b.kind)},
                              {"p_demand", b.p_demand},
                              {"q_demand", b.q_demand},
                              {"g_shunt", b.g_shunt},
                              {"b_shunt", b.b_shunt},
                              {"v_min", b.v_min},
                              {"v_max", b.v_max},
                              {"v_setpoint", b.v_setpoint},
                              {"a_setpoint", b.a_setpoint}});
    }
    j["branches"] = Json::array();
    for (const Branch& br : net.branches()) {
        j["branches"].push_back({{"from_bus", br.from_bus},
                                 {"to_bus", br.to_bus},
                                 {"r", br.r},
                                 {"x", br.x},
                                 {"b_charge", br.b_charge},
                                 {"tap", br.tap},
                                 {"shift", br.shift},
                                 {"rate_a", br.rate_a},
                                 {"in_service", br.in_service},
                                 {"switchable", br.switchable}});
    }
    j["generators"] = Json::array();
    for (const Generator& g : net.generators()) {
        j["generators"].push_back({{"bus", g.bus},
                                   {"p_min", g.p_min},
                                   {"p_max", g.p_max},
                                   {"q_min", g.q_min},
                                   {"q_max", g.q_max},
                                   {"cost", Json::array({g.cost_c0, g.cost_c1, g.cost_c2})},
                                   {"in_service", g.in_service},
                                   {"v_setpoint", g.v_setpoint}});
    }
    return j;
}

Network network_from_json(const Json& j) {
    std::vector<Bus> buses;
    for (const Json& bj : j.at("buses")) {
        Bus b;
        b.id = bj.at("id").get<int>();
        b.kind = kind_from(bj.at("kind").get<std::string>());
        b.p_demand = bj.at("p_demand").get<double>();
        b.q_demand = bj.at("q_demand").get<double>();
        b.g_shunt = bj.at("g_shunt").get<double>();
        b.b_shunt = bj.at("b_shunt").get<double>();
        b.v_min = bj.at("v_min").get<double>();
        b.v_max = bj.at("v_max").get<double>();
        b.v_setpoint = bj.at("v_setpoint").get<double>();
        b.a_setpoint = bj.at("a_setpoint").get<double>();
        buses.push_back(b);
    }
    std::vector<Branch> branches;
    for (const Json& brj : j.at("branches")) {
        Branch br;
        br.from_bus = brj.at("from_bus").get<int>();
        br.to_bus = brj.at("to_bus").get<int>();
        br.r = brj.at("r").get<double>();
        br.x = brj.at("x").get<double>();
        br.b_charge = brj.at("b_charge").get<double>();
        br.tap = brj.at("tap").get<double>();
        br.shift = brj.at("shift").get<double>();
        br.rate_a = brj.at("rate_a").get<double>();
        br.in_service = brj.at("in_service").get<bool>();
        br.switchable = brj.at("switchable").get<bool>();
        branches.push_back(br);
    }
    std::vector<Generator> gens;
    for (const Json& gj : j.at("generators")) {
        Generator g;
        g.bus = gj.at("bus").get<int>();
        g.p_min = gj.at("p_min").get<double>();
        g.p_max = gj.at("p_max").get<double>();
        g.q_min = gj.at("q_min").get<double>();
        g.q_max = gj.at("q_max").get<double>();
        g.cost_c0 = gj.at("cost").at(0).get<double>();
        g.cost_c1 = gj.at("cost").at(1).get<double>();
        g.cost_c2 = gj.at("cost").at(2).get<double>();
        g.in_service = gj.at("in_service").get<bool>();
        g.v_setpoint = gj.at("v_setpoint").get<double>();
        gens.push_back(g);
    }
    return Network(j.at("base_mva").get<double>(), std::move(buses), std::move(branches),
                   std::move(gens), j.value("name", "case"));
}

Json report_to_json(const ACEvalReport& rep) {
    Json j;
    j["feasible"] = rep.feasible;
    j["converged"] = rep.converged;
    j["approx_cost"] = rep.total_gen_cost;
    j["losses"] = rep.losses;
    j["violations"] = Json::array();
    for (const Violation& v : rep.violations) {
        j["violations"].push_back(
            {{"kind", to_string(v.kind)}, {"entity", v.entity}, {"magnitude", v.magnitude}});
    }
    j["dispatch"] = rep.dispatch;
    return j;
}

Json solution_to_json(const OTSSolution& sol) {
    Json j;
    switch (sol.status) {
        case OTSSolution::Status::Optimal: j["status"] = "optimal"; break;
        case OTSSolution::Status::TimeLimit: j["status"] = "time_limit"; break;
        case OTSSolution::Status::Infeasible: j["status"] = "infeasible"; break;
    }
    j["model_cost"] = sol.model_cost;
    j["lines_opened"] = sol.opened_lines_1based();
    j["gap"] = sol.gap;
    j["disconnects_network"] = sol.disconnects_network;
    j["dispatch"] = sol.p_gen;
    return j;
}

}  // namespace aidcots
