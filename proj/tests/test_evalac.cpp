#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aidcots/ac_eval.hpp"
#include "aidcots/json_io.hpp"
#include "support/fixtures.hpp"

using namespace aidcots;
using namespace aidcots::testing;

TEST_CASE("redispatch on the full case14 topology") {
    const Network net = load_case14();
    const std::vector<double> d = redispatch_dc(net, net.all_closed());
    double total = 0.0, cost = 0.0;
    for (std::size_t g = 0; g < d.size(); ++g) {
        total += d[g];
        cost += net.generators()[g].cost_at_mw(d[g] * net.base_mva());
    }
    CHECK(total == doctest::Approx(net.total_p_demand()).epsilon(1e-8));
    // lossless dispatch cost sits below the ac baseline of 2178.08
    CHECK(cost < 2178.08);
}

TEST_CASE("single-generator network dispatches the whole demand") {
    const Network net = parse_matpower(kTwoBusCase);
    const std::vector<double> d = redispatch_dc(net, net.all_closed());
    CHECK(d[0] == doctest::Approx(0.1));
}

TEST_CASE("demand above capacity is infeasible") {
    std::string text = kTwoBusCase;
    const auto pos = text.find("2 1 10.0");
    std::string replaced = text;
    replaced.replace(pos, 8, "2 1 99.0");  // demand 99 MW vs pmax 50
    const Network net = parse_matpower(replaced);
    CHECK_THROWS_AS(redispatch_dc(net, net.all_closed()), InfeasibleError);
}

TEST_CASE("base case14 topology evaluates feasible") {
    const Network net = load_case14();
    const ACEvalReport rep = evaluate_topology(net, net.all_closed());
    CHECK(rep.converged);
    CHECK(rep.violations.empty());
    CHECK(rep.feasible);
    CHECK(rep.losses >= 0.0);
    CHECK(rep.total_gen_cost > 0.0);
}

TEST_CASE("reported dispatch balances demand plus losses") {
    const Network net = load_case14();
    const ACEvalReport rep = evaluate_topology(net, net.all_closed());
    REQUIRE(rep.feasible);
    double total = 0.0;
    for (double p : rep.dispatch) total += p;
    CHECK(total == doctest::Approx(net.total_p_demand() + rep.losses).epsilon(1e-6));
}

TEST_CASE("published dc-ots topology for case14 is ac-infeasible") {
    const Network net = load_case14();
    SwitchMask mask = net.all_closed();
    for (int l : {3, 5, 9, 11, 14, 19, 20}) mask[static_cast<std::size_t>(l - 1)] = 0;
    const ACEvalReport rep = evaluate_topology(net, mask);
    CHECK_FALSE(rep.feasible);
}

TEST_CASE("islanded load bus is reported structurally") {
    const Network net = parse_matpower(kTriangleCase);
    SwitchMask mask = net.all_closed();
    mask[1] = 0;  // (1,3)
    mask[2] = 0;  // (2,3): bus 3 with its 40 MW load is cut off
    const ACEvalReport rep = evaluate_topology(net, mask);
    CHECK_FALSE(rep.feasible);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].kind == Violation::Kind::Islanded);
    CHECK(rep.violations[0].entity == "bus 3");

    const std::vector<int> islanded = islanded_load_buses(net, mask);
    REQUIRE(islanded.size() == 1);
    CHECK(islanded[0] == 2);
}

TEST_CASE("islanding a zero-load bus is tolerated") {
    const Network net = load_case14();
    SwitchMask mask = net.all_closed();
    mask[13] = 0;  // bus 8 has no demand, only a condenser
    CHECK(islanded_load_buses(net, mask).empty());
    const ACEvalReport rep = evaluate_topology(net, mask);
    CHECK(rep.converged);  // power flow runs on the remaining component
}

TEST_CASE("structural islanding is monotone under further opening") {
    const Network net = parse_matpower(kTriangleCase);
    SwitchMask mask = net.all_closed();
    mask[1] = 0;
    mask[2] = 0;
    const std::vector<int> before = islanded_load_buses(net, mask);
    mask[0] = 0;  // open one more line
    const std::vector<int> after = islanded_load_buses(net, mask);
    for (int b : before) {
        CHECK(std::find(after.begin(), after.end(), b) != after.end());
    }
}

TEST_CASE("evaluation is deterministic") {
    const Network net = load_case30();
    SwitchMask mask = net.all_closed();
    mask[2] = 0;
    mask[4] = 0;
    const ACEvalReport a = evaluate_topology(net, mask);
    const ACEvalReport b = evaluate_topology(net, mask);
    CHECK(a.feasible == b.feasible);
    CHECK(a.total_gen_cost == b.total_gen_cost);
    CHECK(a.losses == b.losses);
    CHECK(report_to_json(a).dump() == report_to_json(b).dump());
}

TEST_CASE("report serializes with stable field names") {
    const Network net = load_case14();
    const ACEvalReport rep = evaluate_topology(net, net.all_closed());
    const Json j = report_to_json(rep);
    for (const char* key :
         {"feasible", "converged", "approx_cost", "losses", "violations", "dispatch"}) {
        CHECK(j.contains(key));
    }
}
