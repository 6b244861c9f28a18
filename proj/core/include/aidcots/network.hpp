#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "aidcots/errors.hpp"

namespace aidcots {

enum class BusKind : std::uint8_t { Slack, PV, PQ };

/// All quantities per-unit on the system base unless stated otherwise.
struct Bus {
    int id = 0;  // external label from the case file
    BusKind kind = BusKind::PQ;
    double p_demand = 0.0;
    double q_demand = 0.0;
    double g_shunt = 0.0;
    double b_shunt = 0.0;
    double v_min = 0.9;
    double v_max = 1.1;
    double v_setpoint = 1.0;  // used at PV and slack buses
    double a_setpoint = 0.0;  // reference angle, radians (slack)
};

struct Branch {
    int from_bus = 0;  // external bus ids
    int to_bus = 0;
    double r = 0.0;
    double x = 0.0;
    double b_charge = 0.0;  // total line-charging susceptance
    double tap = 1.0;       // off-nominal turns ratio, 1.0 when absent
    double shift = 0.0;     // phase shift, radians
    double rate_a = 0.0;    // apparent-power limit, p.u.
    bool in_service = true;
    bool switchable = true;

    std::complex<double> series_admittance() const { return 1.0 / std::complex<double>(r, x); }
    /// Susceptance used by the DC flow model, tap-adjusted: 1/(x*tap).
    double dc_susceptance() const { return 1.0 / (x * tap); }
};

struct Generator {
    int bus = 0;  // external bus id
    double p_min = 0.0, p_max = 0.0;
    double q_min = 0.0, q_max = 0.0;
    // c0 + c1*P + c2*P^2 with P in MW, cost in $/h.
    double cost_c0 = 0.0, cost_c1 = 0.0, cost_c2 = 0.0;
    bool in_service = true;
    double v_setpoint = 1.0;

    double cost_at_mw(double p_mw) const { return cost_c0 + cost_c1 * p_mw + cost_c2 * p_mw * p_mw; }
};

using SwitchMask = std::vector<std::uint8_t>;

/// Immutable grid description. Buses, branches and generators keep the case
/// file order; branch indices reported to users are 1-based file positions.
class Network {
public:
    Network(double base_mva, std::vector<Bus> buses, std::vector<Branch> branches,
            std::vector<Generator> generators, std::string name = "");

    const std::string& name() const noexcept { return name_; }
    double base_mva() const noexcept { return base_mva_; }

    std::size_t bus_count() const noexcept { return buses_.size(); }
    std::size_t branch_count() const noexcept { return branches_.size(); }
    std::size_t generator_count() const noexcept { return generators_.size(); }

    const std::vector<Bus>& buses() const noexcept { return buses_; }
    const std::vector<Branch>& branches() const noexcept { return branches_; }
    const std::vector<Generator>& generators() const noexcept { return generators_; }

    const Bus& bus(int dense) const { return buses_.at(static_cast<std::size_t>(dense)); }
    const Branch& branch(int dense) const { return branches_.at(static_cast<std::size_t>(dense)); }

    /// Dense index of an external bus id; throws if unknown.
    int bus_index(int external_id) const;
    int slack_index() const noexcept { return slack_index_; }

    /// Dense endpoint indices of branch l.
    int from_index(int branch) const { return from_idx_[static_cast<std::size_t>(branch)]; }
    int to_index(int branch) const { return to_idx_[static_cast<std::size_t>(branch)]; }

    /// Generators attached to a dense bus index.
    const std::vector<int>& generators_at(int dense_bus) const {
        return gens_at_bus_[static_cast<std::size_t>(dense_bus)];
    }

    /// Mask of length L with every in-service branch closed.
    SwitchMask all_closed() const;

    /// Effective closed state of branch l under a mask: closed and in service.
    bool branch_active(int branch, std::span<const std::uint8_t> mask) const {
        return branches_[static_cast<std::size_t>(branch)].in_service &&
               mask[static_cast<std::size_t>(branch)] != 0;
    }

    /// Connected components of the bus graph under a switching mask.
    std::vector<std::vector<int>> components(std::span<const std::uint8_t> mask) const;
    bool is_connected(std::span<const std::uint8_t> mask) const;

    /// Branch indices that are bridges of the fully closed in-service graph.
    /// Opening one of them necessarily disconnects the network.
    std::vector<int> bridges() const;

    double total_p_demand() const noexcept { return total_p_demand_; }

private:
    std::string name_;
    double base_mva_;
    std::vector<Bus> buses_;
    std::vector<Branch> branches_;
    std::vector<Generator> generators_;
    std::unordered_map<int, int> bus_index_;
    std::vector<int> from_idx_, to_idx_;
    std::vector<std::vector<int>> gens_at_bus_;
    int slack_index_ = -1;
    double total_p_demand_ = 0.0;
};

}  // namespace aidcots
