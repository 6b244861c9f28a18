#include "aidcots/network.hpp"

#include <algorithm>
#include <functional>

namespace aidcots {

Network::Network(double base_mva, std::vector<Bus> buses, std::vector<Branch> branches,
                 std::vector<Generator> generators, std::string name)
    : name_(std::move(name)),
      base_mva_(base_mva),
      buses_(std::move(buses)),
      branches_(std::move(branches)),
      generators_(std::move(generators)) {
    bus_index_.reserve(buses_.size());
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        const Bus& b = buses_[i];
        if (!bus_index_.emplace(b.id, static_cast<int>(i)).second) {
            throw DuplicateBusIdError(b.id);
        }
        if (b.kind == BusKind::Slack) {
            if (slack_index_ >= 0) throw NoSlackBusError(2);
            slack_index_ = static_cast<int>(i);
        }
        total_p_demand_ += b.p_demand;
    }
    if (slack_index_ < 0) throw NoSlackBusError(0);

    from_idx_.reserve(branches_.size());
    to_idx_.reserve(branches_.size());
    for (const Branch& br : branches_) {
        if (br.from_bus == br.to_bus) {
            throw Error("branch connects bus " + std::to_string(br.from_bus) + " to itself");
        }
        if (br.x == 0.0) {
            throw Error("branch " + std::to_string(br.from_bus) + "-" + std::to_string(br.to_bus) +
                        " has zero reactance");
        }
        from_idx_.push_back(bus_index(br.from_bus));
        to_idx_.push_back(bus_index(br.to_bus));
    }

    gens_at_bus_.resize(buses_.size());
    for (std::size_t g = 0; g < generators_.size(); ++g) {
        int bi = bus_index(generators_[g].bus);
        gens_at_bus_[static_cast<std::size_t>(bi)].push_back(static_cast<int>(g));
    }
}

int Network::bus_index(int external_id) const {
    auto it = bus_index_.find(external_id);
    if (it == bus_index_.end()) {
        throw Error("unknown bus id " + std::to_string(external_id));
    }
    return it->second;
}

SwitchMask Network::all_closed() const {
    SwitchMask mask(branches_.size(), 0);
    for (std::size_t l = 0; l < branches_.size(); ++l) {
        mask[l] = branches_[l].in_service ? 1 : 0;
    }
    return mask;
}

std::vector<std::vector<int>> Network::components(std::span<const std::uint8_t> mask) const {
    const int n = static_cast<int>(buses_.size());
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (std::size_t l = 0; l < branches_.size(); ++l) {
        if (!branch_active(static_cast<int>(l), mask)) continue;
        adj[static_cast<std::size_t>(from_idx_[l])].push_back(to_idx_[l]);
        adj[static_cast<std::size_t>(to_idx_[l])].push_back(from_idx_[l]);
    }
    std::vector<std::vector<int>> comps;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack;
    for (int s = 0; s < n; ++s) {
        if (seen[static_cast<std::size_t>(s)]) continue;
        comps.emplace_back();
        stack.push_back(s);
        seen[static_cast<std::size_t>(s)] = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            comps.back().push_back(u);
            for (int v : adj[static_cast<std::size_t>(u)]) {
                if (!seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = 1;
                    stack.push_back(v);
                }
            }
        }
        std::sort(comps.back().begin(), comps.back().end());
    }
    return comps;
}

bool Network::is_connected(std::span<const std::uint8_t> mask) const {
    return components(mask).size() == 1;
}

std::vector<int> Network::bridges() const {
    // Tarjan lowlink on the multigraph of in-service branches. Parallel
    // branches between the same pair are never bridges.
    const int n = static_cast<int>(buses_.size());
    struct Edge {
        int to;
        int branch;
    };
    std::vector<std::vector<Edge>> adj(static_cast<std::size_t>(n));
    for (std::size_t l = 0; l < branches_.size(); ++l) {
        if (!branches_[l].in_service) continue;
        adj[static_cast<std::size_t>(from_idx_[l])].push_back({to_idx_[l], static_cast<int>(l)});
        adj[static_cast<std::size_t>(to_idx_[l])].push_back({from_idx_[l], static_cast<int>(l)});
    }
    std::vector<int> disc(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), -1);
    std::vector<int> out;
    int timer = 0;
    std::function<void(int, int)> dfs = [&](int u, int parent_edge) {
        disc[static_cast<std::size_t>(u)] = low[static_cast<std::size_t>(u)] = timer++;
        for (const Edge& e : adj[static_cast<std::size_t>(u)]) {
            if (e.branch == parent_edge) continue;
            if (disc[static_cast<std::size_t>(e.to)] < 0) {
                dfs(e.to, e.branch);
                low[static_cast<std::size_t>(u)] =
                    std::min(low[static_cast<std::size_t>(u)], low[static_cast<std::size_t>(e.to)]);
                if (low[static_cast<std::size_t>(e.to)] > disc[static_cast<std::size_t>(u)]) {
                    out.push_back(e.branch);
                }
            } else {
                low[static_cast<std::size_t>(u)] =
                    std::min(low[static_cast<std::size_t>(u)], disc[static_cast<std::size_t>(e.to)]);
            }
        }
    };
    for (int s = 0; s < n; ++s) {
        if (disc[static_cast<std::size_t>(s)] < 0) dfs(s, -1);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace aidcots
