#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "aidcots/network.hpp"

namespace aidcots {

struct MatpowerOptions {
    /// When false, branches with tap ratio != 1 are kept out of the OTS
    /// candidate set (switchable = false).
    bool switchable_transformers = true;
};

/// Parses the textual MATPOWER case format. Requires mpc.baseMVA, mpc.bus,
/// mpc.gen and mpc.branch; mpc.gencost is optional and defaults to zero cost.
/// All quantities are converted to per-unit on baseMVA.
Network parse_matpower(std::string_view text, const MatpowerOptions& opts = {});

/// Reads and parses a case file from disk.
Network load_case(const std::filesystem::path& path, const MatpowerOptions& opts = {});

/// Serializes a network back to MATPOWER case text. Round-tripping through
/// parse_matpower preserves per-unit quantities to full printed precision.
std::string to_matpower(const Network& net);

}  // namespace aidcots
