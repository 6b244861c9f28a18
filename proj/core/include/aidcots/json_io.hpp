#pragma once

#include <json.hpp>

#include "aidcots/ac_eval.hpp"
#include "aidcots/network.hpp"
#include "aidcots/ots_model.hpp"

namespace aidcots {

using Json = nlohmann::ordered_json;

/// Debug serialization of a network; schema documented in docs/formats.md.
Json network_to_json(const Network& net);
Network network_from_json(const Json& j);

Json report_to_json(const ACEvalReport& rep);
Json solution_to_json(const OTSSolution& sol);

}  // namespace aidcots
