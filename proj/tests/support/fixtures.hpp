#pragma once

#include <string>

#include "aidcots/matpower.hpp"

namespace aidcots::testing {

inline std::string data_path(const std::string& file) {
    return std::string(AIDCOTS_DATA_DIR) + "/" + file;
}

inline Network load_case14() { return load_case(data_path("case14_ieee.m")); }
inline Network load_case30() { return load_case(data_path("case30_ieee.m")); }

/// Slack -- line (r=0.01, x=0.1) -- PQ load bus, one generator.
inline const char* kTwoBusCase = R"(
function mpc = two_bus
mpc.version = '2';
mpc.baseMVA = 100.0;
mpc.bus = [
  1 3 0.0  0.0 0.0 0.0 1 1.0 0.0 0.0 1 1.10 0.90;
  2 1 10.0 2.0 0.0 0.0 1 1.0 0.0 0.0 1 1.10 0.90;
];
mpc.gen = [
  1 0.0 0.0 50.0 -50.0 1.0 100.0 1 50.0 0.0;
];
mpc.gencost = [
  2 0.0 0.0 3 0.0 10.0 0.0;
];
mpc.branch = [
  1 2 0.01 0.1 0.0 100.0 0 0 0 0 1 -360 360;
];
)";

/// Lossless two-bus variant, zero load. Flat voltage solves it exactly.
inline const char* kTwoBusLossless = R"(
function mpc = two_bus_lossless
mpc.version = '2';
mpc.baseMVA = 100.0;
mpc.bus = [
  1 3 0.0 0.0 0.0 0.0 1 1.0 0.0 0.0 1 1.10 0.90;
  2 1 0.0 0.0 0.0 0.0 1 1.0 0.0 0.0 1 1.10 0.90;
];
mpc.gen = [
  1 0.0 0.0 50.0 -50.0 1.0 100.0 1 50.0 0.0;
];
mpc.branch = [
  1 2 0.0 0.1 0.0 100.0 0 0 0 0 1 -360 360;
];
)";

/// Three buses in a triangle, two generators, one load; every line has a
/// parallel path so any single line may open.
inline const char* kTriangleCase = R"(
function mpc = triangle
mpc.version = '2';
mpc.baseMVA = 100.0;
mpc.bus = [
  1 3 0.0  0.0 0.0 0.0 1 1.0 0.0 0.0 1 1.10 0.90;
  2 2 0.0  0.0 0.0 0.0 1 1.0 0.0 0.0 1 1.10 0.90;
  3 1 40.0 10.0 0.0 0.0 1 1.0 0.0 0.0 1 1.10 0.90;
];
mpc.gen = [
  1 0.0 0.0 50.0 -50.0 1.0 100.0 1 60.0 0.0;
  2 0.0 0.0 50.0 -50.0 1.0 100.0 1 60.0 0.0;
];
mpc.gencost = [
  2 0.0 0.0 3 0.0 5.0 0.0;
  2 0.0 0.0 3 0.0 9.0 0.0;
];
mpc.branch = [
  1 2 0.01 0.08 0.02 80.0 0 0 0 0 1 -360 360;
  1 3 0.02 0.16 0.02 80.0 0 0 0 0 1 -360 360;
  2 3 0.01 0.09 0.02 80.0 0 0 0 0 1 -360 360;
];
)";

}  // namespace aidcots::testing
