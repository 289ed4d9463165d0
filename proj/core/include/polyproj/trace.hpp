#pragma once

// Line-delimited JSON: one "iteration" object per outer iteration and one
// closing "result" object.

#include "polyproj/accel_distance.hpp"
#include "polyproj/accel_nearest.hpp"

#include <iosfwd>
#include <string>

namespace polyproj {

std::string to_json_line(const IterationRecord& rec);
std::string to_json_line(const PairIterationRecord& rec);

std::string result_json_line(const SolveReport& report);
std::string result_json_line(const PairReport& report);

/// Iteration lines followed by the result line.
void write_trace(std::ostream& out, const SolveReport& report);
void write_trace(std::ostream& out, const PairReport& report);

}  // namespace polyproj
