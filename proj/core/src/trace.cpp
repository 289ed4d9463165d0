#include "polyproj/trace.hpp"

#include <json.hpp>

#include <cmath>
#include <ostream>
#include <vector>

namespace polyproj {

namespace {

using nlohmann::json;

json vec(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json coeffs(const ConvexCoefficients& c) {
  json out = json::array();
  for (std::size_t k = 0; k < c.support.size(); ++k) {
    const double wk = c.weights[static_cast<Eigen::Index>(k)];
    if (wk != 0.0) out.push_back({{"index", c.support[k]}, {"weight", wk}});
  }
  return out;
}

}  // namespace

std::string to_json_line(const IterationRecord& rec) {
  return json{{"type", "iteration"},
              {"n", rec.n},
              {"index_set", rec.index_set},
              {"theta", num(rec.theta)},
              {"worst_index", rec.worst_index},
              {"worst_value", num(rec.worst_value)},
              {"step3", rec.step3},
              {"step4", rec.step4}}
      .dump();
}

std::string to_json_line(const PairIterationRecord& rec) {
  return json{{"type", "iteration"},
              {"n", rec.n},
              {"index_set_p", rec.index_set_p},
              {"index_set_q", rec.index_set_q},
              {"theta", num(rec.theta)},
              {"rho_x", num(rec.rho_x)},
              {"rho_y", num(rec.rho_y)},
              {"corrected_p", to_string(rec.corrected_p)},
              {"corrected_q", to_string(rec.corrected_q)}}
      .dump();
}

std::string result_json_line(const SolveReport& r) {
  json out{{"type", "result"},
           {"termination", to_string(r.termination)},
           {"projection", vec(r.projection)},
           {"norm", num(r.projection.norm())},
           {"coefficients", coeffs(r.coeffs_global)},
           {"outer_iterations", r.outer_iterations},
           {"inner_iterations", r.inner_iterations},
           {"corrections_step3", r.corrections_step3},
           {"corrections_step4", r.corrections_step4},
           {"final_worst_value", num(r.final_worst_value)}};
  if (!r.diagnostic.empty()) out["diagnostic"] = r.diagnostic;
  return out.dump();
}

std::string result_json_line(const PairReport& r) {
  json out{{"type", "result"},
           {"termination", to_string(r.termination)},
           {"v", vec(r.v)},
           {"w", vec(r.w)},
           {"distance", num(r.distance)},
           {"coefficients_p", coeffs(r.coeffs_p)},
           {"coefficients_q", coeffs(r.coeffs_q)},
           {"outer_iterations", r.outer_iterations},
           {"inner_iterations", r.inner_iterations},
           {"corrections", r.corrections},
           {"rho_x", num(r.rho_x)},
           {"rho_y", num(r.rho_y)}};
  if (!r.diagnostic.empty()) out["diagnostic"] = r.diagnostic;
  return out.dump();
}

void write_trace(std::ostream& out, const SolveReport& report) {
  for (const auto& rec : report.iterations) out << to_json_line(rec) << '\n';
  out << result_json_line(report) << '\n';
}

void write_trace(std::ostream& out, const PairReport& report) {
  for (const auto& rec : report.iterations) out << to_json_line(rec) << '\n';
  out << result_json_line(report) << '\n';
}

}  // namespace polyproj
