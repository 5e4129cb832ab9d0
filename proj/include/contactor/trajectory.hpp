#ifndef CONTACTOR_TRAJECTORY_HPP
#define CONTACTOR_TRAJECTORY_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "contactor/linalg.hpp"

namespace contactor {

// Fixed-step run description. RK4 is the only method.
struct IntegratorConfig {
    double h = 1e-3;
    double T = 10.0;
};

// Uniform-step trajectory. State layout depends on the producing variant:
//   contact / evolution:  (q1..qn, p1..pn, z)
//   symplectic:           (q1..qn, p1..pn)
//   herglotz:             (q1..qn, qd1..qdn, z)
// `multipliers` is filled by constrained runs, `diagnostics` holds one value
// per node and named series ("H", "eta_contraction", ...). A DomainError
// mid-run leaves a partial trajectory with `error` set.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<Vec> multipliers;
    std::map<std::string, std::vector<double>> diagnostics;
    std::optional<std::string> error;

    std::size_t size() const { return times.size(); }
};

// CSV with a header row, %.17g formatting, comma separator, LF endings.
void write_csv(const Trajectory& traj,
               const std::vector<std::string>& state_names,
               const std::vector<std::string>& multiplier_names,
               const std::string& path);

// Reads a CSV produced by write_csv (or hand-made with the same header
// conventions); diag:* columns are restored into diagnostics.
Trajectory read_csv(const std::string& path);

} // namespace contactor

#endif
