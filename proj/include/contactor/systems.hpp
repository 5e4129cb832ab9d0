#ifndef CONTACTOR_SYSTEMS_HPP
#define CONTACTOR_SYSTEMS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "contactor/dynamics.hpp"
#include "contactor/hj.hpp"
#include "contactor/implicit.hpp"

namespace contactor {

enum class SystemKind {
    Contact,
    Evolution,
    Symplectic,
    HerglotzContact,
    HerglotzEvolution,
    MorseContact,
    MorseEvolution,
    MorseSymplectic,
    Phi,
};

std::string kind_name(SystemKind kind);
SystemKind kind_from_name(const std::string& name);

// Validated system description (JSON schema version 1). Expressions stay as
// text; the as_* converters parse them against the kind's variable layout.
struct SystemConfig {
    std::string name;
    SystemKind kind = SystemKind::Contact;
    int n = 1;

    std::string hamiltonian;  // contact | evolution | symplectic kinds
    std::string lagrangian;   // herglotz-* kinds
    std::string morse;        // morse-* kinds
    std::vector<std::string> multipliers;
    std::string phi;          // phi kind
    std::vector<int> partition_a, partition_b;
    std::string w;            // optional characteristic function

    Vec q0, p0, qd0;
    double z0 = 0.0;
    double h = 1e-3;
    double T = 10.0;
    std::uint64_t seed = 42;
    std::map<std::string, double> pinned;
    std::map<std::string, double> tolerances;
    std::map<std::string, std::string> metadata;

    bool operator==(const SystemConfig& other) const;

    double tolerance(const std::string& name, double fallback) const {
        auto it = tolerances.find(name);
        return it == tolerances.end() ? fallback : it->second;
    }
};

SystemConfig load(const std::string& path);
SystemConfig config_from_json_text(const std::string& text);
std::string serialize(const SystemConfig& cfg);
void save(const SystemConfig& cfg, const std::string& path);

// Built-in verified example systems (at least eight).
std::vector<SystemConfig> catalog();
SystemConfig catalog_entry(const std::string& name);

// Converters; each throws SchemaError when the kind does not provide the
// requested structure.
HamiltonianSystem as_hamiltonian(const SystemConfig& cfg);
ScalarExpr as_symplectic_hamiltonian(const SystemConfig& cfg);  // F(q, p)
LagrangianSystem as_lagrangian(const SystemConfig& cfg);
MorseFamilySystem as_morse(const SystemConfig& cfg);
PhiGenerator as_phi(const SystemConfig& cfg);
std::optional<CharacteristicFn> characteristic_fn(const SystemConfig& cfg);

IntegratorConfig integrator_config(const SystemConfig& cfg);
// Initial state in the kind's layout: (q,p,z), (q,p), or (q,qd,z).
Vec initial_state(const SystemConfig& cfg);
// Initial state for the constrained path, in the generator's base layout
// ((q,p,z) or (q,p)); Herglotz kinds take p from p0.
Vec initial_dae_state(const SystemConfig& cfg);
// Initial multipliers for the constrained path (Herglotz kinds seed the
// velocity multipliers from qd0; morse kinds start at zero).
Vec initial_multipliers(const SystemConfig& cfg);
std::vector<std::string> state_names(const SystemConfig& cfg);
std::vector<std::string> dae_state_names(const SystemConfig& cfg);
std::vector<std::string> multiplier_names(const SystemConfig& cfg);

} // namespace contactor

#endif
