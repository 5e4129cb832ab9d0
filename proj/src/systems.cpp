#include "contactor/systems.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "contactor/errors.hpp"

namespace contactor {

using nlohmann::json;

std::string kind_name(SystemKind kind) {
    switch (kind) {
    case SystemKind::Contact: return "contact";
    case SystemKind::Evolution: return "evolution";
    case SystemKind::Symplectic: return "symplectic";
    case SystemKind::HerglotzContact: return "herglotz-contact";
    case SystemKind::HerglotzEvolution: return "herglotz-evolution";
    case SystemKind::MorseContact: return "morse-contact";
    case SystemKind::MorseEvolution: return "morse-evolution";
    case SystemKind::MorseSymplectic: return "morse-symplectic";
    case SystemKind::Phi: return "phi";
    }
    return "contact";
}

SystemKind kind_from_name(const std::string& name) {
    for (SystemKind k : {SystemKind::Contact, SystemKind::Evolution,
                         SystemKind::Symplectic, SystemKind::HerglotzContact,
                         SystemKind::HerglotzEvolution, SystemKind::MorseContact,
                         SystemKind::MorseEvolution, SystemKind::MorseSymplectic,
                         SystemKind::Phi})
        if (kind_name(k) == name)
            return k;
    throw SchemaError("/kind", "unknown kind '" + name + "'");
}

bool SystemConfig::operator==(const SystemConfig& other) const {
    auto veq = [](const Vec& a, const Vec& b) {
        return a.size() == b.size() && a == b;
    };
    return name == other.name && kind == other.kind && n == other.n &&
           hamiltonian == other.hamiltonian && lagrangian == other.lagrangian &&
           morse == other.morse && multipliers == other.multipliers &&
           phi == other.phi && partition_a == other.partition_a &&
           partition_b == other.partition_b && w == other.w &&
           veq(q0, other.q0) && veq(p0, other.p0) && veq(qd0, other.qd0) &&
           z0 == other.z0 && h == other.h && T == other.T && seed == other.seed &&
           pinned == other.pinned && tolerances == other.tolerances &&
           metadata == other.metadata;
}

namespace {

bool is_herglotz(SystemKind k) {
    return k == SystemKind::HerglotzContact || k == SystemKind::HerglotzEvolution;
}
bool is_morse(SystemKind k) {
    return k == SystemKind::MorseContact || k == SystemKind::MorseEvolution ||
           k == SystemKind::MorseSymplectic;
}
bool is_explicit_hamiltonian(SystemKind k) {
    return k == SystemKind::Contact || k == SystemKind::Evolution ||
           k == SystemKind::Symplectic;
}

Vec json_vec(const json& j, const std::string& pointer) {
    if (!j.is_array())
        throw SchemaError(pointer, "expected an array of numbers");
    Vec v(static_cast<int>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number())
            throw SchemaError(pointer, "expected an array of numbers");
        v(static_cast<int>(i)) = j[i].get<double>();
    }
    return v;
}

json vec_json(const Vec& v) {
    json j = json::array();
    for (int i = 0; i < v.size(); ++i)
        j.push_back(v(i));
    return j;
}

void parse_field_expr(const std::string& text, const std::vector<std::string>& vars,
                      const std::string& pointer) {
    try {
        ScalarExpr::parse(text, vars);
    } catch (const Error& err) {
        throw SchemaError(pointer, std::string(err.kind()) + ": " + err.what());
    }
}

void validate(const SystemConfig& cfg) {
    if (cfg.n < 1)
        throw SchemaError("/n", "n must be at least 1");
    if (cfg.h <= 0.0)
        throw SchemaError("/integrator/h", "step must be positive");
    if (cfg.T <= 0.0)
        throw SchemaError("/integrator/T", "horizon must be positive");
    if (cfg.T / cfg.h > 1e8)
        throw SchemaError("/integrator", "T/h exceeds 1e8 steps");

    const bool has_h = !cfg.hamiltonian.empty();
    const bool has_l = !cfg.lagrangian.empty();
    const bool has_m = !cfg.morse.empty();
    const bool has_phi = !cfg.phi.empty();
    if (is_explicit_hamiltonian(cfg.kind)) {
        if (!has_h)
            throw SchemaError("/expressions/hamiltonian", "kind '" + kind_name(cfg.kind) + "' needs a hamiltonian");
        if (has_l || has_m || has_phi)
            throw SchemaError("/expressions", "kind '" + kind_name(cfg.kind) + "' admits only a hamiltonian expression");
        auto vars = cfg.kind == SystemKind::Symplectic ? symplectic_state_vars(cfg.n)
                                                       : contact_state_vars(cfg.n);
        parse_field_expr(cfg.hamiltonian, vars, "/expressions/hamiltonian");
    } else if (is_herglotz(cfg.kind)) {
        if (!has_l)
            throw SchemaError("/expressions/lagrangian", "kind '" + kind_name(cfg.kind) + "' needs a lagrangian");
        if (has_h || has_m || has_phi)
            throw SchemaError("/expressions", "kind '" + kind_name(cfg.kind) + "' admits only a lagrangian expression");
        parse_field_expr(cfg.lagrangian, lagrangian_state_vars(cfg.n), "/expressions/lagrangian");
    } else if (is_morse(cfg.kind)) {
        if (!has_m)
            throw SchemaError("/expressions/morse", "kind '" + kind_name(cfg.kind) + "' needs a morse generator");
        if (has_h || has_l || has_phi)
            throw SchemaError("/expressions", "kind '" + kind_name(cfg.kind) + "' admits only a morse expression");
        auto vars = cfg.kind == SystemKind::MorseSymplectic
                        ? symplectic_state_vars(cfg.n)
                        : contact_state_vars(cfg.n);
        vars.insert(vars.end(), cfg.multipliers.begin(), cfg.multipliers.end());
        parse_field_expr(cfg.morse, vars, "/expressions/morse");
    } else {  // Phi
        if (!has_phi)
            throw SchemaError("/expressions/phi", "kind 'phi' needs a generating function");
        if (has_h || has_l || has_m)
            throw SchemaError("/expressions", "kind 'phi' admits only a phi expression");
        try {
            PhiGenerator::make(cfg.n, cfg.partition_a, cfg.partition_b, cfg.phi);
        } catch (const SchemaError&) {
            throw;
        } catch (const Error& err) {
            throw SchemaError("/expressions/phi", std::string(err.kind()) + ": " + err.what());
        }
    }

    if (!cfg.w.empty()) {
        std::vector<std::string> qvars;
        for (int i = 1; i <= cfg.n; ++i)
            qvars.push_back("q" + std::to_string(i));
        parse_field_expr(cfg.w, qvars, "/expressions/w");
    }

    auto check_dim = [&](const Vec& v, const char* ptr, bool required) {
        if (v.size() == 0 && !required)
            return;
        if (static_cast<int>(v.size()) != cfg.n)
            throw SchemaError(ptr, "expected " + std::to_string(cfg.n) + " entries");
    };
    check_dim(cfg.q0, "/initial_state/q", true);
    if (is_herglotz(cfg.kind))
        check_dim(cfg.qd0, "/initial_state/qd", true);
    else
        check_dim(cfg.qd0, "/initial_state/qd", false);
    check_dim(cfg.p0, "/initial_state/p", !is_herglotz(cfg.kind));

    for (const auto& [name, value] : cfg.pinned) {
        (void)value;
        bool known = false;
        if (is_herglotz(cfg.kind))
            known = name.rfind("qd", 0) == 0;
        else if (is_morse(cfg.kind))
            known = std::find(cfg.multipliers.begin(), cfg.multipliers.end(), name) !=
                    cfg.multipliers.end();
        if (!known)
            throw SchemaError("/pinned/" + name, "not a multiplier of this system");
    }
}

SystemConfig from_json(const json& j) {
    if (!j.is_object())
        throw SchemaError("/", "config must be a JSON object");
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
        j["schema_version"].get<int>() != 1)
        throw SchemaError("/schema_version", "schema_version must be 1");
    SystemConfig cfg;
    if (!j.contains("kind") || !j["kind"].is_string())
        throw SchemaError("/kind", "missing kind");
    cfg.kind = kind_from_name(j["kind"].get<std::string>());
    cfg.name = j.value("name", std::string("unnamed"));
    if (!j.contains("n") || !j["n"].is_number_integer())
        throw SchemaError("/n", "missing integer n");
    cfg.n = j["n"].get<int>();

    if (j.contains("expressions")) {
        const json& e = j["expressions"];
        if (!e.is_object())
            throw SchemaError("/expressions", "expected an object");
        cfg.hamiltonian = e.value("hamiltonian", std::string());
        cfg.lagrangian = e.value("lagrangian", std::string());
        cfg.morse = e.value("morse", std::string());
        cfg.phi = e.value("phi", std::string());
        cfg.w = e.value("w", std::string());
        if (e.contains("multipliers"))
            for (const auto& m : e["multipliers"])
                cfg.multipliers.push_back(m.get<std::string>());
        if (e.contains("partition_a"))
            for (const auto& a : e["partition_a"])
                cfg.partition_a.push_back(a.get<int>());
        if (e.contains("partition_b"))
            for (const auto& b : e["partition_b"])
                cfg.partition_b.push_back(b.get<int>());
    }

    if (j.contains("initial_state")) {
        const json& s = j["initial_state"];
        if (!s.is_object())
            throw SchemaError("/initial_state", "expected an object");
        if (s.contains("q"))
            cfg.q0 = json_vec(s["q"], "/initial_state/q");
        if (s.contains("p"))
            cfg.p0 = json_vec(s["p"], "/initial_state/p");
        if (s.contains("qd"))
            cfg.qd0 = json_vec(s["qd"], "/initial_state/qd");
        cfg.z0 = s.value("z", 0.0);
    }

    if (j.contains("integrator")) {
        const json& i = j["integrator"];
        if (!i.is_object())
            throw SchemaError("/integrator", "expected an object");
        cfg.h = i.value("h", 1e-3);
        cfg.T = i.value("T", 10.0);
    }
    cfg.seed = j.value("seed", static_cast<std::uint64_t>(42));
    if (j.contains("pinned"))
        for (auto it = j["pinned"].begin(); it != j["pinned"].end(); ++it)
            cfg.pinned[it.key()] = it.value().get<double>();
    if (j.contains("tolerances"))
        for (auto it = j["tolerances"].begin(); it != j["tolerances"].end(); ++it)
            cfg.tolerances[it.key()] = it.value().get<double>();
    if (j.contains("metadata"))
        for (auto it = j["metadata"].begin(); it != j["metadata"].end(); ++it)
            cfg.metadata[it.key()] = it.value().get<std::string>();

    validate(cfg);
    return cfg;
}

json to_json(const SystemConfig& cfg) {
    json e = json::object();
    if (!cfg.hamiltonian.empty()) e["hamiltonian"] = cfg.hamiltonian;
    if (!cfg.lagrangian.empty()) e["lagrangian"] = cfg.lagrangian;
    if (!cfg.morse.empty()) e["morse"] = cfg.morse;
    if (!cfg.phi.empty()) e["phi"] = cfg.phi;
    if (!cfg.w.empty()) e["w"] = cfg.w;
    if (!cfg.multipliers.empty()) e["multipliers"] = cfg.multipliers;
    if (!cfg.partition_a.empty()) e["partition_a"] = cfg.partition_a;
    if (!cfg.partition_b.empty()) e["partition_b"] = cfg.partition_b;

    json s = json::object();
    s["q"] = vec_json(cfg.q0);
    if (cfg.p0.size()) s["p"] = vec_json(cfg.p0);
    if (cfg.qd0.size()) s["qd"] = vec_json(cfg.qd0);
    s["z"] = cfg.z0;

    json j = {{"schema_version", 1},
              {"name", cfg.name},
              {"kind", kind_name(cfg.kind)},
              {"n", cfg.n},
              {"expressions", e},
              {"initial_state", s},
              {"integrator", {{"h", cfg.h}, {"T", cfg.T}}},
              {"seed", cfg.seed}};
    if (!cfg.pinned.empty()) j["pinned"] = cfg.pinned;
    if (!cfg.tolerances.empty()) j["tolerances"] = cfg.tolerances;
    if (!cfg.metadata.empty()) j["metadata"] = cfg.metadata;
    return j;
}

} // namespace

SystemConfig config_from_json_text(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw SchemaError("/", "invalid JSON");
    return from_json(j);
}

SystemConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw SchemaError("/", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json_text(ss.str());
}

std::string serialize(const SystemConfig& cfg) {
    return to_json(cfg).dump(2) + "\n";
}

void save(const SystemConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw SchemaError("/", "cannot open '" + path + "' for writing");
    out << serialize(cfg);
}

std::vector<SystemConfig> catalog() {
    std::vector<SystemConfig> entries;

    {
        SystemConfig c;
        c.name = "dho";
        c.kind = SystemKind::Contact;
        c.n = 1;
        c.hamiltonian = "p1^2/2 + q1^2/2 + 0.2*z";
        c.q0 = Vec::Constant(1, 1.0);
        c.p0 = Vec::Constant(1, 0.0);
        c.metadata["description"] =
            "damped harmonic oscillator; the contact flow reduces to qdd + 0.2 qd + q = 0";
        c.metadata["closed_form"] =
            "q(t) = exp(-0.1 t) (cos(w t) + (0.1/w) sin(w t)), w = sqrt(0.99), from q0=1, p0=0, z0=0";
        entries.push_back(c);
    }
    {
        SystemConfig c;
        c.name = "free-particle";
        c.kind = SystemKind::Contact;
        c.n = 1;
        c.hamiltonian = "p1^2/2";
        c.q0 = Vec::Constant(1, 0.0);
        c.p0 = Vec::Constant(1, 1.0);
        c.metadata["description"] = "free particle as a contact system (no z dependence)";
        entries.push_back(c);
    }
    {
        SystemConfig c;
        c.name = "linear-transport";
        c.kind = SystemKind::Contact;
        c.n = 1;
        c.hamiltonian = "p1";
        c.w = "0.7*q1";
        c.q0 = Vec::Constant(1, 0.0);
        c.p0 = Vec::Constant(1, 0.7);
        c.metadata["description"] =
            "H = p with W = k q: a closed-form Hamilton-Jacobi pair (k = 0.7)";
        entries.push_back(c);
    }
    {
        SystemConfig c;
        c.name = "dho-evolution";
        c.kind = SystemKind::Evolution;
        c.n = 1;
        c.hamiltonian = "p1^2/2 + q1^2/2 + 0.2*z";
        c.q0 = Vec::Constant(1, 1.0);
        c.p0 = Vec::Constant(1, 0.0);
        c.metadata["description"] = "evolution flow of the damped oscillator; preserves H";
        entries.push_back(c);
    }
    {
        SystemConfig c;
        c.name = "herglotz-oscillator";
        c.kind = SystemKind::HerglotzContact;
        c.n = 1;
        c.lagrangian = "qd1^2/2 - q1^2/2 - 0.2*z";
        c.q0 = Vec::Constant(1, 1.0);
        c.qd0 = Vec::Constant(1, 0.0);
        c.p0 = Vec::Constant(1, 0.0);
        c.metadata["description"] =
            "regular contact Lagrangian; Legendre pair of the dho entry";
        entries.push_back(c);
    }
    {
        SystemConfig c;
        c.name = "herglotz-oscillator-evolution";
        c.kind = SystemKind::HerglotzEvolution;
        c.n = 1;
        c.lagrangian = "qd1^2/2 - q1^2/2 - 0.2*z";
        c.q0 = Vec::Constant(1, 1.0);
        c.qd0 = Vec::Constant(1, 0.0);
        c.p0 = Vec::Constant(1, 0.0);
        c.metadata["description"] = "evolution variant of the Herglotz oscillator";
        entries.push_back(c);
    }
    {
        SystemConfig c;
        c.name = "herglotz-gauge";
        c.kind = SystemKind::HerglotzContact;
        c.n = 2;
        c.lagrangian = "qd1^2/2 - q1^2/2 - 0.2*z";
        c.q0 = Vec::Zero(2);
        c.q0(0) = 1.0;
        c.qd0 = Vec::Zero(2);
        c.p0 = Vec::Zero(2);
        c.pinned["qd2"] = 0.0;
        c.metadata["description"] =
            "singular Lagrangian (no qd2 dependence); qd2 must be pinned";
        entries.push_back(c);
    }
    {
        SystemConfig c;
        c.name = "constrained-oscillator";
        c.kind = SystemKind::MorseSymplectic;
        c.n = 1;
        c.morse = "p1^2/2 + q1^2/2 + l1*(p1-q1)";
        c.multipliers = {"l1"};
        c.q0 = Vec::Constant(1, 1.0);
        c.p0 = Vec::Constant(1, 1.0);
        c.metadata["description"] =
            "linear-multiplier generator; the constraint p=q does not involve l1, "
            "so the multiplier Hessian is singular and the time-stepping path "
            "reports gauge freedom (generator and HJ checks apply)";
        entries.push_back(c);
    }
    {
        SystemConfig c;
        c.name = "cubic-generator";
        c.kind = SystemKind::Phi;
        c.n = 2;
        c.phi = "0.4*q1^3 + 0.2*q1^2 + 0.7*q1*p2 + 0.5*p2^2 + 0.3*p2^3";
        c.partition_a = {1};
        c.partition_b = {2};
        c.q0 = Vec::Zero(2);
        c.p0 = Vec::Zero(2);
        c.metadata["description"] =
            "cubic generating function Phi(q1, p2); regular for p2 > -5/9";
        entries.push_back(c);
    }

    for (auto& c : entries)
        validate(c);
    return entries;
}

SystemConfig catalog_entry(const std::string& name) {
    for (const auto& c : catalog())
        if (c.name == name)
            return c;
    throw SchemaError("/name", "no catalog entry named '" + name + "'");
}

HamiltonianSystem as_hamiltonian(const SystemConfig& cfg) {
    if (cfg.kind != SystemKind::Contact && cfg.kind != SystemKind::Evolution)
        throw SchemaError("/kind", "kind '" + kind_name(cfg.kind) +
                                       "' has no contact Hamiltonian");
    return HamiltonianSystem::make(cfg.n, cfg.hamiltonian);
}

ScalarExpr as_symplectic_hamiltonian(const SystemConfig& cfg) {
    if (cfg.kind != SystemKind::Symplectic)
        throw SchemaError("/kind", "kind '" + kind_name(cfg.kind) +
                                       "' has no symplectic Hamiltonian");
    return ScalarExpr::parse(cfg.hamiltonian, symplectic_state_vars(cfg.n));
}

LagrangianSystem as_lagrangian(const SystemConfig& cfg) {
    if (!is_herglotz(cfg.kind))
        throw SchemaError("/kind", "kind '" + kind_name(cfg.kind) + "' has no Lagrangian");
    return LagrangianSystem::make(cfg.n, cfg.lagrangian);
}

MorseFamilySystem as_morse(const SystemConfig& cfg) {
    switch (cfg.kind) {
    case SystemKind::Contact:
        return MorseFamilySystem::from_hamiltonian(as_hamiltonian(cfg),
                                                   DynamicsVariant::Contact);
    case SystemKind::Evolution:
        return MorseFamilySystem::from_hamiltonian(as_hamiltonian(cfg),
                                                   DynamicsVariant::Evolution);
    case SystemKind::Symplectic: {
        MorseFamilySystem sys;
        sys.n = cfg.n;
        sys.k = 0;
        sys.variant = DynamicsVariant::Symplectic;
        sys.gen = as_symplectic_hamiltonian(cfg);
        return sys;
    }
    case SystemKind::HerglotzContact:
        return MorseFamilySystem::herglotz(as_lagrangian(cfg), DynamicsVariant::Contact);
    case SystemKind::HerglotzEvolution:
        return MorseFamilySystem::herglotz(as_lagrangian(cfg), DynamicsVariant::Evolution);
    case SystemKind::MorseContact:
        return MorseFamilySystem::make(cfg.n, DynamicsVariant::Contact, cfg.morse,
                                       cfg.multipliers);
    case SystemKind::MorseEvolution:
        return MorseFamilySystem::make(cfg.n, DynamicsVariant::Evolution, cfg.morse,
                                       cfg.multipliers);
    case SystemKind::MorseSymplectic:
        return MorseFamilySystem::make(cfg.n, DynamicsVariant::Symplectic, cfg.morse,
                                       cfg.multipliers);
    case SystemKind::Phi:
        break;
    }
    throw SchemaError("/kind", "kind 'phi' generates a static submanifold, not dynamics");
}

PhiGenerator as_phi(const SystemConfig& cfg) {
    if (cfg.kind != SystemKind::Phi)
        throw SchemaError("/kind", "kind '" + kind_name(cfg.kind) + "' has no phi generator");
    return PhiGenerator::make(cfg.n, cfg.partition_a, cfg.partition_b, cfg.phi);
}

std::optional<CharacteristicFn> characteristic_fn(const SystemConfig& cfg) {
    if (cfg.w.empty())
        return std::nullopt;
    return CharacteristicFn::symbolic(cfg.n, cfg.w);
}

IntegratorConfig integrator_config(const SystemConfig& cfg) {
    return IntegratorConfig{cfg.h, cfg.T};
}

Vec initial_state(const SystemConfig& cfg) {
    if (is_herglotz(cfg.kind)) {
        Vec x(2 * cfg.n + 1);
        x.segment(0, cfg.n) = cfg.q0;
        x.segment(cfg.n, cfg.n) = cfg.qd0;
        x(2 * cfg.n) = cfg.z0;
        return x;
    }
    if (cfg.kind == SystemKind::Symplectic || cfg.kind == SystemKind::MorseSymplectic) {
        Vec x(2 * cfg.n);
        x.segment(0, cfg.n) = cfg.q0;
        x.segment(cfg.n, cfg.n) = cfg.p0;
        return x;
    }
    Vec x(2 * cfg.n + 1);
    x.segment(0, cfg.n) = cfg.q0;
    x.segment(cfg.n, cfg.n) = cfg.p0;
    x(2 * cfg.n) = cfg.z0;
    return x;
}

Vec initial_dae_state(const SystemConfig& cfg) {
    if (cfg.kind == SystemKind::Symplectic || cfg.kind == SystemKind::MorseSymplectic) {
        Vec x(2 * cfg.n);
        x.segment(0, cfg.n) = cfg.q0;
        x.segment(cfg.n, cfg.n) = cfg.p0;
        return x;
    }
    Vec x(2 * cfg.n + 1);
    x.segment(0, cfg.n) = cfg.q0;
    x.segment(cfg.n, cfg.n) = cfg.p0;
    x(2 * cfg.n) = cfg.z0;
    return x;
}

Vec initial_multipliers(const SystemConfig& cfg) {
    if (is_herglotz(cfg.kind))
        return cfg.qd0;
    if (is_morse(cfg.kind))
        return Vec::Zero(static_cast<int>(cfg.multipliers.size()));
    return Vec();
}

std::vector<std::string> state_names(const SystemConfig& cfg) {
    if (is_herglotz(cfg.kind))
        return lagrangian_state_vars(cfg.n);
    if (cfg.kind == SystemKind::Symplectic || cfg.kind == SystemKind::MorseSymplectic)
        return symplectic_state_vars(cfg.n);
    return contact_state_vars(cfg.n);
}

std::vector<std::string> dae_state_names(const SystemConfig& cfg) {
    if (cfg.kind == SystemKind::Symplectic || cfg.kind == SystemKind::MorseSymplectic)
        return symplectic_state_vars(cfg.n);
    return contact_state_vars(cfg.n);
}

std::vector<std::string> multiplier_names(const SystemConfig& cfg) {
    if (is_herglotz(cfg.kind)) {
        std::vector<std::string> names;
        for (int i = 1; i <= cfg.n; ++i)
            names.push_back("qd" + std::to_string(i));
        return names;
    }
    if (is_morse(cfg.kind))
        return cfg.multipliers;
    return {};
}

} // namespace contactor
