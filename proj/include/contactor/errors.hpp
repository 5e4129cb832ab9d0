#ifndef CONTACTOR_ERRORS_HPP
#define CONTACTOR_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace contactor {

// All library failures derive from Error and carry a stable machine-readable
// kind string; the CLI maps kinds onto exit codes and error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, const std::string& message)
        : Error("SyntaxError",
                message + " (offset " + std::to_string(position) + ")"),
          position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

class UnknownIdentifier : public Error {
public:
    explicit UnknownIdentifier(const std::string& name)
        : Error("UnknownIdentifier", "unknown identifier '" + name + "'"),
          name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& message)
        : Error("DomainError", message) {}
};

class SingularLagrangian : public Error {
public:
    explicit SingularLagrangian(const std::string& message)
        : Error("SingularLagrangian", message) {}
};

class SingularConstraintJacobian : public Error {
public:
    explicit SingularConstraintJacobian(const std::string& message)
        : Error("SingularConstraintJacobian", message) {}
};

class NoConvergence : public Error {
public:
    explicit NoConvergence(const std::string& message)
        : Error("NoConvergence", message) {}
};

class ConsistencyLost : public Error {
public:
    explicit ConsistencyLost(const std::string& message)
        : Error("ConsistencyLost", message) {}
};

class ConstraintViolated : public Error {
public:
    explicit ConstraintViolated(const std::string& message)
        : Error("ConstraintViolated", message) {}
};

class ReducedNotASolution : public Error {
public:
    explicit ReducedNotASolution(const std::string& message)
        : Error("ReducedNotASolution", message) {}
};

class BranchLoss : public Error {
public:
    explicit BranchLoss(const std::string& message)
        : Error("BranchLoss", message) {}
};

class SchemaError : public Error {
public:
    SchemaError(std::string pointer, const std::string& message)
        : Error("SchemaError", message + " (at " + pointer + ")"),
          pointer_(std::move(pointer)) {}
    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

} // namespace contactor

#endif
