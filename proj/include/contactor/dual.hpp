#ifndef CONTACTOR_DUAL_HPP
#define CONTACTOR_DUAL_HPP

#include <cmath>
#include <utility>

#include "contactor/errors.hpp"

namespace contactor {

// Forward-mode dual number. Nesting Dual<Dual<double>> gives exact second
// derivatives; expression evaluation is templated on the scalar type so the
// same AST walk produces values, gradients and Hessians.
template <typename T>
struct Dual {
    T v{};
    T d{};

    Dual() = default;
    Dual(double c) : v(c), d() {}          // NOLINT: implicit from literals
    Dual(T value, T deriv) : v(std::move(value)), d(std::move(deriv)) {}
};

namespace detail {

inline double primal(double x) { return x; }
template <typename T>
double primal(const Dual<T>& x) { return primal(x.v); }

inline bool all_zero(double x) { return x == 0.0; }
template <typename T>
bool all_zero(const Dual<T>& x) { return all_zero(x.v) && all_zero(x.d); }

} // namespace detail

template <typename T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <typename T>
Dual<T> operator+(const Dual<T>& a, double b) { return {a.v + b, a.d}; }
template <typename T>
Dual<T> operator+(double a, const Dual<T>& b) { return {a + b.v, b.d}; }

template <typename T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <typename T>
Dual<T> operator-(const Dual<T>& a, double b) { return {a.v - b, a.d}; }
template <typename T>
Dual<T> operator-(double a, const Dual<T>& b) { return {a - b.v, -b.d}; }
template <typename T>
Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }

template <typename T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
    return {a.v * b.v, a.d * b.v + a.v * b.d};
}
template <typename T>
Dual<T> operator*(const Dual<T>& a, double b) { return {a.v * b, a.d * b}; }
template <typename T>
Dual<T> operator*(double a, const Dual<T>& b) { return {a * b.v, a * b.d}; }

template <typename T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    if (detail::primal(b.v) == 0.0)
        throw DomainError("division by zero");
    T q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
}
template <typename T>
Dual<T> operator/(const Dual<T>& a, double b) {
    if (b == 0.0)
        throw DomainError("division by zero");
    return {a.v / b, a.d / b};
}
template <typename T>
Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(a) / b; }

using std::abs;
using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;
using std::tan;
using std::tanh;

template <typename T>
Dual<T> sin(const Dual<T>& x) { return {sin(x.v), cos(x.v) * x.d}; }
template <typename T>
Dual<T> cos(const Dual<T>& x) { return {cos(x.v), T{} - sin(x.v) * x.d}; }
template <typename T>
Dual<T> tan(const Dual<T>& x) {
    T c = cos(x.v);
    return {tan(x.v), x.d / (c * c)};
}
template <typename T>
Dual<T> exp(const Dual<T>& x) {
    T e = exp(x.v);
    return {e, e * x.d};
}
template <typename T>
Dual<T> log(const Dual<T>& x) {
    if (detail::primal(x.v) <= 0.0)
        throw DomainError("log of non-positive value");
    return {log(x.v), x.d / x.v};
}
template <typename T>
Dual<T> sqrt(const Dual<T>& x) {
    double p = detail::primal(x.v);
    if (p < 0.0)
        throw DomainError("sqrt of negative value");
    T s = sqrt(x.v);
    if (p == 0.0) {
        if (!detail::all_zero(x.d))
            throw DomainError("derivative of sqrt at zero");
        return {s, T{}};
    }
    return {s, x.d / (s * 2.0)};
}
template <typename T>
Dual<T> tanh(const Dual<T>& x) {
    T t = tanh(x.v);
    return {t, (1.0 - t * t) * x.d};
}
template <typename T>
Dual<T> abs(const Dual<T>& x) {
    return detail::primal(x.v) >= 0.0 ? x : -x;
}

// Checked variants used by expression evaluation so the plain-double path
// fails the same way the dual path does.
template <typename T>
T div_op(const T& a, const T& b) {
    if (detail::primal(b) == 0.0)
        throw DomainError("division by zero");
    return a / b;
}

template <typename T>
T log_op(const T& x) {
    if (detail::primal(x) <= 0.0)
        throw DomainError("log of non-positive value");
    return log(x);
}

template <typename T>
T sqrt_op(const T& x) {
    if (detail::primal(x) < 0.0)
        throw DomainError("sqrt of negative value");
    return sqrt(x);
}

inline double pow_value(double b, double e) { return std::pow(b, e); }
template <typename T>
Dual<T> pow_value(const Dual<T>& b, double e) {
    return {pow_value(b.v, e), pow_value(b.v, e - 1.0) * b.d * e};
}

inline bool is_integer(double x) { return x == std::floor(x); }

// x^c with a constant exponent. Negative bases are allowed for integer
// exponents only; zero bases require c >= 1 (c == 0 gives 1) so the
// derivative terms stay finite. Non-integer exponents on negative bases
// fail loudly instead of producing NaN inside Newton loops.
template <typename S>
S pow_const(const S& base, double c) {
    double b = detail::primal(base);
    if (b > 0.0)
        return pow_value(base, c);
    if (b < 0.0) {
        if (!is_integer(c))
            throw DomainError("negative base with non-integer exponent");
        return pow_value(base, c);
    }
    if (c == 0.0)
        return S(1.0);
    if (c >= 1.0)
        return pow_value(base, c);
    throw DomainError("zero base with exponent below one");
}

inline double pow_general(double base, double expo) { return pow_const(base, expo); }

// x^y with both sides live. The log term in the derivative forces a positive
// base unless the exponent carries no derivative at this evaluation point.
template <typename T>
Dual<T> pow_general(const Dual<T>& base, const Dual<T>& expo) {
    double b = detail::primal(base);
    if (b > 0.0) {
        T lg = log(base.v);
        Dual<T> r;
        r.v = exp(expo.v * lg);
        r.d = r.v * (expo.d * lg + expo.v * base.d / base.v);
        return r;
    }
    if (!detail::all_zero(expo.d))
        throw DomainError("non-positive base with non-constant exponent");
    return pow_const(base, detail::primal(expo));
}

} // namespace contactor

#endif
