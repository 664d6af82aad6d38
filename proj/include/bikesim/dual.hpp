#pragma once

#include <cmath>

#include <Eigen/Core>

namespace bikesim {

// Forward-mode dual number carrying one directional derivative.
struct Dual {
    double v = 0.0;
    double d = 0.0;

    constexpr Dual() = default;
    constexpr Dual(double value) : v(value) {}
    constexpr Dual(double value, double deriv) : v(value), d(deriv) {}

    Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
    Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
    Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
    Dual& operator/=(const Dual& o)
    {
        d = (d * o.v - v * o.d) / (o.v * o.v);
        v /= o.v;
        return *this;
    }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }
inline Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
inline bool operator==(const Dual& a, const Dual& b) { return a.v == b.v; }
inline bool operator!=(const Dual& a, const Dual& b) { return a.v != b.v; }
inline bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
inline bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
inline bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
inline bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }

inline Dual sin(const Dual& a) { return {std::sin(a.v), a.d * std::cos(a.v)}; }
inline Dual cos(const Dual& a) { return {std::cos(a.v), -a.d * std::sin(a.v)}; }
inline Dual sqrt(const Dual& a)
{
    const double s = std::sqrt(a.v);
    return {s, a.d / (2.0 * s)};
}
inline Dual abs(const Dual& a) { return a.v < 0 ? -a : a; }
inline Dual abs2(const Dual& a) { return a * a; }
inline Dual atan2(const Dual& y, const Dual& x)
{
    const double r2 = x.v * x.v + y.v * y.v;
    return {std::atan2(y.v, x.v), (x.v * y.d - y.v * x.d) / r2};
}
inline const Dual& conj(const Dual& a) { return a; }
inline const Dual& real(const Dual& a) { return a; }
inline Dual imag(const Dual&) { return 0.0; }

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }
inline double deriv_of(const Dual& x) { return x.d; }

} // namespace bikesim

namespace Eigen {

template <>
struct NumTraits<bikesim::Dual> : NumTraits<double> {
    using Real = bikesim::Dual;
    using NonInteger = bikesim::Dual;
    using Nested = bikesim::Dual;
    using Literal = bikesim::Dual;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 2,
        AddCost = 4,
        MulCost = 6
    };
};

template <typename BinaryOp>
struct ScalarBinaryOpTraits<bikesim::Dual, double, BinaryOp> {
    using ReturnType = bikesim::Dual;
};
template <typename BinaryOp>
struct ScalarBinaryOpTraits<double, bikesim::Dual, BinaryOp> {
    using ReturnType = bikesim::Dual;
};

} // namespace Eigen
