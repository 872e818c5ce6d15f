#pragma once

// Problem data for -Lap u = |u|^{p-2} u on the cylindrical shell
//   Omega = {(y, z) in R^{m+1} x R^{N-m-1} : a < |y| < b}
// and the critical-exponent bookkeeping that decides which regime a
// configuration falls into.

#include <cmath>
#include <compare>
#include <stdexcept>
#include <string>

namespace sle {

/// Raised for arguments outside an operation's domain.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Real number or +infinity, with a total order. Infinity is a tag, never a
/// float sentinel, so `p < ExtendedReal::infinity()` is exact for every finite p.
class ExtendedReal {
public:
    constexpr ExtendedReal() = default;
    constexpr explicit ExtendedReal(double v) : value_(v) {}

    static constexpr ExtendedReal infinity() {
        ExtendedReal x;
        x.infinite_ = true;
        return x;
    }

    constexpr bool is_infinite() const { return infinite_; }
    constexpr bool is_finite() const { return !infinite_; }

    /// Finite value; throws on infinity.
    double value() const {
        if (infinite_) throw DomainError("ExtendedReal::value: value is infinite");
        return value_;
    }

    /// Lossy conversion for printing and serialization.
    double to_double() const { return infinite_ ? HUGE_VAL : value_; }

    friend constexpr bool operator==(const ExtendedReal& x, const ExtendedReal& y) {
        if (x.infinite_ || y.infinite_) return x.infinite_ == y.infinite_;
        return x.value_ == y.value_;
    }
    friend constexpr std::partial_ordering operator<=>(const ExtendedReal& x,
                                                       const ExtendedReal& y) {
        if (x.infinite_ && y.infinite_) return std::partial_ordering::equivalent;
        if (x.infinite_) return std::partial_ordering::greater;
        if (y.infinite_) return std::partial_ordering::less;
        return x.value_ <=> y.value_;
    }
    friend constexpr bool operator==(const ExtendedReal& x, double y) {
        return x == ExtendedReal(y);
    }
    friend constexpr std::partial_ordering operator<=>(const ExtendedReal& x, double y) {
        return x <=> ExtendedReal(y);
    }

private:
    double value_ = 0.0;
    bool infinite_ = false;
};

inline std::string to_string(const ExtendedReal& x) {
    return x.is_infinite() ? std::string("inf") : std::to_string(x.value());
}

enum class Regime { subcritical, critical, supercritical };

inline const char* to_string(Regime r) {
    switch (r) {
    case Regime::subcritical: return "subcritical";
    case Regime::critical: return "critical";
    case Regime::supercritical: return "supercritical";
    }
    return "unknown";
}

struct ExponentRegime {
    ExtendedReal critical_exponent;
    Regime regime = Regime::subcritical;
};

inline void check_dimensions(int N, int m) {
    if (N < 2) throw DomainError("dimension N must be >= 2 (got " + std::to_string(N) + ")");
    if (m < 0 || m > N - 1)
        throw DomainError("m must satisfy 0 <= m <= N-1 (got m=" + std::to_string(m) +
                          ", N=" + std::to_string(N) + ")");
}

/// Validated problem data. Construction rejects anything outside
/// N >= 2, 0 <= m <= N-1, 0 < a < b < inf, p > 2.
class ShellConfig {
public:
    ShellConfig(int N, int m, double a, double b, double p) : N_(N), m_(m), a_(a), b_(b), p_(p) {
        check_dimensions(N, m);
        if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("inner radius a must be > 0");
        if (!(b > a) || !std::isfinite(b)) throw DomainError("outer radius b must satisfy a < b < inf");
        if (!(p > 2.0) || !std::isfinite(p)) throw DomainError("exponent p must be finite and > 2");
    }

    int N() const { return N_; }
    int m() const { return m_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double p() const { return p_; }

    ShellConfig with_p(double p) const { return {N_, m_, a_, b_, p}; }
    ShellConfig scaled(double lambda) const { return {N_, m_, lambda * a_, lambda * b_, p_}; }

    friend bool operator==(const ShellConfig&, const ShellConfig&) = default;

private:
    int N_;
    int m_;
    double a_;
    double b_;
    double p_;
};

/// 2(N-m)/(N-m-2) when m < N-2, infinity when m is N-2 or N-1.
inline ExtendedReal critical_exponent(int N, int m) {
    check_dimensions(N, m);
    if (m >= N - 2) return ExtendedReal::infinity();
    const int k = N - m;
    return ExtendedReal(2.0 * k / (k - 2.0));
}

/// Exact-arithmetic variant for any field type T constructible from int
/// (double, boost::rational, ...). Only valid when m < N-2.
template <class T>
T critical_exponent_finite(int N, int m) {
    check_dimensions(N, m);
    if (m >= N - 2) throw DomainError("critical exponent is infinite for m >= N-2");
    const int k = N - m;
    return T(2 * k) / T(k - 2);
}

inline int reduced_dimension(int N, int m) { return N - m - 1; }
inline int reduced_dimension(const ShellConfig& cfg) { return reduced_dimension(cfg.N(), cfg.m()); }

inline ExponentRegime classify_regime(int N, int m, double p) {
    ExponentRegime out;
    out.critical_exponent = critical_exponent(N, m);
    if (out.critical_exponent > p)
        out.regime = Regime::subcritical;
    else if (out.critical_exponent == p)
        out.regime = Regime::critical;
    else
        out.regime = Regime::supercritical;
    return out;
}

inline ExponentRegime classify_regime(const ShellConfig& cfg) {
    return classify_regime(cfg.N(), cfg.m(), cfg.p());
}

/// Surface area of the unit sphere S^k in R^{k+1}.
inline double sphere_area(int k) {
    if (k < 0) throw DomainError("sphere_area: k must be >= 0");
    const double h = 0.5 * (k + 1);
    return 2.0 * std::pow(M_PI, h) / std::tgamma(h);
}

} // namespace sle
