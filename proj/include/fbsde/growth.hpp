#pragma once

#include <string>

namespace fbsde {

/// Nondecreasing modulus rho: R+ -> R+ controlling the z-Lipschitz growth
/// of the generator. Three parametric families are supported:
///   constant  rho(x) = c
///   power     rho(x) = c (1 + x^p)
///   log       rho(x) = c (1 + sqrt(log(1+x)))
struct GrowthFn {
    enum class Kind { Constant, Power, Log };

    Kind kind = Kind::Constant;
    double c = 0.0;
    double p = 1.0;  // exponent, power kind only

    double operator()(double x) const;

    // rho(2^n * q) evaluated without overflowing the argument.
    double at_pow2(double q, int n) const;

    static GrowthFn constant(double c) { return {Kind::Constant, c, 1.0}; }
    static GrowthFn power(double c, double p) { return {Kind::Power, c, p}; }
    static GrowthFn log(double c) { return {Kind::Log, c, 1.0}; }

    std::string str() const;
};

}  // namespace fbsde
