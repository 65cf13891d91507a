#include "fbsde/growth.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace fbsde {

double GrowthFn::operator()(double x) const {
    switch (kind) {
        case Kind::Constant:
            return c;
        case Kind::Power:
            return c * (1.0 + std::pow(x, p));
        case Kind::Log:
            return c * (1.0 + std::sqrt(std::log1p(x)));
    }
    return 0.0;
}

double GrowthFn::at_pow2(double q, int n) const {
    const double x = std::ldexp(q, n);
    if (std::isfinite(x)) return (*this)(x);
    // Argument overflowed; evaluate the family in log space where possible.
    switch (kind) {
        case Kind::Constant:
            return c;
        case Kind::Power:
            return std::numeric_limits<double>::infinity();
        case Kind::Log:
            // log(1 + 2^n q) ~= n log 2 + log q for huge arguments
            return c * (1.0 + std::sqrt(n * std::log(2.0) + std::log(q)));
    }
    return 0.0;
}

std::string GrowthFn::str() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Constant: os << "constant(" << c << ")"; break;
        case Kind::Power: os << "power(" << c << "," << p << ")"; break;
        case Kind::Log: os << "log(" << c << ")"; break;
    }
    return os.str();
}

}  // namespace fbsde
