#pragma once

#include <cmath>
#include <limits>

// Transcendentals built from + - * / only, so sampled values do not depend on the
// platform libm.
namespace pmf::detmath {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;

inline double exp(double x) {
    if (std::isnan(x)) return x;
    if (x > 709.0) return std::numeric_limits<double>::infinity();
    if (x < -745.0) return 0.0;
    double kf = x * 1.4426950408889634074;
    int k = static_cast<int>(kf < 0 ? kf - 0.5 : kf + 0.5);
    double r = (x - k * kLn2Hi) - k * kLn2Lo;
    double term = 1.0, sum = 1.0;
    for (int i = 1; i <= 16; ++i) {
        term = term * r / i;
        sum += term;
    }
    return std::ldexp(sum, k);
}

inline double log(double x) {
    if (std::isnan(x) || x < 0) return std::numeric_limits<double>::quiet_NaN();
    if (x == 0) return -std::numeric_limits<double>::infinity();
    if (std::isinf(x)) return x;
    int e = 0;
    double m = std::frexp(x, &e);
    if (m < 0.70710678118654752440) {
        m *= 2.0;
        e -= 1;
    }
    double f = (m - 1.0) / (m + 1.0);
    double f2 = f * f;
    double term = f, sum = 0.0;
    for (int k = 0; k < 14; ++k) {
        sum += term / (2 * k + 1);
        term *= f2;
    }
    return 2.0 * sum + e * kLn2Lo + e * kLn2Hi;
}

inline double atan_reduced(double x) {
    // |x| <= tan(pi/12)
    double x2 = x * x, term = x, sum = 0.0;
    for (int k = 0; k < 18; ++k) {
        double t = term / (2 * k + 1);
        sum += (k % 2 == 0) ? t : -t;
        term *= x2;
    }
    return sum;
}

inline double atan(double x) {
    if (std::isnan(x)) return x;
    bool neg = x < 0;
    if (neg) x = -x;
    bool inv = false;
    if (x > 1.0) {
        x = 1.0 / x;
        inv = true;
    }
    double r;
    const double t12 = 0.26794919243112270647;
    const double s3 = 1.73205080756887729353;
    if (x > t12)
        r = kPi / 6 + atan_reduced((x * s3 - 1.0) / (x + s3));
    else
        r = atan_reduced(x);
    if (inv) r = kPi / 2 - r;
    return neg ? -r : r;
}

inline double atan2(double y, double x) {
    if (x == 0 && y == 0) return 0.0;
    if (std::abs(x) >= std::abs(y)) {
        double a = atan(y / x);
        if (x > 0) return a;
        return y >= 0 ? a + kPi : a - kPi;
    }
    double a = atan(x / y);
    return y > 0 ? kPi / 2 - a : -kPi / 2 - a;
}

inline double acos(double c) {
    if (c >= 1.0) return 0.0;
    if (c <= -1.0) return kPi;
    return atan2(std::sqrt((1.0 - c) * (1.0 + c)), c);
}

}  // namespace pmf::detmath
