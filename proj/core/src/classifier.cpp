#include "polyberg/classifier.hpp"

#include "polyberg/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace polyberg {

namespace {

using boost::multiprecision::cpp_int;

cpp_int pow10(long n) {
    cpp_int r = 1;
    for (long k = 0; k < n; ++k) r *= 10;
    return r;
}

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

Exact parse_decimal(std::string s) {
    bool negative = false;
    if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
        negative = s[0] == '-';
        s.erase(0, 1);
    }
    long exponent = 0;
    if (const auto e = s.find_first_of("eE"); e != std::string::npos) {
        std::string tail = s.substr(e + 1);
        s.erase(e);
        bool neg_exp = false;
        if (!tail.empty() && (tail[0] == '+' || tail[0] == '-')) {
            neg_exp = tail[0] == '-';
            tail.erase(0, 1);
        }
        if (!all_digits(tail) || tail.size() > 6) throw DomainError("malformed exponent");
        exponent = std::stol(tail) * (neg_exp ? -1 : 1);
    }
    std::string digits = s;
    if (const auto dot = s.find('.'); dot != std::string::npos) {
        digits = s.substr(0, dot) + s.substr(dot + 1);
        exponent -= static_cast<long>(s.size() - dot - 1);
        if (s.find('.', dot + 1) != std::string::npos) throw DomainError("malformed number");
    }
    if (!all_digits(digits)) throw DomainError("malformed number");
    // cpp_int reads a leading zero as an octal prefix.
    digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
    Exact value{cpp_int(digits)};
    if (exponent > 0) value *= pow10(exponent);
    if (exponent < 0) value /= Exact(pow10(-exponent));
    return negative ? Exact(-value) : value;
}

void check_domain(const Exact& p, const Exact& alpha) {
    if (!(p > 1)) throw DomainError("p must exceed 1");
    if (!(alpha > 0 && alpha < 2)) throw DomainError("alpha_max must lie in (0, 2)");
}

const Exact kFourThirds(4, 3);

} // namespace

Exact parse_exact(const std::string& text) {
    std::string s;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    }
    if (s.empty()) throw DomainError("empty number");
    if (const auto slash = s.find('/'); slash != std::string::npos) {
        const Exact num = parse_decimal(s.substr(0, slash));
        const Exact den = parse_decimal(s.substr(slash + 1));
        if (den == 0) throw DomainError("zero denominator");
        return num / den;
    }
    return parse_decimal(s);
}

Exact exact_from_double(double value) {
    if (!std::isfinite(value)) throw DomainError("value is not finite");
    int e = 0;
    const double m = std::frexp(value, &e);
    // m * 2^53 is an integer.
    Exact r{cpp_int(static_cast<long long>(std::ldexp(m, 53)))};
    e -= 53;
    cpp_int two = 1;
    two <<= std::abs(e);
    return e >= 0 ? Exact(r * two) : Exact(r / two);
}

std::string to_string(const Exact& value) {
    const cpp_int num = boost::multiprecision::numerator(value);
    const cpp_int den = boost::multiprecision::denominator(value);
    return den == 1 ? num.str() : num.str() + "/" + den.str();
}

bool projection_bounded(const Exact& p, const Exact& alpha) {
    check_domain(p, alpha);
    if (p <= 2) return (2 - p) * (alpha - 1) < 2 * (p - 1);
    return (p - 2) * (alpha - 1) < 2;
}

bool projection_bounded(double p, double alpha) {
    return projection_bounded(exact_from_double(p), exact_from_double(alpha));
}

bool main1_hypothesis(const Exact& p, const Exact& alpha) {
    check_domain(p, alpha);
    if (p > 4) return alpha < 1 + Exact(2) / (p - 2);
    if (p < kFourThirds) return alpha < 1 + 2 * (p - 1) / (2 - p);
    return true;
}

bool main1_hypothesis(double p, double alpha) {
    return main1_hypothesis(exact_from_double(p), exact_from_double(alpha));
}

std::string regime(const Exact& p) {
    if (p > 4) return "p>4";
    if (p < kFourThirds) return "p<4/3";
    return "no-restriction";
}

Exact weighted_exponent_threshold(const Exact& p, const Exact& alpha) {
    check_domain(p, alpha);
    if (p > 4) {
        if (alpha < 1 + Exact(2) / (p - 2)) throw DomainError("alpha_max is below the unboundedness threshold 1 + 2/(p-2)");
        return (p - 2) * (alpha - 1) - 2;
    }
    if (p < kFourThirds) {
        if (alpha < 1 + 2 * (p - 1) / (2 - p)) {
            throw DomainError("alpha_max is below the unboundedness threshold 1 + 2(p-1)/(2-p)");
        }
        return (2 - p) * (alpha - 1) - 2 * (p - 1);
    }
    throw DomainError("no weighted regime applies");
}

BoundednessVerdict classify(const Exact& p, const Exact& alpha, bool weighted) {
    BoundednessVerdict v;
    v.p = p;
    v.alpha_max = alpha;
    v.projection_bounded = projection_bounded(p, alpha);
    v.main1_hypothesis = main1_hypothesis(p, alpha);
    v.regime = regime(p);
    if (p < 2) v.projection_alpha_threshold = 1 + 2 * (p - 1) / (2 - p);
    if (p > 2) v.projection_alpha_threshold = 1 + Exact(2) / (p - 2);
    if (p > 4) v.main1_alpha_threshold = 1 + Exact(2) / (p - 2);
    if (p < kFourThirds) v.main1_alpha_threshold = 1 + 2 * (p - 1) / (2 - p);
    if (weighted && v.regime != "no-restriction") {
        try {
            v.weighted_t_min = weighted_exponent_threshold(p, alpha);
        } catch (const DomainError&) {
            // alpha below the threshold: the unweighted theorem already applies.
        }
    }
    return v;
}

} // namespace polyberg
