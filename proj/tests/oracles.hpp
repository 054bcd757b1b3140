#pragma once

// Reference computations used by the tests. They deliberately avoid the
// library's own numerics so that agreement means something.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace oracle {

inline double normal_pdf(double x)
{
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb)
{
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                       double whole, double eps, int depth)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(f, a, m, fa, flm, fm);
    const double right = simpson(f, m, b, fm, frm, fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * eps) {
        return left + right + delta / 15.0;
    }
    return adaptive(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           adaptive(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

} // namespace detail

// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b, double eps = 1e-15)
{
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    return detail::adaptive(f, a, b, fa, fm, fb, detail::simpson(f, a, b, fa, fm, fb), eps, 50);
}

// Gaussian tail by quadrature; the integrand is negligible 40 units past x.
inline double q_tail(double x)
{
    if (x < 0.0) {
        return 1.0 - q_tail(-x);
    }
    // Tolerance relative to the size of the answer, roughly phi(x) / (x + 1).
    return integrate(normal_pdf, x, x + 40.0, 1e-13 * normal_pdf(x) / (x + 1.0));
}

// Extended-precision inverse of the Gaussian tail, by Newton on erfcl.
inline long double q_inverse_ld(long double p)
{
    if (p > 0.5L) {
        return -q_inverse_ld(1.0L - p);
    }
    long double x = 0.0L;
    for (int i = 0; i < 200; ++i) {
        const long double q = 0.5L * std::erfc(x / std::sqrt(2.0L));
        const long double pdf = std::exp(-0.5L * x * x) / std::sqrt(2.0L * 3.14159265358979323846264338L);
        const long double step = (q - p) / pdf;
        x += step;
        if (std::fabs(step) < 1e-19L * (1.0L + std::fabs(x))) {
            break;
        }
    }
    return x;
}

// Plain bisection for an increasing or decreasing f with a sign change.
inline double root(const std::function<double(double)>& f, double lo, double hi, int iters = 200)
{
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Perception surface, written out independently of the library.
struct Surface {
    double p0, pmax, tau1, tau2, beta1, beta2;

    double operator()(double x, double y) const
    {
        return pmax - (pmax - p0) * std::exp(-std::pow(x / tau1, beta1) - std::pow(y / tau2, beta2));
    }

    // Same closed form in extended precision, for finite differences.
    long double value_ld(long double x, long double y) const
    {
        return pmax - (static_cast<long double>(pmax) - p0) *
                          std::exp(-std::pow(x / tau1, static_cast<long double>(beta1)) -
                                   std::pow(y / tau2, static_cast<long double>(beta2)));
    }

    // psi2 on the level set P = target, from the closed form.
    double psi2_at(double psi1, double target) const
    {
        const double e = -std::log((pmax - target) / (pmax - p0)) - std::pow(psi1 / tau1, beta1);
        return e <= 0.0 ? 0.0 : tau2 * std::pow(e, 1.0 / beta2);
    }
};

inline double rel_err(double got, double want)
{
    return std::fabs(got - want) / std::max(std::fabs(want), std::numeric_limits<double>::min());
}

inline std::vector<double> logspace(double lo, double hi, int n)
{
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    }
    return v;
}

// Normal-approximation binomial band at z standard deviations.
inline bool within_binomial(std::uint64_t errors, std::uint64_t n, double p, double z = 3.0)
{
    const double mean = static_cast<double>(n) * p;
    const double sd = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
    return std::fabs(static_cast<double>(errors) - mean) <= z * sd;
}

// Small XML well-formedness check: balanced tags, quoted attributes, legal
// entity references. Returns an empty string on success.
inline std::string xml_problem(const std::string& s)
{
    std::vector<std::string> stack;
    std::size_t i = 0;
    bool root_seen = false;
    while (i < s.size()) {
        if (s[i] == '&') {
            const auto semi = s.find(';', i);
            if (semi == std::string::npos) {
                return "unterminated entity";
            }
            const std::string ent = s.substr(i + 1, semi - i - 1);
            if (ent != "amp" && ent != "lt" && ent != "gt" && ent != "quot" && ent != "apos" && ent.rfind('#', 0) != 0) {
                return "unknown entity &" + ent + ";";
            }
            i = semi + 1;
            continue;
        }
        if (s[i] != '<') {
            if (s[i] == '>') {
                return "stray '>'";
            }
            ++i;
            continue;
        }
        if (s.compare(i, 4, "<!--") == 0) {
            const auto end = s.find("-->", i);
            if (end == std::string::npos) {
                return "unterminated comment";
            }
            i = end + 3;
            continue;
        }
        if (s.compare(i, 2, "<?") == 0) {
            const auto end = s.find("?>", i);
            if (end == std::string::npos) {
                return "unterminated declaration";
            }
            i = end + 2;
            continue;
        }
        const bool closing = i + 1 < s.size() && s[i + 1] == '/';
        std::size_t j = i + (closing ? 2 : 1);
        const std::size_t name_start = j;
        while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '-' || s[j] == ':' || s[j] == '_')) {
            ++j;
        }
        const std::string name = s.substr(name_start, j - name_start);
        if (name.empty()) {
            return "empty tag name";
        }
        bool self_closing = false;
        while (j < s.size() && s[j] != '>') {
            if (s[j] == '"' || s[j] == '\'') {
                const char qc = s[j];
                const auto end = s.find(qc, j + 1);
                if (end == std::string::npos) {
                    return "unterminated attribute";
                }
                if (s.substr(j + 1, end - j - 1).find('<') != std::string::npos) {
                    return "'<' inside attribute";
                }
                j = end + 1;
                continue;
            }
            if (s[j] == '/' && j + 1 < s.size() && s[j + 1] == '>') {
                self_closing = true;
            } else if (s[j] == '<') {
                return "'<' inside tag " + name;
            }
            ++j;
        }
        if (j >= s.size()) {
            return "unterminated tag " + name;
        }
        if (closing) {
            if (stack.empty() || stack.back() != name) {
                return "mismatched </" + name + ">";
            }
            stack.pop_back();
        } else if (!self_closing) {
            if (stack.empty() && root_seen) {
                return "second root element";
            }
            root_seen = true;
            stack.push_back(name);
        }
        i = j + 1;
    }
    return stack.empty() ? std::string{} : "unclosed <" + stack.back() + ">";
}

inline std::size_t count_substr(const std::string& s, const std::string& needle)
{
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

} // namespace oracle
