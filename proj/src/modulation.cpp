#include "semalloc/modulation.hpp"

#include "semalloc/errors.hpp"
#include "semalloc/numerics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fmt/core.h>

namespace semalloc {

int ModulationScheme::bits_per_symbol() const
{
    return std::countr_zero(static_cast<unsigned>(order));
}

void ModulationScheme::validate() const
{
    if (order < 2 || !std::has_single_bit(static_cast<unsigned>(order))) {
        throw DomainError(fmt::format("modulation '{}': order M={} must be a power of two >= 2", name, order));
    }
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError(fmt::format("modulation '{}': BER coefficients must be positive (a={}, b={})", name, a, b));
    }
}

namespace modulation {

ModulationScheme bpsk()
{
    return {"bpsk", 2, 1.0, 2.0};
}

ModulationScheme qam8()
{
    // 2x4 rectangular Gray layout: d_min^2 = 2/3 at unit energy gives
    // b = 1/3; 1.5 + 1 nearest-neighbour bit errors per 3 bits gives a = 2.5.
    return {"8qam", 8, 2.5, 1.0 / 3.0};
}

ModulationScheme qam16()
{
    return {"16qam", 16, 3.0, 0.2};
}

ModulationScheme custom(int order, double a, double b)
{
    ModulationScheme m{"custom", order, a, b};
    m.validate();
    return m;
}

ModulationScheme preset(const std::string& name)
{
    if (name == "bpsk") {
        return bpsk();
    }
    if (name == "8qam") {
        return qam8();
    }
    if (name == "16qam") {
        return qam16();
    }
    throw ParseError(fmt::format("unknown modulation '{}' (expected bpsk|8qam|16qam|custom)", name));
}

} // namespace modulation

namespace {

double coefficient(const ModulationScheme& m)
{
    return m.a / static_cast<double>(m.bits_per_symbol());
}

} // namespace

double ber_from_snr(const ModulationScheme& m, double snr)
{
    if (snr < 0.0 || std::isnan(snr)) {
        throw DomainError(fmt::format("ber_from_snr: negative SNR {}", snr));
    }
    return std::min(0.5, coefficient(m) * numerics::q_function(std::sqrt(m.b * snr)));
}

double max_ber(const ModulationScheme& m)
{
    return ber_from_snr(m, 0.0);
}

namespace {

// Q^{-1}(psi log2M / a), or 0 at the zero-power end of the branch.
double q_argument_inverse(const ModulationScheme& m, double psi)
{
    const double upper = max_ber(m);
    if (!(psi >= 0.0) || psi > upper) {
        throw DomainError(fmt::format("BER {} outside the reachable range [0, {}] of '{}'", psi, upper, m.name));
    }
    if (psi == upper) {
        return 0.0;
    }
    const double arg = std::max(psi, modulation::kMinBer) / coefficient(m);
    return arg >= 0.5 ? 0.0 : numerics::q_inverse(arg);
}

} // namespace

double snr_from_ber(const ModulationScheme& m, double psi)
{
    const double x = q_argument_inverse(m, psi);
    return x * x / m.b;
}

double power_from_ber(const ModulationScheme& m, const ChannelState& state, double psi)
{
    return snr_from_ber(m, psi) * state.noise_w / state.gain;
}

double power_from_ber_derivative(const ModulationScheme& m, const ChannelState& state, double psi)
{
    const double x = q_argument_inverse(m, psi);
    // q = c x^2, x = Q^{-1}(k psi), dx/dpsi = -k / phi(x).
    const double c = state.noise_w / (m.b * state.gain);
    const double k = 1.0 / coefficient(m);
    return -2.0 * c * x * k / numerics::normal_pdf(x);
}

} // namespace semalloc
