#pragma once

#include "semalloc/channel.hpp"

#include <string>

namespace semalloc {

// psi = a / log2(M) * Q(sqrt(b * snr)), clamped to 0.5.
struct ModulationScheme {
    std::string name = "bpsk";
    int order = 2;
    double a = 1.0;
    double b = 2.0;

    int bits_per_symbol() const;
    void validate() const;
};

namespace modulation {

// Smallest BER handed to the Q inverse; requests below it are clamped up.
inline constexpr double kMinBer = 1e-15;

ModulationScheme bpsk();
// Rectangular 2x4 constellation approximation.
ModulationScheme qam8();
// Gray-coded square 16-QAM.
ModulationScheme qam16();
ModulationScheme custom(int order, double a, double b);

// "bpsk", "8qam", "16qam". Throws ParseError for anything else.
ModulationScheme preset(const std::string& name);

} // namespace modulation

double ber_from_snr(const ModulationScheme& m, double snr);

// Largest reachable BER, attained at zero power: ber_from_snr(m, 0).
double max_ber(const ModulationScheme& m);

// Inverse of ber_from_snr on (0, max_ber]. Returns 0 at max_ber. BERs in
// [0, kMinBer) are clamped to kMinBer. DomainError for psi < 0 or
// psi > max_ber.
double snr_from_ber(const ModulationScheme& m, double psi);

// Per-symbol power achieving `psi` on `state`.
double power_from_ber(const ModulationScheme& m, const ChannelState& state, double psi);

// d power_from_ber / d psi (always <= 0).
double power_from_ber_derivative(const ModulationScheme& m, const ChannelState& state, double psi);

} // namespace semalloc
