#pragma once

#include "semalloc/channel.hpp"
#include "semalloc/modulation.hpp"
#include "semalloc/rng.hpp"
#include "semalloc/solvers.hpp"

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace semalloc {

// Gray-coded rectangular constellation with unit average symbol energy.
// The in-phase axis carries ceil(k/2) bits, quadrature floor(k/2); BPSK is
// the one-axis case.
class Constellation {
public:
    explicit Constellation(int order);

    int bits_per_symbol() const { return bits_i_ + bits_q_; }
    int order() const { return 1 << bits_per_symbol(); }

    // Point for the symbol whose bits are given MSB-first in `label`.
    std::complex<double> point(unsigned label) const;

    // Minimum-distance decision on r / amplitude, returned as a bit label.
    // amplitude >= 0; amplitude 0 puts every threshold at the origin.
    unsigned decide(std::complex<double> r, double amplitude) const;

    // Mean |z|^2 over all points.
    double mean_energy() const;

private:
    int bits_i_ = 1;
    int bits_q_ = 0;
    double scale_ = 1.0;
};

inline constexpr std::uint64_t kMinSimBits = 10000;

struct SimConfig {
    std::uint64_t n_bits = 1000000;
    RandomSeed seed{1};
    unsigned threads = 0;  // 0: hardware concurrency

    void validate() const;
};

struct BerEstimate {
    double psi = 0.0;
    std::uint64_t errors = 0;
    std::uint64_t n_bits = 0;
    // Wilson score interval at three standard deviations.
    double ci_low = 0.0;
    double ci_high = 0.0;
};

// Three-sigma Wilson score interval for `errors` out of `n`.
std::pair<double, double> binomial_ci(std::uint64_t errors, std::uint64_t n, double z = 3.0);

// Uncoded link simulation: random bits -> constellation -> y = sqrt(q) h z + n
// -> coherent minimum-distance detection -> Gray demapping. Work is split into
// fixed-size chunks with derived seeds, so the result depends only on cfg.
BerEstimate simulate_ber(const ModulationScheme& m, const ChannelState& state, double q_w, const SimConfig& cfg);

struct StreamPayload {
    std::vector<std::uint8_t> bits;  // one bit per element, 0 or 1
};

StreamPayload random_payload(std::size_t n_bits, RandomSeed seed);

// Flip each bit independently with probability psi in [0, 0.5].
StreamPayload corrupt_payload(const StreamPayload& payload, double psi, RandomSeed seed);

std::size_t hamming_distance(const StreamPayload& a, const StreamPayload& b);

struct StreamReport {
    std::string stream;
    double q_w = 0.0;
    double snr_db = 0.0;
    double psi_analytic = 0.0;
    BerEstimate empirical;

    bool ci_violation() const;
};

struct EndToEndReport {
    std::array<StreamReport, 2> streams;
    double p_empirical = 0.0;  // surface at the simulated BERs
    double p_analytic = 0.0;   // surface at the allocation's BERs
    double gap = 0.0;          // |p_empirical - target|
};

EndToEndReport end_to_end_check(const ProblemSpec& p, const Allocation& alloc, const SimConfig& cfg);

} // namespace semalloc
