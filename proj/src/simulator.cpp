#include "semalloc/simulator.hpp"

#include "semalloc/errors.hpp"
#include "semalloc/perception.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <fmt/core.h>
#include <limits>
#include <thread>

namespace semalloc {

namespace {

unsigned gray(unsigned j)
{
    return j ^ (j >> 1);
}

unsigned gray_inverse(unsigned g)
{
    unsigned j = 0;
    for (; g != 0; g >>= 1) {
        j ^= g;
    }
    return j;
}

double pam_energy(int bits)
{
    const double m = static_cast<double>(1 << bits);
    return (m * m - 1.0) / 3.0;
}

// Amplitude index (0..m-1) -> level in units of the half-spacing.
double pam_level(unsigned index, int bits)
{
    return 2.0 * index - ((1 << bits) - 1.0);
}

unsigned pam_decide(double r, int bits, double step)
{
    const int m = 1 << bits;
    unsigned index = 0;
    for (int k = 0; k < m - 1; ++k) {
        // Thresholds sit halfway between adjacent levels.
        if (r > (2.0 * k - m + 2.0) * step) {
            ++index;
        }
    }
    return index;
}

} // namespace

Constellation::Constellation(int order)
{
    if (order < 2 || !std::has_single_bit(static_cast<unsigned>(order))) {
        throw DomainError(fmt::format("constellation order {} must be a power of two >= 2", order));
    }
    const int k = std::countr_zero(static_cast<unsigned>(order));
    bits_i_ = (k + 1) / 2;
    bits_q_ = k / 2;
    scale_ = 1.0 / std::sqrt(pam_energy(bits_i_) + (bits_q_ > 0 ? pam_energy(bits_q_) : 0.0));
}

std::complex<double> Constellation::point(unsigned label) const
{
    const unsigned gi = label >> bits_q_;
    const unsigned gq = label & ((1U << bits_q_) - 1U);
    const double re = pam_level(gray_inverse(gi), bits_i_) * scale_;
    const double im = bits_q_ > 0 ? pam_level(gray_inverse(gq), bits_q_) * scale_ : 0.0;
    return {re, im};
}

unsigned Constellation::decide(std::complex<double> r, double amplitude) const
{
    const double step = amplitude * scale_;
    const unsigned gi = gray(pam_decide(r.real(), bits_i_, step));
    const unsigned gq = bits_q_ > 0 ? gray(pam_decide(r.imag(), bits_q_, step)) : 0U;
    return (gi << bits_q_) | gq;
}

double Constellation::mean_energy() const
{
    double acc = 0.0;
    for (int label = 0; label < order(); ++label) {
        acc += std::norm(point(static_cast<unsigned>(label)));
    }
    return acc / order();
}

void SimConfig::validate() const
{
    if (n_bits < kMinSimBits) {
        throw DomainError(fmt::format("simulation needs at least {} bits per stream, got {}", kMinSimBits, n_bits));
    }
}

std::pair<double, double> binomial_ci(std::uint64_t errors, std::uint64_t n, double z)
{
    if (n == 0) {
        return {0.0, 1.0};
    }
    const double nn = static_cast<double>(n);
    const double phat = static_cast<double>(errors) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (phat + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

constexpr std::uint64_t kChunkBits = 1U << 16;

std::uint64_t simulate_chunk(const Constellation& cons, std::complex<double> h, double q_w, double noise_w,
                             std::uint64_t n_bits, RandomSeed seed)
{
    Rng rng(seed);
    const int k = cons.bits_per_symbol();
    const double noise_sd = std::sqrt(noise_w / 2.0);
    const double amplitude = std::sqrt(q_w);
    std::uint64_t errors = 0;
    for (std::uint64_t sent = 0; sent < n_bits; sent += static_cast<std::uint64_t>(k)) {
        unsigned label = 0;
        for (int b = 0; b < k; ++b) {
            label = (label << 1) | static_cast<unsigned>(rng.bit());
        }
        const std::complex<double> noise(noise_sd * rng.normal(), noise_sd * rng.normal());
        const std::complex<double> y = amplitude * h * cons.point(label) + noise;
        const unsigned decided = cons.decide(y / h, amplitude);
        unsigned diff = label ^ decided;
        const auto remaining = n_bits - sent;
        if (remaining < static_cast<std::uint64_t>(k)) {
            // Only the leading `remaining` bits of the last symbol count.
            diff >>= (k - static_cast<int>(remaining));
        }
        errors += static_cast<std::uint64_t>(std::popcount(diff));
    }
    return errors;
}

unsigned worker_count(unsigned requested, std::size_t jobs)
{
    if (requested == 0) {
        requested = std::max(1U, std::thread::hardware_concurrency());
    }
    return static_cast<unsigned>(std::min<std::size_t>(requested, jobs));
}

} // namespace

BerEstimate simulate_ber(const ModulationScheme& m, const ChannelState& state, double q_w, const SimConfig& cfg)
{
    cfg.validate();
    m.validate();
    state.validate();
    if (!(q_w >= 0.0) || !std::isfinite(q_w)) {
        throw DomainError(fmt::format("simulate_ber: power {} must be finite and non-negative", q_w));
    }
    const Constellation cons(m.order);
    // Quasi-static coefficient with |h|^2 = gain and a seeded phase.
    Rng phase_rng(derive_seed(cfg.seed, std::numeric_limits<std::uint64_t>::max()));
    const double phase = 2.0 * numerics::kPi * phase_rng.uniform();
    const std::complex<double> h = std::polar(std::sqrt(state.gain), phase);

    const std::uint64_t chunks = (cfg.n_bits + kChunkBits - 1) / kChunkBits;
    std::vector<std::uint64_t> errors(chunks, 0);
    auto run = [&](std::uint64_t c) {
        const std::uint64_t bits = std::min(kChunkBits, cfg.n_bits - c * kChunkBits);
        errors[c] = simulate_chunk(cons, h, q_w, state.noise_w, bits, derive_seed(cfg.seed, c));
    };
    const unsigned workers = worker_count(cfg.threads, chunks);
    if (workers <= 1) {
        for (std::uint64_t c = 0; c < chunks; ++c) {
            run(c);
        }
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::uint64_t c = next++; c < chunks; c = next++) {
                    run(c);
                }
            });
        }
    }

    BerEstimate est;
    est.n_bits = cfg.n_bits;
    for (auto e : errors) {
        est.errors += e;
    }
    est.psi = static_cast<double>(est.errors) / static_cast<double>(est.n_bits);
    std::tie(est.ci_low, est.ci_high) = binomial_ci(est.errors, est.n_bits);
    return est;
}

StreamPayload random_payload(std::size_t n_bits, RandomSeed seed)
{
    Rng rng(seed);
    StreamPayload p;
    p.bits.resize(n_bits);
    for (auto& b : p.bits) {
        b = static_cast<std::uint8_t>(rng.bit());
    }
    return p;
}

StreamPayload corrupt_payload(const StreamPayload& payload, double psi, RandomSeed seed)
{
    if (!(psi >= 0.0) || !(psi <= 0.5)) {
        throw DomainError(fmt::format("corrupt_payload: flip probability {} outside [0, 0.5]", psi));
    }
    Rng rng(seed);
    StreamPayload out = payload;
    for (auto& b : out.bits) {
        if (rng.uniform() < psi) {
            b ^= 1U;
        }
    }
    return out;
}

std::size_t hamming_distance(const StreamPayload& a, const StreamPayload& b)
{
    if (a.bits.size() != b.bits.size()) {
        throw DomainError("hamming_distance: payload lengths differ");
    }
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        d += a.bits[i] != b.bits[i] ? 1U : 0U;
    }
    return d;
}

bool StreamReport::ci_violation() const
{
    return psi_analytic < empirical.ci_low || psi_analytic > empirical.ci_high;
}

EndToEndReport end_to_end_check(const ProblemSpec& p, const Allocation& alloc, const SimConfig& cfg)
{
    if (!alloc.feasible) {
        throw DomainError("end_to_end_check needs a feasible allocation");
    }
    EndToEndReport report;
    std::array<double, 2> psi_hat{};
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& st = p.streams[i];
        SimConfig stream_cfg = cfg;
        stream_cfg.seed = derive_seed(cfg.seed, i);
        auto& row = report.streams[i];
        row.stream = st.name.empty() ? fmt::format("stream{}", i + 1) : st.name;
        row.q_w = alloc.q[i];
        row.snr_db = linear_to_db(snr(alloc.q[i], st.channel));
        row.psi_analytic = alloc.psi[i];
        row.empirical = simulate_ber(st.modulation, st.channel, alloc.q[i], stream_cfg);
        psi_hat[i] = std::min(row.empirical.psi, kMaxBerDomain);
    }
    report.p_empirical = eval_surface(p.surface, psi_hat[0], psi_hat[1]);
    report.p_analytic = eval_surface(p.surface, alloc.psi[0], alloc.psi[1]);
    report.gap = std::abs(report.p_empirical - p.target);
    return report;
}

} // namespace semalloc
