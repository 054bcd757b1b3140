#pragma once

#include "semalloc/rng.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace semalloc {

// Log-distance path loss with additive noise.
//
// Sign convention: alpha is stored as a positive exponent and the gain is
// 10^(h0_db/10) * (d/d0)^(-alpha). alpha = 3.4 at d = 100 m, d0 = 1 m and
// h0 = -30 dB gives -98 dB.
struct ChannelParams {
    double h0_db = -30.0;
    double d_m = 100.0;
    double d0_m = 1.0;
    double alpha = 3.4;
    double noise_dbm = -110.0;

    void validate() const;
};

// One quasi-static realisation: |h|^2 = path_loss * fading, held for a whole
// transmission.
struct ChannelState {
    double gain = 1.0;
    double noise_w = 1.0;
    double fading = 1.0;

    void validate() const;
};

enum class FadingMode { deterministic, rayleigh };

FadingMode parse_fading_mode(const std::string& s);
std::string to_string(FadingMode mode);

double db_to_linear(double db);
double linear_to_db(double linear);
double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);

double path_loss_linear(const ChannelParams& p);

// |h~|^2 samples: squared magnitude of a unit-variance circular complex
// Gaussian, i.e. unit-mean exponential.
std::vector<double> sample_fading(RandomSeed seed, std::size_t n);

ChannelState make_channel_state(const ChannelParams& p, double fading = 1.0);

// Channel states for `n_streams` orthogonal streams. Deterministic mode pins
// fading to 1. Rayleigh mode draws one shared realisation unless
// `independent` is set, in which case each stream gets its own.
std::vector<ChannelState> realize_channels(const ChannelParams& p, FadingMode mode, RandomSeed seed,
                                           std::size_t n_streams, bool independent = false);

// Received SNR q |h|^2 / sigma^2.
double snr(double q_w, const ChannelState& state);

} // namespace semalloc
