#include "semalloc/channel.hpp"

#include "semalloc/errors.hpp"

#include <cmath>
#include <fmt/core.h>

namespace semalloc {

void ChannelParams::validate() const
{
    if (!std::isfinite(h0_db) || !std::isfinite(d_m) || !std::isfinite(d0_m) || !std::isfinite(alpha) ||
        !std::isfinite(noise_dbm)) {
        throw DomainError("channel parameters must be finite");
    }
    if (!(d_m > 0.0) || !(d0_m > 0.0)) {
        throw DomainError(fmt::format("channel distances must be positive (d={}, d0={})", d_m, d0_m));
    }
    if (alpha < 0.0) {
        throw DomainError(fmt::format("path-loss exponent alpha={} must be non-negative; the gain applies "
                                      "(d/d0)^(-alpha)",
                                      alpha));
    }
}

void ChannelState::validate() const
{
    if (!(gain > 0.0) || !(noise_w > 0.0) || !std::isfinite(gain) || !std::isfinite(noise_w)) {
        throw DomainError(fmt::format("channel state needs positive finite gain and noise (gain={}, noise={})", gain,
                                      noise_w));
    }
}

FadingMode parse_fading_mode(const std::string& s)
{
    if (s == "deterministic") {
        return FadingMode::deterministic;
    }
    if (s == "rayleigh") {
        return FadingMode::rayleigh;
    }
    throw ParseError(fmt::format("unknown fading mode '{}' (expected deterministic|rayleigh)", s));
}

std::string to_string(FadingMode mode)
{
    return mode == FadingMode::deterministic ? "deterministic" : "rayleigh";
}

double db_to_linear(double db)
{
    return std::pow(10.0, db / 10.0);
}

double linear_to_db(double linear)
{
    return 10.0 * std::log10(linear);
}

double dbm_to_watt(double dbm)
{
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

double watt_to_dbm(double watt)
{
    return 10.0 * std::log10(watt) + 30.0;
}

double path_loss_linear(const ChannelParams& p)
{
    return db_to_linear(p.h0_db) * std::pow(p.d_m / p.d0_m, -p.alpha);
}

std::vector<double> sample_fading(RandomSeed seed, std::size_t n)
{
    if (n == 0) {
        throw DomainError("sample_fading: n must be at least 1");
    }
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& v : out) {
        // Each quadrature component has variance 1/2.
        const double re = rng.normal();
        const double im = rng.normal();
        v = 0.5 * (re * re + im * im);
    }
    return out;
}

ChannelState make_channel_state(const ChannelParams& p, double fading)
{
    p.validate();
    ChannelState s{path_loss_linear(p) * fading, dbm_to_watt(p.noise_dbm), fading};
    s.validate();
    return s;
}

std::vector<ChannelState> realize_channels(const ChannelParams& p, FadingMode mode, RandomSeed seed,
                                           std::size_t n_streams, bool independent)
{
    std::vector<ChannelState> out;
    out.reserve(n_streams);
    if (mode == FadingMode::deterministic) {
        for (std::size_t i = 0; i < n_streams; ++i) {
            out.push_back(make_channel_state(p, 1.0));
        }
        return out;
    }
    const auto fades = sample_fading(seed, independent ? n_streams : 1);
    for (std::size_t i = 0; i < n_streams; ++i) {
        out.push_back(make_channel_state(p, fades[independent ? i : 0]));
    }
    return out;
}

double snr(double q_w, const ChannelState& state)
{
    if (!(q_w >= 0.0)) {
        throw DomainError(fmt::format("snr: power {} W is negative", q_w));
    }
    return q_w * state.gain / state.noise_w;
}

} // namespace semalloc
