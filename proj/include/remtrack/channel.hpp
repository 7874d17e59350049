#ifndef REMTRACK_CHANNEL_HPP
#define REMTRACK_CHANNEL_HPP

namespace remtrack {

enum class channel_mode { direct, physical };

/// Erasure channel for one-slot status updates. Either the success probability
/// is given directly, or it is derived from a Rayleigh-fading link budget as
/// exp(-gamma * sigma2 / (p_tx * r^-beta)) with gamma in linear scale.
struct channel_spec {
    channel_mode mode = channel_mode::direct;
    double p_s = 1.0;
    double p_tx = 0.0;   // transmit power, mW
    double r = 0.0;      // distance, m
    double beta = 0.0;   // path-loss exponent
    double sigma2 = 0.0; // noise power, mW
    double gamma = 0.0;  // SNR threshold, linear

    static channel_spec direct(double p_s);
    static channel_spec physical(double p_tx, double r, double beta, double sigma2, double gamma);
};

double success_probability(const channel_spec& ch);

/// Bernoulli outcome from a uniform draw: success iff u < p_s.
bool realize(double p_s, double u);

/// Outcome from a fading gain g: success iff g exceeds the decoding threshold
/// gamma * sigma2 / (p_tx * r^-beta). The boundary counts as failure.
bool realize_fading(const channel_spec& ch, double g);

/// dB -> linear: 10^(db/10).
double gamma_from_db(double db);

} // namespace remtrack

#endif
