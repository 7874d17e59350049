#include "remtrack/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace remtrack {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

} // namespace

channel_spec channel_spec::direct(double p_s) {
    require(p_s >= 0.0 && p_s <= 1.0, "channel: p_s must lie in [0,1]");
    channel_spec ch;
    ch.mode = channel_mode::direct;
    ch.p_s = p_s;
    return ch;
}

channel_spec channel_spec::physical(double p_tx, double r, double beta, double sigma2, double gamma) {
    require(p_tx > 0.0, "channel: p_tx must be positive");
    require(r > 0.0, "channel: r must be positive");
    require(beta > 2.0, "channel: beta must exceed 2");
    require(sigma2 > 0.0, "channel: sigma2 must be positive");
    require(gamma >= 0.0, "channel: gamma must be >= 0");
    channel_spec ch;
    ch.mode = channel_mode::physical;
    ch.p_tx = p_tx;
    ch.r = r;
    ch.beta = beta;
    ch.sigma2 = sigma2;
    ch.gamma = gamma;
    ch.p_s = std::exp(-gamma * sigma2 / (p_tx * std::pow(r, -beta)));
    return ch;
}

double success_probability(const channel_spec& ch) {
    return ch.p_s;
}

bool realize(double p_s, double u) {
    require(p_s >= 0.0 && p_s <= 1.0, "realize: p_s must lie in [0,1]");
    require(u >= 0.0 && u < 1.0, "realize: u must lie in [0,1)");
    return u < p_s;
}

bool realize_fading(const channel_spec& ch, double g) {
    if (ch.mode != channel_mode::physical)
        throw std::logic_error("realize_fading: channel has no physical parameters");
    require(g >= 0.0, "realize_fading: gain must be >= 0");
    const double threshold = ch.gamma * ch.sigma2 / (ch.p_tx * std::pow(ch.r, -ch.beta));
    return g > threshold;
}

double gamma_from_db(double db) {
    return std::pow(10.0, db / 10.0);
}

} // namespace remtrack
