#pragma once

#include <cstddef>
#include <vector>

#include "plnav/nn/distributions.hpp"
#include "plnav/nn/policy.hpp"
#include "plnav/pseudolaser.hpp"

namespace plnav::rl {

/// Contiguous entries replayed as one LSTM window from a stored hidden state.
struct Segment {
    std::size_t begin = 0;
    std::size_t end = 0;
    nn::HiddenState initial;

    std::size_t length() const noexcept { return end - begin; }
};

/// Consecutive entries of one agent within one episode. A stream ends either with a terminal
/// transition or with a bootstrap-only entry holding the value of the state that follows.
struct Stream {
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Flat storage of collected experience. Bootstrap-only entries carry an observation and a
/// value but no action and never contribute to the loss.
struct RolloutBuffer {
    std::vector<Observation> observations;
    std::vector<nn::ActionVec> actions;   ///< raw Gaussian samples
    std::vector<double> log_probs;
    std::vector<nn::ActionVec> old_means;
    std::vector<nn::ActionVec> old_log_stds;
    std::vector<double> values;
    std::vector<double> rewards;
    std::vector<unsigned char> terminals;
    std::vector<unsigned char> bootstrap_only;
    std::vector<double> advantages;
    std::vector<double> returns;

    std::vector<Segment> segments;
    std::vector<Stream> streams;

    std::size_t size() const noexcept { return observations.size(); }
    std::size_t transition_count() const noexcept;

    /// Checks layout invariants: segments tile streams, no segment continues past a terminal
    /// entry, bootstrap entries only close streams.
    void validate() const;
};

} // namespace plnav::rl
