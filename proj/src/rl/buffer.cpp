#include "plnav/rl/buffer.hpp"

#include <algorithm>

#include "plnav/error.hpp"

namespace plnav::rl {

std::size_t RolloutBuffer::transition_count() const noexcept
{
    return static_cast<std::size_t>(std::count(bootstrap_only.begin(), bootstrap_only.end(), 0));
}

void RolloutBuffer::validate() const
{
    const std::size_t n = size();
    if (actions.size() != n || log_probs.size() != n || old_means.size() != n || old_log_stds.size() != n ||
        values.size() != n || rewards.size() != n || terminals.size() != n || bootstrap_only.size() != n)
        throw InvariantError("rollout buffer: column lengths differ");

    std::size_t expected = 0;
    for (const Stream& s : streams) {
        if (s.begin != expected || s.end <= s.begin || s.end > n)
            throw InvariantError("rollout buffer: streams do not tile the buffer");
        for (std::size_t i = s.begin; i + 1 < s.end; ++i)
            if (terminals[i] || bootstrap_only[i])
                throw InvariantError("rollout buffer: stream continues past entry " + std::to_string(i));
        expected = s.end;
    }
    if (expected != n)
        throw InvariantError("rollout buffer: streams do not cover the buffer");

    std::size_t stream = 0;
    expected = 0;
    for (const Segment& seg : segments) {
        if (seg.begin != expected || seg.end <= seg.begin)
            throw InvariantError("rollout buffer: segments do not tile the buffer");
        while (stream < streams.size() && streams[stream].end <= seg.begin)
            ++stream;
        if (stream == streams.size() || seg.end > streams[stream].end)
            throw InvariantError("rollout buffer: segment crosses a stream boundary");
        expected = seg.end;
    }
    if (expected != n)
        throw InvariantError("rollout buffer: segments do not cover the buffer");
}

} // namespace plnav::rl
