#include "metacure/agents/replay.hpp"

#include <algorithm>
#include <stdexcept>

namespace metacure::agents {

ReplayBuffer::ReplayBuffer(std::size_t n_tasks, std::size_t capacity_per_stream)
    : explorer_(n_tasks), exploiter_(n_tasks), capacity_(capacity_per_stream) {
  if (n_tasks == 0) throw std::invalid_argument("ReplayBuffer: no tasks");
  if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: zero capacity");
}

void ReplayBuffer::Stream::rebuild_cumulative() {
  cumulative.resize(rollouts.size());
  std::size_t acc = 0;
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    acc += rollouts[i].steps.size();
    cumulative[i] = acc;
  }
  transitions = acc;
}

void ReplayBuffer::add(Rollout r) {
  if (r.task >= explorer_.size())
    throw std::invalid_argument("ReplayBuffer::add: task index out of range");
  if (r.steps.empty())
    throw std::invalid_argument("ReplayBuffer::add: empty rollout");
  Stream& st = r.explorer ? explorer_[r.task] : exploiter_[r.task];
  st.rollouts.push_back(std::move(r));
  st.transitions += st.rollouts.back().steps.size();
  while (st.transitions > capacity_ && st.rollouts.size() > 1) {
    st.transitions -= st.rollouts.front().steps.size();
    st.rollouts.pop_front();
  }
  st.rebuild_cumulative();
}

const ReplayBuffer::Stream& ReplayBuffer::stream_at(std::size_t task,
                                                    bool explorer) const {
  if (task >= explorer_.size())
    throw std::invalid_argument("ReplayBuffer: task index out of range");
  return explorer ? explorer_[task] : exploiter_[task];
}

std::size_t ReplayBuffer::transition_count(std::size_t task, bool explorer) const {
  return stream_at(task, explorer).transitions;
}

std::size_t ReplayBuffer::rollout_count(std::size_t task, bool explorer) const {
  return stream_at(task, explorer).rollouts.size();
}

std::vector<ReplayBuffer::Ref> ReplayBuffer::sample(std::size_t task, bool explorer,
                                                    std::size_t n,
                                                    numkit::Rng& rng) const {
  const Stream& st = stream_at(task, explorer);
  if (st.transitions == 0)
    throw std::invalid_argument("ReplayBuffer::sample: stream is empty");
  std::vector<Ref> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t flat = rng.index(st.transitions);
    const auto it =
        std::upper_bound(st.cumulative.begin(), st.cumulative.end(), flat);
    const std::size_t ri = static_cast<std::size_t>(it - st.cumulative.begin());
    const std::size_t before = ri == 0 ? 0 : st.cumulative[ri - 1];
    out.push_back({&st.rollouts[ri], flat - before});
  }
  return out;
}

std::vector<ReplayBuffer::Ref> ReplayBuffer::sample_any(std::size_t task,
                                                        std::size_t n,
                                                        numkit::Rng& rng) const {
  const Stream& ex = stream_at(task, true);
  const Stream& xp = stream_at(task, false);
  const std::size_t total = ex.transitions + xp.transitions;
  if (total == 0)
    throw std::invalid_argument("ReplayBuffer::sample_any: task has no data");
  std::vector<Ref> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t flat = rng.index(total);
    const Stream& st = flat < ex.transitions ? ex : xp;
    if (flat >= ex.transitions) flat -= ex.transitions;
    const auto it =
        std::upper_bound(st.cumulative.begin(), st.cumulative.end(), flat);
    const std::size_t ri = static_cast<std::size_t>(it - st.cumulative.begin());
    const std::size_t before = ri == 0 ? 0 : st.cumulative[ri - 1];
    out.push_back({&st.rollouts[ri], flat - before});
  }
  return out;
}

const Rollout& ReplayBuffer::sample_rollout(std::size_t task, bool explorer,
                                            numkit::Rng& rng) const {
  const Stream& st = stream_at(task, explorer);
  if (st.rollouts.empty())
    throw std::invalid_argument("ReplayBuffer::sample_rollout: stream is empty");
  return st.rollouts[rng.index(st.rollouts.size())];
}

const Rollout& ReplayBuffer::rollout_at(std::size_t task, bool explorer,
                                        std::size_t i) const {
  const Stream& st = stream_at(task, explorer);
  if (i >= st.rollouts.size())
    throw std::invalid_argument("ReplayBuffer::rollout_at: index out of range");
  return st.rollouts[i];
}

}  // namespace metacure::agents
