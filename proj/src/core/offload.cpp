#include "offload.hpp"

#include "error.hpp"

namespace mosto {

std::string_view state_name(OffloadState s) {
  switch (s) {
    case OffloadState::Proxying: return "PROXYING";
    case OffloadState::SsEnded: return "SS_ENDED";
    case OffloadState::DelayRamp: return "DELAY_RAMP";
    case OffloadState::DrainWait: return "DRAIN_WAIT";
    case OffloadState::Offloaded: return "OFFLOADED";
  }
  return "?";
}

OffloadMachine::OffloadMachine(bool ramp_enabled, Delay ramp_step) : ramp_enabled_(ramp_enabled), step_(ramp_step) {
  if (ramp_step <= Delay::zero()) throw InvariantError("ramp step must be positive");
}

void OffloadMachine::advance(OffloadState next) {
  if (static_cast<int>(next) != static_cast<int>(state_) + 1)
    throw InvariantError("offload state cannot move from " + std::string(state_name(state_)) + " to " +
                         std::string(state_name(next)));
  state_ = next;
  history_.push_back(next);
}

void OffloadMachine::set_target_from(Delay downstream_min_rtt) {
  if (!ramp_enabled_) {
    target_ = Delay::zero();
    return;
  }
  const std::int64_t s = step_.picos();
  const std::int64_t steps = (downstream_min_rtt.picos() + s - 1) / s;
  target_ = Delay::from_picos(steps * s);
}

void OffloadMachine::step() {
  if (state_ != OffloadState::DelayRamp) throw InvariantError("ramp step outside DELAY_RAMP");
  if (ramp_done()) throw InvariantError("ramp step past target");
  injected_ += step_;
}

void OffloadMachine::install(const SeqTranslation& t) {
  if (state_ != OffloadState::DrainWait) throw InvariantError("translation installed outside DRAIN_WAIT");
  translation_ = t;
}

}  // namespace mosto
