#pragma once

#include <string_view>
#include <vector>

#include "delay.hpp"
#include "seq_translation.hpp"

namespace mosto {

enum class OffloadState { Proxying, SsEnded, DelayRamp, DrainWait, Offloaded };

std::string_view state_name(OffloadState s);

// Per-session offload progress. States only move forward, one at a time.
class OffloadMachine {
 public:
  OffloadMachine(bool ramp_enabled, Delay ramp_step);

  OffloadState state() const { return state_; }
  void advance(OffloadState next);  // throws InvariantError unless next == state + 1

  bool ramp_enabled() const { return ramp_enabled_; }
  Delay ramp_step() const { return step_; }
  Delay injected() const { return injected_; }
  Delay target() const { return target_; }

  // Sets the ramp target from the smallest RTT seen on the downstream
  // connection, rounded up to a whole number of steps. Zero when the ramp is
  // disabled.
  void set_target_from(Delay downstream_min_rtt);
  bool ramp_done() const { return injected_ >= target_; }
  void step();  // one ramp increment; only valid in DelayRamp

  void install(const SeqTranslation& t);
  const SeqTranslation& translation() const { return translation_; }
  const std::vector<OffloadState>& history() const { return history_; }

 private:
  OffloadState state_ = OffloadState::Proxying;
  bool ramp_enabled_;
  Delay step_;
  Delay injected_ = Delay::zero();
  Delay target_ = Delay::zero();
  SeqTranslation translation_;
  std::vector<OffloadState> history_{OffloadState::Proxying};
};

}  // namespace mosto
