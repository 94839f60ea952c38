#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fgge/core/errors.hpp"
#include "fgge/core/units.hpp"
#include "fgge/pulse/envelope.hpp"

namespace fgge::pulse {

struct VirtualZ {
  Transmon target = Transmon::A;
  double angle = 0.0;  // rad
};

// Accumulated software phase per transmon.
struct FrameTracker {
  std::array<double, 2> phase{0.0, 0.0};
  double& operator[](Transmon q) { return phase[q == Transmon::A ? 0 : 1]; }
  double operator[](Transmon q) const { return phase[q == Transmon::A ? 0 : 1]; }
};

inline FrameTracker apply_virtual_z(FrameTracker tracker, Transmon q, double angle) {
  tracker[q] = std::remainder(tracker[q] + angle, units::two_pi);
  return tracker;
}

struct ScheduleEntry {
  double start = 0.0;  // s
  std::variant<FlatTopPulse, DragPulse, VirtualZ> op;

  double duration() const {
    if (auto* p = std::get_if<FlatTopPulse>(&op)) return p->duration();
    if (auto* p = std::get_if<DragPulse>(&op)) return p->duration();
    return 0.0;
  }
  double end() const { return start + duration(); }
};

// Time-ordered pulses and frame updates. Virtual-Z records act at their
// start time and have no duration.
class PulseSchedule {
 public:
  PulseSchedule() = default;

  PulseSchedule& add(double start, FlatTopPulse p) {
    p.validate();
    return push({start, p});
  }
  PulseSchedule& add(double start, DragPulse p) {
    p.validate();
    return push({start, p});
  }
  PulseSchedule& add(double start, VirtualZ z) { return push({start, z}); }

  // Appends after the current end of the schedule.
  template <class Op>
  PulseSchedule& then(Op op) {
    return add(duration(), std::move(op));
  }
  PulseSchedule& wait(double t) {
    idle_until_ = std::max(idle_until_, duration() + t);
    return *this;
  }

  PulseSchedule& append(const PulseSchedule& other) {
    const double offset = duration();
    for (auto e : other.entries_) {
      e.start += offset;
      push(e);
    }
    idle_until_ = std::max(idle_until_, offset + other.duration());
    return *this;
  }

  const std::vector<ScheduleEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty() && idle_until_ == 0.0; }

  double duration() const {
    double t = idle_until_;
    for (const auto& e : entries_) t = std::max(t, e.end());
    return t;
  }

  // Frame phases seen by an operation starting at time t, i.e. the sum of
  // all virtual-Z records strictly earlier in the ordering.
  FrameTracker frames_before(std::size_t index) const {
    FrameTracker f;
    for (std::size_t i = 0; i < index; ++i)
      if (auto* z = std::get_if<VirtualZ>(&entries_[i].op)) f = apply_virtual_z(f, z->target, z->angle);
    return f;
  }
  FrameTracker final_frames() const { return frames_before(entries_.size()); }

 private:
  PulseSchedule& push(ScheduleEntry e) {
    if (!(e.start >= 0.0)) throw ConfigError("PulseSchedule: negative start time");
    // Stable insertion keeps records with equal start times in call order.
    auto it = std::upper_bound(entries_.begin(), entries_.end(), e.start,
                               [](double t, const ScheduleEntry& x) { return t < x.start; });
    entries_.insert(it, std::move(e));
    return *this;
  }

  std::vector<ScheduleEntry> entries_;
  double idle_until_ = 0.0;
};

namespace detail {
inline Transmon transmon_from(const std::string& s) {
  if (s == "A") return Transmon::A;
  if (s == "B") return Transmon::B;
  throw ConfigError("schedule: unknown transmon '" + s + "'");
}
inline Transition transition_from(const std::string& s) {
  if (s == "ge") return Transition::GE;
  if (s == "ef") return Transition::EF;
  throw ConfigError("schedule: unknown transition '" + s + "'");
}
}  // namespace detail

// Times in ns, frequencies in GHz, amplitudes in MHz (cyclic), angles in rad.
inline nlohmann::json schedule_to_json(const PulseSchedule& s) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : s.entries()) {
    nlohmann::json j;
    j["start_ns"] = units::to_ns(e.start);
    if (auto* p = std::get_if<FlatTopPulse>(&e.op)) {
      j["type"] = "flat_top";
      j["amplitude"] = p->amplitude;
      j["omega_MHz"] = units::to_mhz(p->omega);
      j["carrier_GHz"] = units::to_ghz(p->carrier);
      j["phase_rad"] = p->phase;
      j["plateau_ns"] = units::to_ns(p->plateau);
      j["sigma_ns"] = units::to_ns(p->sigma);
    } else if (auto* d = std::get_if<DragPulse>(&e.op)) {
      j["type"] = "drag";
      j["target"] = name(d->target);
      j["transition"] = name(d->transition);
      j["angle_rad"] = d->angle;
      j["axis_rad"] = d->axis;
      j["sigma_ns"] = units::to_ns(d->sigma);
      j["length_ns"] = units::to_ns(d->length);
      j["beta"] = d->beta;
      j["detuning_MHz"] = units::to_mhz(d->detuning);
    } else {
      const auto& z = std::get<VirtualZ>(e.op);
      j["type"] = "virtual_z";
      j["target"] = name(z.target);
      j["angle_rad"] = z.angle;
    }
    entries.push_back(j);
  }
  return {{"duration_ns", units::to_ns(s.duration())}, {"entries", entries}};
}

inline PulseSchedule schedule_from_json(const nlohmann::json& j) {
  PulseSchedule s;
  try {
    for (const auto& e : j.at("entries")) {
      const double t = units::ns(e.at("start_ns").get<double>());
      const std::string type = e.at("type");
      if (type == "flat_top") {
        FlatTopPulse p;
        p.amplitude = e.at("amplitude");
        p.omega = units::mhz(e.at("omega_MHz").get<double>());
        p.carrier = units::ghz(e.at("carrier_GHz").get<double>());
        p.phase = e.at("phase_rad");
        p.plateau = units::ns(e.at("plateau_ns").get<double>());
        p.sigma = units::ns(e.at("sigma_ns").get<double>());
        s.add(t, p);
      } else if (type == "drag") {
        DragPulse p;
        p.target = detail::transmon_from(e.at("target"));
        p.transition = detail::transition_from(e.at("transition"));
        p.angle = e.at("angle_rad");
        p.axis = e.at("axis_rad");
        p.sigma = units::ns(e.at("sigma_ns").get<double>());
        p.length = units::ns(e.at("length_ns").get<double>());
        p.beta = e.at("beta");
        p.detuning = units::mhz(e.at("detuning_MHz").get<double>());
        s.add(t, p);
      } else if (type == "virtual_z") {
        s.add(t, VirtualZ{detail::transmon_from(e.at("target")), e.at("angle_rad").get<double>()});
      } else {
        throw ConfigError("schedule: unknown entry type '" + type + "'");
      }
    }
    if (j.contains("duration_ns")) s.wait(std::max(0.0, units::ns(j.at("duration_ns").get<double>()) - s.duration()));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
  return s;
}

}  // namespace fgge::pulse
