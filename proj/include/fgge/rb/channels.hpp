#pragma once

#include <map>
#include <mutex>
#include <optional>

#include "fgge/pulse/channel.hpp"
#include "fgge/pulse/collapse.hpp"
#include "fgge/pulse/model.hpp"
#include "fgge/rb/sequence.hpp"

namespace fgge::rb {

// Channels of the physical operations, built on first use and kept for the
// lifetime of the source. Safe to share between sequence workers.
class NativeChannels {
 public:
  virtual ~NativeChannels() = default;

  virtual int levels_a() const = 0;
  virtual int levels_b() const = 0;
  int dim() const { return levels_a() * levels_b(); }

  const pulse::QuantumChannel& get(const PhysicalOp& op) {
    const int key = op.kind == PhysicalOp::Kind::CZ         ? 0
                    : op.kind == PhysicalOp::Kind::VirtualZ ? 1 + op.qubit * 16 + static_cast<int>(op.gate)
                                                            : 100 + (op.pulse_a + 1) * 16 + (op.pulse_b + 1);
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    return cache_.emplace(key, build(op)).first->second;
  }
  std::size_t cached() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
  }

 protected:
  virtual pulse::QuantumChannel build(const PhysicalOp& op) const = 0;

 private:
  mutable std::mutex mutex_;
  std::map<int, pulse::QuantumChannel> cache_;
};

// Ideal two-qubit unitaries.
class IdealChannels : public NativeChannels {
 public:
  int levels_a() const override { return 2; }
  int levels_b() const override { return 2; }

 protected:
  pulse::QuantumChannel build(const PhysicalOp& op) const override {
    return pulse::QuantumChannel::unitary(ideal_unitary({op}));
  }
};

// Pulse-level channels from the effective model: parallel DRAG pulses per
// slot, exact virtual-Z frame updates and the calibrated CZ schedule.
class ModelChannels : public NativeChannels {
 public:
  ModelChannels(std::shared_ptr<const pulse::RotatingFrameModel> model, pulse::CollapseSet collapse,
                pulse::PulseSchedule cz, pulse::EvolveOptions opt = {}, double slot = units::ns(20.0))
      : model_(std::move(model)), collapse_(std::move(collapse)), cz_(std::move(cz)), opt_(opt), slot_(slot) {
    if (!model_) throw ConfigError("ModelChannels: no model");
  }

  int levels_a() const override { return model_->levels_a(); }
  int levels_b() const override { return model_->levels_b(); }
  const pulse::RotatingFrameModel& model() const { return *model_; }

 protected:
  pulse::QuantumChannel build(const PhysicalOp& op) const override {
    pulse::PulseSchedule s;
    switch (op.kind) {
      case PhysicalOp::Kind::CZ:
        if (cz_.empty()) throw ConfigError("ModelChannels: no CZ schedule configured");
        return pulse::channel_from_schedule(*model_, cz_, collapse_, opt_);
      case PhysicalOp::Kind::VirtualZ:
        s.add(0.0, pulse::VirtualZ{op.qubit == 0 ? pulse::Transmon::A : pulse::Transmon::B, virtual_z_angle(op.gate)});
        return pulse::channel_from_schedule(*model_, s, {}, opt_);
      case PhysicalOp::Kind::Slot:
        for (int q = 0; q < 2; ++q) {
          const int code = q == 0 ? op.pulse_a : op.pulse_b;
          if (code < 0) continue;
          const auto [angle, axis] = pulse_rotation(static_cast<Native>(code));
          pulse::DragPulse p;
          p.target = q == 0 ? pulse::Transmon::A : pulse::Transmon::B;
          p.angle = angle;
          p.axis = axis;
          p.length = slot_;
          s.add(0.0, p);
        }
        if (s.duration() < slot_) s.wait(slot_ - s.duration());
        return pulse::channel_from_schedule(*model_, s, collapse_, opt_);
    }
    throw ConfigError("ModelChannels: unknown operation");
  }

 private:
  std::shared_ptr<const pulse::RotatingFrameModel> model_;
  pulse::CollapseSet collapse_;
  pulse::PulseSchedule cz_;
  pulse::EvolveOptions opt_;
  double slot_;
};

}  // namespace fgge::rb
