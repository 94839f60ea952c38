#pragma once

#include <string>

#include "fgge/device/io.hpp"

namespace fgge::testing {

inline const device::DeviceParams& reference_device() {
  static const device::DeviceParams d = device::load_device_json(std::string(FGGE_DATA_DIR) + "/reference_device.json");
  return d;
}

}  // namespace fgge::testing
