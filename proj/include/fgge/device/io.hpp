#pragma once

#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fgge/core/errors.hpp"
#include "fgge/core/units.hpp"
#include "fgge/device/coupling.hpp"
#include "fgge/device/params.hpp"

namespace fgge::device {

namespace detail {

inline int line_of_offset(const std::string& text, std::size_t offset) {
  int line = 1;
  for (std::size_t i = 0; i < std::min(offset, text.size()); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

inline int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

inline std::string where(const std::string& source, const std::string& text, const std::string& key) {
  const int line = line_of_key(text, key);
  return source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": ";
}

inline double number_at(const nlohmann::json& obj, const std::string& key, const std::string& ctx,
                        const std::string& source, const std::string& text) {
  if (!obj.contains(key)) throw ConfigError(where(source, text, ctx) + "missing key '" + ctx + "." + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number())
    throw ConfigError(where(source, text, key) + "key '" + ctx + "." + key + "' must be a number");
  return v.get<double>();
}

inline TransmonParams transmon_from_json(const nlohmann::json& j, const std::string& ctx, const std::string& source,
                                         const std::string& text) {
  if (!j.is_object()) throw ConfigError(where(source, text, ctx) + "'" + ctx + "' must be an object");
  TransmonParams t;
  t.omega_ge = units::ghz(number_at(j, "ge_frequency_GHz", ctx, source, text));
  t.alpha = units::mhz(number_at(j, "anharmonicity_MHz", ctx, source, text));
  t.T1_ge = units::us(number_at(j, "T1ge_us", ctx, source, text));
  t.T1_ef = units::us(number_at(j, "T1ef_us", ctx, source, text));
  t.T2_ge = units::us(number_at(j, "T2ge_us", ctx, source, text));
  t.T2_ef = units::us(number_at(j, "T2ef_us", ctx, source, text));
  if (j.contains("n_cutoff")) t.n_cutoff = j.at("n_cutoff").get<int>();
  return t;
}

}  // namespace detail

inline DeviceParams device_from_json_text(const std::string& text, const std::string& source = "<device>") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(source + ":" + std::to_string(detail::line_of_offset(text, e.byte)) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(source + ": top level must be an object");
  for (const char* k : {"qubit_a", "qubit_b"})
    if (!j.contains(k)) throw ConfigError(source + ": missing key '" + std::string(k) + "'");
  const auto a = detail::transmon_from_json(j.at("qubit_a"), "qubit_a", source, text);
  const auto b = detail::transmon_from_json(j.at("qubit_b"), "qubit_b", source, text);
  const double J = units::mhz(detail::number_at(j, "coupling_J_MHz", "device", source, text));
  auto method = JTildeCalibration::OperatingPoint;
  if (j.contains("j_tilde_calibration")) {
    const auto m = j.at("j_tilde_calibration").get<std::string>();
    if (m == "resonance_sweep")
      method = JTildeCalibration::ResonanceSweep;
    else if (m != "operating_point")
      throw ConfigError(detail::where(source, text, "j_tilde_calibration") + "unknown j_tilde_calibration '" + m + "'");
  }
  DeviceParams d;
  DeviceParams probe;
  probe.qubit_a = a;
  probe.qubit_b = b;
  probe.J = J;
  (void)validate(probe);
  d = make_device(a, b, J, method);
  if (j.contains("drive_target")) {
    const auto t = j.at("drive_target").get<std::string>();
    if (t == "B")
      d.drive_target = DriveTarget::B;
    else if (t != "A")
      throw ConfigError(detail::where(source, text, "drive_target") + "drive_target must be 'A' or 'B'");
  }
  return d;
}

inline DeviceParams load_device_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open device file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return device_from_json_text(ss.str(), path);
}

inline nlohmann::json device_to_json(const DeviceParams& d) {
  auto q = [](const TransmonParams& t) {
    return nlohmann::json{{"ge_frequency_GHz", units::to_ghz(t.omega_ge)},
                          {"anharmonicity_MHz", units::to_mhz(t.alpha)},
                          {"T1ge_us", units::to_us(t.T1_ge)},
                          {"T1ef_us", units::to_us(t.T1_ef)},
                          {"T2ge_us", units::to_us(t.T2_ge)},
                          {"T2ef_us", units::to_us(t.T2_ef)},
                          {"n_cutoff", t.n_cutoff},
                          {"E_C_GHz", units::to_ghz(t.E_C)},
                          {"E_J_GHz", units::to_ghz(t.E_J)}};
  };
  return {{"qubit_a", q(d.qubit_a)},
          {"qubit_b", q(d.qubit_b)},
          {"coupling_J_MHz", units::to_mhz(d.J)},
          {"J_tilde_MHz", units::to_mhz(d.J_tilde)},
          {"drive_target", d.drive_target == DriveTarget::A ? "A" : "B"}};
}

}  // namespace fgge::device
