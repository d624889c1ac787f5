#pragma once

#include "gala/types.hpp"

#include <array>
#include <cstdint>

namespace gala {

// Quantization ranges of the stored grid quantities.
inline constexpr double kValueLo = -kSdfBound, kValueHi = kSdfBound;   // V
inline constexpr double kScaleLo = 0.0, kScaleHi = kSdfBound;          // s_g
inline constexpr double kCenterLo = -0.5, kCenterHi = 0.5;             // p_g

inline constexpr int kQuantBits = 8;

// Orientation codes: one per Euler angle, in units of pi/60 over [0, 2*pi).
inline constexpr int kEulerCodes = 120;

// Uniform scalar quantizer: clamps into [lo, hi], rounds half away from zero.
std::uint32_t quantize(double value, double lo, double hi, int bits = kQuantBits);
double dequantize(std::uint32_t code, double lo, double hi, int bits = kQuantBits);

// Intrinsic Z-Y-X Euler decomposition (yaw, pitch, roll). Pitch lands in
// [-pi/2, pi/2]; at the gimbal pitch the roll is folded into the yaw.
Vec3 quat_to_euler_zyx(const Quat& q);
Quat euler_zyx_to_quat(const Vec3& angles);

// Orientation codes. quat_to_euler_codes . euler_codes_to_quat is a
// projection: re-encoding the decoded quaternion reproduces the codes.
std::array<std::uint8_t, 3> quat_to_euler_codes(const Quat& q);
Quat euler_codes_to_quat(const std::array<std::uint8_t, 3>& codes);

// s_g dequantization with the representation floor applied, keeping grid
// half-scales strictly positive.
double dequantize_scale(std::uint8_t code);

} // namespace gala
