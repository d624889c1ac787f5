#include "gala/quantization.hpp"

#include <algorithm>
#include <cmath>

namespace gala {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kEulerStep = M_PI / 60.0;

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    return a;
}

} // namespace

std::uint32_t quantize(double value, double lo, double hi, int bits) {
    if (!(lo < hi)) throw InvalidInput("quantize: lo must be < hi");
    const double levels = static_cast<double>((1u << bits) - 1);
    const double v = std::clamp(value, lo, hi);
    // std::round rounds halves away from zero.
    return static_cast<std::uint32_t>(std::round((v - lo) / (hi - lo) * levels));
}

double dequantize(std::uint32_t code, double lo, double hi, int bits) {
    if (!(lo < hi)) throw InvalidInput("dequantize: lo must be < hi");
    const double levels = static_cast<double>((1u << bits) - 1);
    return lo + static_cast<double>(code) / levels * (hi - lo);
}

Vec3 quat_to_euler_zyx(const Quat& q) {
    const Mat3 r = q.normalized().toRotationMatrix();

    const double sp = std::clamp(-r(2, 0), -1.0, 1.0);
    const double pitch = std::asin(sp);

    // Any pitch that would round onto the gimbal code is treated as gimbal:
    // only yaw -/+ roll is observable there, so the roll is folded into the
    // yaw. This keeps code-space quantization idempotent near +-pi/2.
    if (M_PI / 2.0 - std::abs(pitch) < kEulerStep / 2.0) {
        const double yaw = std::atan2(-r(0, 1), r(1, 1));
        return {yaw, pitch < 0.0 ? -M_PI / 2.0 : M_PI / 2.0, 0.0};
    }
    const double yaw = std::atan2(r(1, 0), r(0, 0));
    const double roll = std::atan2(r(2, 1), r(2, 2));
    return {yaw, pitch, roll};
}

Quat euler_zyx_to_quat(const Vec3& angles) {
    return Quat(Eigen::AngleAxisd(angles[0], Vec3::UnitZ()) *
                Eigen::AngleAxisd(angles[1], Vec3::UnitY()) *
                Eigen::AngleAxisd(angles[2], Vec3::UnitX()));
}

std::array<std::uint8_t, 3> quat_to_euler_codes(const Quat& q) {
    const Vec3 angles = quat_to_euler_zyx(q);
    std::array<std::uint8_t, 3> codes;
    for (int k = 0; k < 3; ++k) {
        const long code = std::lround(wrap_angle(angles[k]) / kEulerStep);
        codes[k] = static_cast<std::uint8_t>(code % kEulerCodes);
    }
    return codes;
}

Quat euler_codes_to_quat(const std::array<std::uint8_t, 3>& codes) {
    return euler_zyx_to_quat(Vec3(codes[0] * kEulerStep, codes[1] * kEulerStep,
                                  codes[2] * kEulerStep));
}

double dequantize_scale(std::uint8_t code) {
    return std::max(dequantize(code, kScaleLo, kScaleHi), kMinScale);
}

} // namespace gala
