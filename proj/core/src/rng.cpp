#include "mdlm/rng.hpp"

#include <cmath>

#include "mdlm/errors.hpp"

namespace mdlm {

namespace {

// 256-layer ziggurat for the standard normal (Marsaglia & Tsang 2000).
// x[i] are the layer edges (x[1] = R down to x[256] = 0, with x[0] the
// pseudo-width of the base strip that also carries the tail mass); y[i] =
// exp(-x[i]^2/2).  All layers have common area V, computed from R so the
// table is self-consistent to double precision.
constexpr int kLayers = 256;
constexpr double kZigR = 3.6541528853610088;

struct ZigTable {
  double x[kLayers + 1];
  double y[kLayers + 1];

  ZigTable() {
    const double f_r = std::exp(-0.5 * kZigR * kZigR);
    const double tail = std::sqrt(3.14159265358979323846 / 2.0) *
                        std::erfc(kZigR / std::sqrt(2.0));
    const double v = kZigR * f_r + tail;  // common layer area
    x[1] = kZigR;
    y[1] = f_r;
    x[0] = v / f_r;
    y[0] = 0.0;
    for (int i = 2; i < kLayers; ++i) {
      y[i] = y[i - 1] + v / x[i - 1];
      x[i] = std::sqrt(-2.0 * std::log(y[i]));
    }
    x[kLayers] = 0.0;
    y[kLayers] = 1.0;
  }
};

const ZigTable& zig() {
  static const ZigTable table;
  return table;
}

}  // namespace

double Rng::normal_tail(bool negative) {
  // Exponential-rejection sample from the tail beyond R.
  double x, y;
  do {
    x = -std::log(uniform_pos()) / kZigR;
    y = -std::log(uniform_pos());
  } while (y + y < x * x);
  const double value = kZigR + x;
  return negative ? -value : value;
}

double Rng::normal() {
  const ZigTable& t = zig();
  for (;;) {
    const std::uint64_t bits = engine_();
    const int i = static_cast<int>(bits & 0xffu);
    const bool negative = (bits >> 8) & 1u;
    const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
    const double x = u * t.x[i];
    if (x < t.x[i + 1]) return negative ? -x : x;  // inside the layer core
    if (i == 0) return normal_tail(negative);
    // Wedge between the layer edges: exact accept/reject against the density.
    const double y = t.y[i] + (t.y[i + 1] - t.y[i]) * uniform();
    if (y < std::exp(-0.5 * x * x)) return negative ? -x : x;
  }
}

double Rng::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw BadOption("gamma requires shape > 0 and scale > 0");
  }
  if (shape < 1.0) {
    // Boost to shape + 1 and correct with a power of a uniform.
    const double g = gamma(shape + 1.0, scale);
    return g * std::pow(uniform_pos(), 1.0 / shape);
  }
  // Marsaglia-Tsang: squeeze around the near-normal transform (1 + c z)^3.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z, v;
    do {
      z = normal();
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    const double zz = z * z;
    if (u < 1.0 - 0.0331 * zz * zz) return d * v * scale;
    if (std::log(u) < 0.5 * zz + d * (1.0 - v + std::log(v))) {
      return d * v * scale;
    }
  }
}

}  // namespace mdlm
