#include "cascade/sim/generator.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace cascade {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// splitmix64-style mixing so every (seed, stream) pair gets an independent
// generator state.
std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 0x632be59bd9b4e019ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Standard normal deviates built from the raw generator bits, so the stream
// is identical on every platform.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1p-53;  // (0, 1]
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1p-53;         // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

double clip(const ProcessSpec& p, double v) {
  return std::min(p.max_value, std::max(p.min_value, v));
}

struct RealWindow {
  Eigen::VectorXd value;      // horizon entries
  double start_deviation = 0.0;  // AR state at the window's first period
};

// The realization path depends only on (spec, seed, absolute period): the
// deviation recursion is replayed from period 0 on every call.
RealWindow realization_window(const ProcessSpec& p, double mean_step, int start, int horizon,
                              std::uint64_t stream_seed) {
  NormalStream noise(stream_seed);
  RealWindow out;
  out.value.resize(horizon);
  double d = 0.0;
  for (int t = 0; t < start + horizon; ++t) {
    d = p.ar_coeff * d + p.noise_scale * noise.next();
    if (t == start) out.start_deviation = d;
    if (t >= start) {
      const double mean = p.offset + p.amplitude * std::sin(mean_step * t + p.phase);
      out.value[t - start] = clip(p, mean + d);
    }
  }
  return out;
}

}  // namespace

void ProcessSpec::validate(const std::string& name) const {
  if (!(ar_coeff >= 0.0 && ar_coeff < 1.0))
    throw std::invalid_argument("GeneratorSpec: " + name + ".ar_coeff must lie in [0, 1)");
  if (!(noise_scale >= 0.0))
    throw std::invalid_argument("GeneratorSpec: " + name + ".noise_scale must be non-negative");
  if (!(min_value <= max_value))
    throw std::invalid_argument("GeneratorSpec: " + name + ".min_value exceeds max_value");
  if (!std::isfinite(offset) || !std::isfinite(amplitude) || !std::isfinite(phase))
    throw std::invalid_argument("GeneratorSpec: " + name + " profile must be finite");
}

void GeneratorSpec::validate(int expected_plants) const {
  if (static_cast<int>(inflow.size()) != expected_plants)
    throw std::invalid_argument("GeneratorSpec: " + std::to_string(inflow.size()) +
                                " inflow processes for " + std::to_string(expected_plants) +
                                " plants");
  for (std::size_t n = 0; n < inflow.size(); ++n) {
    const std::string name = "inflow[" + std::to_string(n) + "]";
    inflow[n].validate(name);
    if (inflow[n].min_value < 0.0)
      throw std::invalid_argument("GeneratorSpec: " + name + ".min_value must be non-negative");
  }
  vres.validate("vres");
  if (vres.min_value < 0.0)
    throw std::invalid_argument("GeneratorSpec: vres.min_value must be non-negative");
  price_up.validate("price_up");
  price_down.validate("price_down");
  if (price_up.min_value < 0.0 || price_down.min_value < 0.0)
    throw std::invalid_argument("GeneratorSpec: price bounds must be non-negative");
  if (!(day_seconds > 0.0))
    throw std::invalid_argument("GeneratorSpec: day_seconds must be positive");
}

GeneratorDraw generate_scenarios(const GeneratorSpec& spec, double period_seconds,
                                 int start_period, int horizon, int count, std::uint64_t seed) {
  spec.validate(static_cast<int>(spec.inflow.size()));
  if (!(period_seconds > 0.0))
    throw std::invalid_argument("generate_scenarios: period_seconds must be positive");
  if (start_period < 0)
    throw std::invalid_argument("generate_scenarios: start_period must be non-negative");
  if (horizon < 1) throw std::invalid_argument("generate_scenarios: horizon must be at least 1");
  if (count < 1) throw std::invalid_argument("generate_scenarios: count must be at least 1");

  const int plants = static_cast<int>(spec.inflow.size());
  const double mean_step = kTwoPi * period_seconds / spec.day_seconds;

  // Stream ids: one realization stream per process, one fan stream per
  // (process, step, scenario).
  auto real_stream = [&](int process) { return mix(seed, 0x0FECAF00ULL + process); };
  auto fan_stream = [&](int process, int w) {
    return mix(seed, 0x0A5CADEULL + (static_cast<std::uint64_t>(process) << 40) +
                         (static_cast<std::uint64_t>(start_period) << 16) +
                         static_cast<std::uint64_t>(w));
  };

  // One process: realization window plus the count x horizon forecast fan.
  auto draw_process = [&](const ProcessSpec& p, int process, Eigen::VectorXd& real,
                          Eigen::MatrixXd& fan) {
    const RealWindow window =
        realization_window(p, mean_step, start_period, horizon, real_stream(process));
    real = window.value;
    fan.resize(count, horizon);
    for (int w = 0; w < count; ++w) {
      NormalStream noise(fan_stream(process, w));
      double d = window.start_deviation;
      for (int k = 0; k < horizon; ++k) {
        if (k >= 1) d = p.ar_coeff * d + (w == 0 ? 0.0 : p.noise_scale * noise.next());
        const double mean =
            p.offset + p.amplitude * std::sin(mean_step * (start_period + k) + p.phase);
        fan(w, k) = clip(p, mean + d);
      }
    }
  };

  GeneratorDraw draw;
  draw.real_inflow.resize(plants, horizon);
  draw.scenarios.ext_inflow.resize(plants);
  for (int n = 0; n < plants; ++n) {
    Eigen::VectorXd real;
    draw_process(spec.inflow[n], n, real, draw.scenarios.ext_inflow[n]);
    draw.real_inflow.row(n) = real;
  }
  draw_process(spec.vres, plants, draw.real_vres, draw.scenarios.vres_power);
  draw_process(spec.price_up, plants + 1, draw.real_price_up, draw.scenarios.price_up);
  draw_process(spec.price_down, plants + 2, draw.real_price_down, draw.scenarios.price_down);

  // Shortfall is never cheaper than surplus is valuable.
  draw.real_price_up = draw.real_price_up.cwiseMax(draw.real_price_down);
  draw.scenarios.price_up = draw.scenarios.price_up.cwiseMax(draw.scenarios.price_down);

  return draw;
}

}  // namespace cascade
