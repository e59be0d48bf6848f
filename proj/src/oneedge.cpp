#include "loopforge/oneedge.hpp"

#include <cmath>

#include "loopforge/errors.hpp"
#include "loopforge/rng.hpp"

namespace loopforge {

double GridPath::at(double t) const {
  if (t <= 0.0) return v.front();
  if (t >= 1.0) return v.back();
  const double pos = t / dt;
  const int i = static_cast<int>(pos);
  const double frac = pos - i;
  if (i + 1 >= static_cast<int>(v.size())) return v.back();
  return v[i] * (1.0 - frac) + v[i + 1] * frac;
}

double GridPath::integral() const {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) s += 0.5 * (v[i] + v[i + 1]) * dt;
  return s;
}

int grid_steps(double dt) {
  if (!(dt > 0.0)) throw ConfigError("grid step must be positive");
  const int n = static_cast<int>(std::lround(1.0 / dt));
  if (n < 100 || std::abs(n * dt - 1.0) > 1e-9)
    throw ConfigError("grid step must be 1/n for integer n >= 100");
  return n;
}

GridPath sample_bridge(double a, double b, double dt, std::mt19937_64& rng) {
  const int n = grid_steps(dt);
  GridPath p;
  p.dt = dt;
  p.v.resize(n + 1);
  p.v[0] = a;
  for (int i = 0; i < n - 1; ++i) {
    const double remaining = 1.0 - i * dt;
    const double x = p.v[i];
    const double mean = x + (b - x) * dt / remaining;
    const double var = dt * (remaining - dt) / remaining;
    p.v[i + 1] = mean + std::sqrt(var) * std_normal(rng);
  }
  p.v[n] = b;
  return p;
}

GridPath condition_positive(double a, double b, double dt, std::mt19937_64& rng,
                            long long* attempts) {
  if (!(a > 0.0 && b > 0.0)) throw ConfigError("positive conditioning needs a, b > 0");
  long long tries = 0;
  for (;;) {
    ++tries;
    GridPath p = sample_bridge(a, b, dt, rng);
    bool ok = true;
    for (double x : p.v) {
      if (!(x > 0.0)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      for (int i = 0; i < p.steps(); ++i) {
        const double q = std::exp(-2.0 * p.v[i] * p.v[i + 1] / dt);
        if (uniform01(rng) < q) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      if (attempts) *attempts = tries;
      return p;
    }
  }
}

GridPath sample_reflected_bridge(double a, double b, double dt, std::mt19937_64& rng) {
  const double same = 1.0 / (1.0 + std::exp(-2.0 * a * b));
  const double endpoint = uniform01(rng) < same ? b : -b;
  GridPath p = sample_bridge(a, endpoint, dt, rng);
  for (double& x : p.v) x = std::abs(x);
  return p;
}

GridPath sample_besq0(double x0, double dt, std::mt19937_64& rng) {
  if (x0 < 0.0) throw ConfigError("squared Bessel start must be >= 0");
  const int n = grid_steps(dt);
  GridPath p;
  p.dt = dt;
  p.v.resize(n + 1);
  p.v[0] = x0;
  for (int i = 0; i < n; ++i) {
    const double x = p.v[i];
    if (x == 0.0) {
      p.v[i + 1] = 0.0;
      continue;
    }
    const long m = poisson(rng, x / (2.0 * dt));
    if (m == 0) {
      p.v[i + 1] = 0.0;
    } else {
      std::gamma_distribution<double> gamma(double(m), 2.0 * dt);
      p.v[i + 1] = gamma(rng);
    }
  }
  return p;
}

GridPath sample_besq0_absorbed(double x0, double dt, std::mt19937_64& rng,
                               long long* attempts) {
  long long tries = 0;
  for (;;) {
    ++tries;
    GridPath p = sample_besq0(x0, dt, rng);
    if (p.v.back() == 0.0) {
      if (attempts) *attempts = tries;
      return p;
    }
  }
}

GridPath sample_squared_bessel_bridge(int dim, double dt, std::mt19937_64& rng) {
  if (dim < 0) throw ConfigError("dimension must be >= 0");
  const int n = grid_steps(dt);
  GridPath p;
  p.dt = dt;
  p.v.assign(n + 1, 0.0);
  for (int d = 0; d < dim; ++d) {
    GridPath b = sample_bridge(0.0, 0.0, dt, rng);
    for (int i = 0; i <= n; ++i) p.v[i] += b.v[i] * b.v[i];
  }
  return p;
}

GridPath sample_cpy_rhs(double a, double b, double dt, Parity parity, double C,
                        std::mt19937_64& rng) {
  if (!(a > 0.0 && b > 0.0)) throw ConfigError("decomposition needs a, b > 0");
  if (!(C > 0.0)) throw ConfigError("constant C must be > 0");
  const int n = grid_steps(dt);
  GridPath part1 = sample_besq0_absorbed(a * a, dt, rng);
  GridPath part2 = sample_besq0_absorbed(b * b, dt, rng);
  const int delta = conditioned_poisson(a * b * C, parity, rng);
  GridPath bridge = sample_squared_bessel_bridge(1 + 2 * delta, dt, rng);
  GridPath out;
  out.dt = dt;
  out.v.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double sum = part1.v[i] + part2.v[n - i] + bridge.v[i];
    out.v[i] = std::sqrt(sum);
  }
  return out;
}

}  // namespace loopforge
