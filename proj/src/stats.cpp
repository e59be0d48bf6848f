#include "loopforge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace loopforge {

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum) || std::abs(term) < 1e-300) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 1000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double eps = 1e-15;
  const double fpmin = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw ConfigError("gamma_q needs x >= 0, a > 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return std::clamp(1.0 - gamma_p_series(a, x), 0.0, 1.0);
  return std::clamp(gamma_q_contfrac(a, x), 0.0, 1.0);
}

namespace {

void require_size(std::size_t n, std::size_t min_n) {
  if (n < min_n) {
    std::ostringstream os;
    os << "need at least " << min_n << " samples, got " << n;
    throw TooFewSamples(os.str());
  }
}

KsResult ks_from(double d, double n_eff) {
  KsResult r;
  r.statistic = d;
  r.n_eff = n_eff;
  const double s = std::sqrt(n_eff);
  r.p = kolmogorov_q((s + 0.12 + 0.11 / s) * d);
  return r;
}

}  // namespace

KsResult ks_two_sample(std::vector<double> xs, std::vector<double> ys) {
  require_size(xs.size(), 50);
  require_size(ys.size(), 50);
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const std::size_t n = xs.size(), m = ys.size();
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    const double v = std::min(xs[i], ys[j]);
    while (i < n && xs[i] <= v) ++i;
    while (j < m && ys[j] <= v) ++j;
    d = std::max(d, std::abs(double(i) / n - double(j) / m));
  }
  const double n_eff = double(n) * double(m) / double(n + m);
  return ks_from(d, n_eff);
}

KsResult ks_two_sample_weighted(std::vector<double> xs, std::vector<double> wx,
                                std::vector<double> ys, std::vector<double> wy) {
  require_size(xs.size(), 50);
  require_size(ys.size(), 50);
  if (xs.size() != wx.size() || ys.size() != wy.size())
    throw ConfigError("weights must match samples");
  auto order = [](std::vector<double>& v, std::vector<double>& w) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> v2(v.size()), w2(v.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      v2[k] = v[idx[k]];
      w2[k] = w[idx[k]];
    }
    v.swap(v2);
    w.swap(w2);
  };
  order(xs, wx);
  order(ys, wy);
  double sx = 0.0, sx2 = 0.0, sy = 0.0, sy2 = 0.0;
  for (double w : wx) {
    if (w < 0.0) throw ConfigError("negative weight");
    sx += w;
    sx2 += w * w;
  }
  for (double w : wy) {
    if (w < 0.0) throw ConfigError("negative weight");
    sy += w;
    sy2 += w * w;
  }
  if (sx <= 0.0 || sy <= 0.0) throw ConfigError("weights sum to zero");
  double d = 0.0, cx = 0.0, cy = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    const double v = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] <= v) cx += wx[i++];
    while (j < ys.size() && ys[j] <= v) cy += wy[j++];
    d = std::max(d, std::abs(cx / sx - cy / sy));
  }
  const double n1 = sx * sx / sx2;  // Kish effective sizes
  const double n2 = sy * sy / sy2;
  return ks_from(d, n1 * n2 / (n1 + n2));
}

KsResult ks_uniform(std::vector<double> xs) {
  require_size(xs.size(), 50);
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = std::clamp(xs[i], 0.0, 1.0);
    d = std::max(d, std::abs(double(i + 1) / n - u));
    d = std::max(d, std::abs(u - double(i) / n));
  }
  return ks_from(d, double(n));
}

Chi2Result chi_square(const std::vector<double>& observed,
                      const std::vector<double>& expected, int dof) {
  if (observed.size() != expected.size() || observed.empty())
    throw ConfigError("chi_square needs matching nonempty vectors");
  Chi2Result r;
  r.dof = dof;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    if (expected[k] <= 0.0) throw ConfigError("nonpositive expected count");
    const double diff = observed[k] - expected[k];
    r.statistic += diff * diff / expected[k];
  }
  r.p = dof > 0 ? gamma_q(dof / 2.0, r.statistic / 2.0) : 1.0;
  return r;
}

Chi2Result chi_square_uniform(const std::vector<long long>& counts) {
  long long total = 0;
  for (long long c : counts) total += c;
  require_size(static_cast<std::size_t>(total), 50);
  std::vector<double> obs(counts.begin(), counts.end());
  std::vector<double> exp(counts.size(), double(total) / counts.size());
  return chi_square(obs, exp, static_cast<int>(counts.size()) - 1);
}

Chi2Result chi_square_independence(long long n00, long long n01, long long n10,
                                   long long n11) {
  const double n = double(n00 + n01 + n10 + n11);
  require_size(static_cast<std::size_t>(n), 50);
  const double r0 = n00 + n01, r1 = n10 + n11;
  const double c0 = n00 + n10, c1 = n01 + n11;
  std::vector<double> obs{double(n00), double(n01), double(n10), double(n11)};
  std::vector<double> exp{r0 * c0 / n, r0 * c1 / n, r1 * c0 / n, r1 * c1 / n};
  return chi_square(obs, exp, 1);
}

Chi2Result chi_square_homogeneity(const std::vector<long long>& row1,
                                  const std::vector<long long>& row2) {
  if (row1.size() != row2.size() || row1.empty())
    throw ConfigError("homogeneity needs matching rows");
  double t1 = 0.0, t2 = 0.0;
  for (std::size_t k = 0; k < row1.size(); ++k) {
    t1 += row1[k];
    t2 += row2[k];
  }
  require_size(static_cast<std::size_t>(t1 + t2), 50);
  Chi2Result r;
  int dof = 0;
  for (std::size_t k = 0; k < row1.size(); ++k) {
    const double colsum = row1[k] + row2[k];
    if (colsum == 0.0) continue;  // empty category carries no information
    const double e1 = t1 * colsum / (t1 + t2);
    const double e2 = t2 * colsum / (t1 + t2);
    r.statistic += (row1[k] - e1) * (row1[k] - e1) / e1;
    r.statistic += (row2[k] - e2) * (row2[k] - e2) / e2;
    ++dof;
  }
  r.dof = dof - 1;
  r.p = r.dof > 0 ? gamma_q(r.dof / 2.0, r.statistic / 2.0) : 1.0;
  return r;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw ConfigError("tv_distance needs equal supports");
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::abs(p[k] - q[k]);
  return s / 2.0;
}

double mean(const std::vector<double>& xs) {
  require_size(xs.size(), 1);
  return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
}

double sample_stddev(const std::vector<double>& xs) {
  require_size(xs.size(), 2);
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / (xs.size() - 1));
}

double standard_error(const std::vector<double>& xs) {
  return sample_stddev(xs) / std::sqrt(double(xs.size()));
}

double correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ConfigError("correlation needs paired samples");
  require_size(xs.size(), 2);
  const double mx = mean(xs), my = mean(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace loopforge
