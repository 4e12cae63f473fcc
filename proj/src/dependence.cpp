#include "tailagg/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tailagg/errors.hpp"
#include "tailagg/stats.hpp"

namespace tailagg {

std::size_t order_statistic_index(std::size_t n, double p) {
  if (n == 0) throw InvalidArgument("quantile of an empty sample");
  const double scaled = static_cast<double>(n) * p;
  auto k = static_cast<std::size_t>(std::max(0.0, std::ceil(scaled - 1e-12 * scaled)));
  k = std::clamp<std::size_t>(k, 1, n);
  return k - 1;
}

double empirical_quantile(std::span<const double> values, double p) {
  std::vector<double> copy(values.begin(), values.end());
  const auto k = order_statistic_index(copy.size(), p);
  std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(k), copy.end());
  return copy[k];
}

namespace {

void check_pair_sample(std::span<const double> x1, std::span<const double> x2, double q) {
  if (x1.size() != x2.size()) throw InvalidArgument("paired sample has unequal lengths");
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("threshold probability must lie in (0, 1)");
  if (static_cast<double>(x1.size()) * (1.0 - q) < 10.0) {
    throw InvalidArgument("need n (1 - q) >= 10 (n=" + std::to_string(x1.size()) +
                          ", q=" + std::to_string(q) + ")");
  }
}

std::vector<std::size_t> sort_order(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  return order;
}

void split_columns(std::span<const UniformPair> sample, std::vector<double>& a,
                   std::vector<double>& b) {
  a.resize(sample.size());
  b.resize(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    a[i] = sample[i].u;
    b[i] = sample[i].v;
  }
}

// Mean excess of the structure variable above its q-quantile; `t` is reordered.
DependenceEstimate eta_from_structure(std::vector<double>& t, double q) {
  const auto k = order_statistic_index(t.size(), q);
  std::nth_element(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(k), t.end());
  const double threshold = t[k];
  double sum = 0.0;
  std::size_t count = 0;
  for (auto it = t.begin() + static_cast<std::ptrdiff_t>(k) + 1; it != t.end(); ++it) {
    if (*it > threshold) {
      sum += *it - threshold;
      ++count;
    }
  }
  if (count == 0) throw EstimationError("eta: no exceedances of the structure-variable threshold");
  double value = sum / static_cast<double>(count);
  if (!(value > 0.0)) throw EstimationError("eta: degenerate structure variable");
  DependenceEstimate est;
  est.threshold_q = q;
  est.n_exceed = count;
  if (value > 1.0) {
    value = 1.0;
    est.clamped = true;
  }
  est.value = value;
  est.stderr_ = value / std::sqrt(static_cast<double>(count));
  return est;
}

double exponential_margin(double pseudo_uniform) { return -std::log1p(-pseudo_uniform); }

}  // namespace

std::vector<double> pseudo_uniform_ranks(std::span<const double> x) {
  const auto n = x.size();
  const auto order = sort_order(x);
  std::vector<double> ranks(n);
  const double denom = static_cast<double>(n) + 1.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    // Ranks i+1..j share their average.
    const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg / denom;
    i = j;
  }
  return ranks;
}

DependenceEstimate chi_empirical(std::span<const double> x1, std::span<const double> x2,
                                 double q) {
  check_pair_sample(x1, x2, q);
  const auto u = pseudo_uniform_ranks(x1);
  const auto v = pseudo_uniform_ranks(x2);
  std::size_t joint = 0, marginal = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (v[i] > q) {
      ++marginal;
      if (u[i] > q) ++joint;
    }
  }
  if (marginal == 0) throw EstimationError("chi: no exceedances of q in the conditioning margin");
  DependenceEstimate est;
  est.value = static_cast<double>(joint) / static_cast<double>(marginal);
  est.threshold_q = q;
  est.n_exceed = marginal;
  est.stderr_ = std::sqrt(est.value * (1.0 - est.value) / static_cast<double>(marginal));
  return est;
}

DependenceEstimate chi_empirical(std::span<const UniformPair> sample, double q) {
  std::vector<double> a, b;
  split_columns(sample, a, b);
  return chi_empirical(a, b, q);
}

DependenceEstimate eta_estimate(std::span<const double> x1, std::span<const double> x2,
                                double q) {
  check_pair_sample(x1, x2, q);
  const auto u = pseudo_uniform_ranks(x1);
  const auto v = pseudo_uniform_ranks(x2);
  std::vector<double> t(u.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = std::min(exponential_margin(u[i]), exponential_margin(v[i]));
  }
  return eta_from_structure(t, q);
}

DependenceEstimate eta_estimate(std::span<const UniformPair> sample, double q) {
  std::vector<double> a, b;
  split_columns(sample, a, b);
  return eta_estimate(a, b, q);
}

EtaResampler::EtaResampler(std::span<const double> x1, std::span<const double> x2)
    : x1_(x1.begin(), x1.end()), x2_(x2.begin(), x2.end()) {
  if (x1.size() != x2.size()) throw InvalidArgument("paired sample has unequal lengths");
  order1_ = sort_order(x1_);
  order2_ = sort_order(x2_);
}

void EtaResampler::ranks_into(const std::vector<std::size_t>& order,
                              const std::vector<double>& values,
                              std::span<const std::uint32_t> counts, std::size_t total,
                              std::vector<double>& out) const {
  const auto n = order.size();
  const double denom = static_cast<double>(total) + 1.0;
  std::size_t before = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    std::size_t group = 0;
    while (j < n && values[order[j]] == values[order[i]]) {
      group += counts[order[j]];
      ++j;
    }
    if (group > 0) {
      const double avg = static_cast<double>(before) + 0.5 * (static_cast<double>(group) + 1.0);
      for (std::size_t k = i; k < j; ++k) out[order[k]] = avg / denom;
      before += group;
    }
    i = j;
  }
}

DependenceEstimate EtaResampler::estimate(std::span<const std::uint32_t> counts, double q) const {
  const auto n = size();
  if (counts.size() != n) throw InvalidArgument("resample counts have the wrong length");
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("threshold probability must lie in (0, 1)");
  if (static_cast<double>(total) * (1.0 - q) < 10.0) {
    throw InvalidArgument("need n (1 - q) >= 10 for eta");
  }
  std::vector<double> u(n), v(n);
  ranks_into(order1_, x1_, counts, total, u);
  ranks_into(order2_, x2_, counts, total, v);
  std::vector<double> t;
  t.reserve(total);
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[i] == 0) continue;
    const double value = std::min(exponential_margin(u[i]), exponential_margin(v[i]));
    t.insert(t.end(), counts[i], value);
  }
  return eta_from_structure(t, q);
}

}  // namespace tailagg
