#include "tailagg/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tailagg/errors.hpp"

namespace tailagg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_block(std::size_t n, double mean_block) {
  if (n == 0) throw InvalidArgument("bootstrap of an empty series");
  if (!(mean_block >= 1.0)) throw InvalidArgument("mean block length must be >= 1");
}

// Calls visit(index) for the n resampled indices in order.
template <typename Visit>
void walk_resample(std::size_t n, double mean_block, Rng& rng, Visit&& visit) {
  const double restart = 1.0 / mean_block;
  const auto draw_start = [&] {
    return std::min(static_cast<std::size_t>(open_uniform(rng) * static_cast<double>(n)), n - 1);
  };
  std::size_t idx = draw_start();
  visit(idx);
  for (std::size_t t = 1; t < n; ++t) {
    if (open_uniform(rng) < restart) {
      idx = draw_start();
    } else {
      idx = idx + 1 == n ? 0 : idx + 1;
    }
    visit(idx);
  }
}

double type7_quantile(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<std::size_t> stationary_bootstrap_indices(std::size_t n, double mean_block, Rng& rng) {
  check_block(n, mean_block);
  std::vector<std::size_t> out;
  out.reserve(n);
  walk_resample(n, mean_block, rng, [&](std::size_t i) { out.push_back(i); });
  return out;
}

void stationary_bootstrap_counts(std::size_t n, double mean_block, Rng& rng,
                                 std::span<std::uint32_t> counts) {
  check_block(n, mean_block);
  if (counts.size() != n) throw InvalidArgument("counts span has the wrong length");
  std::fill(counts.begin(), counts.end(), 0u);
  walk_resample(n, mean_block, rng, [&](std::size_t i) { ++counts[i]; });
}

BootstrapCI percentile_ci(double point, std::span<const double> replicates, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("CI level must lie in (0, 1)");
  std::vector<double> ok;
  ok.reserve(replicates.size());
  for (const double v : replicates) {
    if (std::isfinite(v)) ok.push_back(v);
  }
  BootstrapCI ci;
  ci.point = point;
  ci.level = level;
  ci.n_boot = replicates.size();
  ci.n_dropped = replicates.size() - ok.size();
  if (ok.empty() || static_cast<double>(ci.n_dropped) > 0.1 * static_cast<double>(ci.n_boot)) {
    throw EstimationError("bootstrap statistic failed on " + std::to_string(ci.n_dropped) + " of " +
                          std::to_string(ci.n_boot) + " replicates");
  }
  std::sort(ok.begin(), ok.end());
  ci.lower = type7_quantile(ok, 0.5 * (1.0 - level));
  ci.upper = type7_quantile(ok, 0.5 * (1.0 + level));
  if (point < ci.lower || point > ci.upper) {
    ci.lower = std::min(ci.lower, point);
    ci.upper = std::max(ci.upper, point);
    ci.widened = true;
  }
  return ci;
}

std::vector<std::vector<double>> stationary_bootstrap_replicates(
    std::size_t n, const MultiIndexStatistic& statistic, const BootstrapOptions& opts) {
  check_block(n, opts.mean_block);
  std::vector<std::vector<double>> rows(opts.n_boot);
  const auto one = [&](std::size_t r) {
    Rng rng = make_stream(opts.seed, r);
    const auto idx = stationary_bootstrap_indices(n, opts.mean_block, rng);
    rows[r] = statistic(idx);
  };
  const auto B = static_cast<std::int64_t>(opts.n_boot);
  if (opts.execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t r = 0; r < B; ++r) one(static_cast<std::size_t>(r));
  } else {
    for (std::int64_t r = 0; r < B; ++r) one(static_cast<std::size_t>(r));
  }
  return rows;
}

BootstrapCI stationary_bootstrap(std::size_t n, const IndexStatistic& statistic,
                                 const BootstrapOptions& opts) {
  std::vector<std::size_t> identity(n);
  for (std::size_t i = 0; i < n; ++i) identity[i] = i;
  const double point = statistic(identity);
  const auto rows = stationary_bootstrap_replicates(
      n,
      [&](std::span<const std::size_t> idx) {
        try {
          return std::vector<double>{statistic(idx)};
        } catch (const Error&) {
          return std::vector<double>{kNaN};
        }
      },
      opts);
  std::vector<double> values(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) values[r] = rows[r][0];
  return percentile_ci(point, values, opts.level);
}

BootstrapCI stationary_bootstrap(
    std::span<const std::vector<double>> bundle,
    const std::function<double(std::span<const std::vector<double>>)>& statistic,
    const BootstrapOptions& opts) {
  if (bundle.empty()) throw InvalidArgument("empty series bundle");
  const auto n = bundle.front().size();
  for (const auto& s : bundle) {
    if (s.size() != n) throw InvalidArgument("series in a bundle must share a time index");
  }
  return stationary_bootstrap(
      n,
      [&](std::span<const std::size_t> idx) {
        std::vector<std::vector<double>> resampled(bundle.size());
        for (std::size_t k = 0; k < bundle.size(); ++k) {
          resampled[k].resize(idx.size());
          for (std::size_t t = 0; t < idx.size(); ++t) resampled[k][t] = bundle[k][idx[t]];
        }
        return statistic(resampled);
      },
      opts);
}

}  // namespace tailagg
