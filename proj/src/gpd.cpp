#include "tailagg/gpd.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tailagg/errors.hpp"

namespace tailagg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool exponential_branch(double xi) { return std::abs(xi) < kXiZeroTol; }

}  // namespace

GpdParams::GpdParams(double sigma_, double xi_) : sigma(sigma_), xi(xi_) {
  if (!std::isfinite(sigma) || !std::isfinite(xi) || !(sigma > 0.0)) {
    throw InvalidArgument("GPD requires finite sigma > 0 and finite xi (got sigma=" +
                          std::to_string(sigma) + ", xi=" + std::to_string(xi) + ")");
  }
}

double GpdParams::upper_endpoint() const { return xi < 0.0 ? -sigma / xi : kInf; }

double gpd_survival(const GpdParams& p, double x) {
  if (!(x > 0.0)) return 1.0;
  if (exponential_branch(p.xi)) return std::exp(-x / p.sigma);
  const double z = p.xi * x / p.sigma;
  if (z <= -1.0) return 0.0;
  return std::exp(-std::log1p(z) / p.xi);
}

double gpd_cdf(const GpdParams& p, double x) {
  if (!(x > 0.0)) return 0.0;
  if (exponential_branch(p.xi)) return -std::expm1(-x / p.sigma);
  const double z = p.xi * x / p.sigma;
  if (z <= -1.0) return 1.0;
  return -std::expm1(-std::log1p(z) / p.xi);
}

double gpd_quantile(const GpdParams& p, double q) {
  if (!(q >= 0.0) || q > 1.0) {
    throw InvalidArgument("gpd_quantile requires 0 <= q <= 1, got " + std::to_string(q));
  }
  if (q == 1.0) {
    if (p.xi < 0.0 && !exponential_branch(p.xi)) return p.upper_endpoint();
    throw InvalidArgument("gpd_quantile: q = 1 has an infinite quantile when xi >= 0");
  }
  const double log_tail = std::log1p(-q);
  if (exponential_branch(p.xi)) return -p.sigma * log_tail;
  return p.sigma * std::expm1(-p.xi * log_tail) / p.xi;
}

double gpd_tail_quantile(const GpdParams& p, double tail_prob) {
  if (!(tail_prob > 0.0) || tail_prob > 1.0) {
    throw InvalidArgument("gpd_tail_quantile requires 0 < tail_prob <= 1");
  }
  const double log_tail = std::log(tail_prob);
  if (exponential_branch(p.xi)) return -p.sigma * log_tail;
  return p.sigma * std::expm1(-p.xi * log_tail) / p.xi;
}

double gpd_logpdf(const GpdParams& p, double x) {
  if (x < 0.0) return -kInf;
  const double y = x / p.sigma;
  if (exponential_branch(p.xi)) return -std::log(p.sigma) - y;
  const double z = p.xi * y;
  if (z <= -1.0) return -kInf;
  return -std::log(p.sigma) - (1.0 + 1.0 / p.xi) * std::log1p(z);
}

std::vector<double> gpd_sample(const GpdParams& p, std::size_t n, Rng& rng) {
  std::vector<double> out(n);
  for (auto& x : out) x = gpd_tail_quantile(p, open_uniform(rng));
  return out;
}

GpdParams threshold_stability(const GpdParams& p, double u) {
  if (!(u >= 0.0) || !(u < p.upper_endpoint())) {
    throw InvalidArgument("threshold_stability requires 0 <= u < upper endpoint (u=" +
                          std::to_string(u) + ")");
  }
  if (exponential_branch(p.xi)) return p;
  return GpdParams(p.sigma + p.xi * u, p.xi);
}

}  // namespace tailagg
