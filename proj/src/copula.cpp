#include "tailagg/copula.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include "tailagg/errors.hpp"

namespace tailagg {

namespace {

constexpr double kOneBelow = 1.0 - 0x1.0p-53;

double clamp_open(double u) {
  return std::clamp(u, std::numeric_limits<double>::min(), kOneBelow);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// log(exp(a) + exp(b)) for a, b possibly -inf.
double log_add_exp(double a, double b) {
  const double hi = std::max(a, b);
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
}

std::string format_param(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument(message);
}

// u_i = exp(-(E_i / S)^gamma) with S positive stable of index gamma.
void logistic_draw(double gamma, std::span<double> out, Rng& rng) {
  if (gamma == 0.0) {
    const double u = open_uniform(rng);
    std::fill(out.begin(), out.end(), u);
    return;
  }
  const double log_s = log_positive_stable(gamma, rng);
  for (auto& u : out) {
    const double log_e = std::log(standard_exponential(rng));
    u = clamp_open(std::exp(-std::exp(gamma * (log_e - log_s))));
  }
}

}  // namespace

CopulaSpec CopulaSpec::logistic(double gamma) {
  require(gamma >= 0.0 && gamma < 1.0, "logistic copula requires gamma in [0, 1)");
  return {CopulaFamily::Logistic, gamma};
}

CopulaSpec CopulaSpec::inverted_logistic(double gamma) {
  require(gamma > 0.0 && gamma <= 1.0, "inverted logistic copula requires gamma in (0, 1]");
  return {CopulaFamily::InvertedLogistic, gamma};
}

CopulaSpec CopulaSpec::gaussian(double rho) {
  require(rho >= 0.0 && rho < 1.0, "gaussian copula requires rho in [0, 1)");
  return {CopulaFamily::Gaussian, rho};
}

CopulaSpec CopulaSpec::independence() { return {CopulaFamily::Independence, 0.0}; }
CopulaSpec CopulaSpec::perfect_positive() { return {CopulaFamily::PerfectPositive, 0.0}; }
CopulaSpec CopulaSpec::perfect_negative() { return {CopulaFamily::PerfectNegative, 0.0}; }

CopulaSpec CopulaSpec::parse(std::string_view text) {
  if (text == "indep") return independence();
  if (text == "perfect+") return perfect_positive();
  if (text == "perfect-") return perfect_negative();
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw InvalidArgument("unknown copula '" + std::string(text) + "'");
  }
  const auto name = text.substr(0, colon);
  const auto value_text = text.substr(colon + 1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(value_text.data(), value_text.data() + value_text.size(), value);
  if (ec != std::errc{} || ptr != value_text.data() + value_text.size()) {
    throw InvalidArgument("bad copula parameter in '" + std::string(text) + "'");
  }
  if (name == "logistic") return logistic(value);
  if (name == "invlogistic") return inverted_logistic(value);
  if (name == "gaussian") return gaussian(value);
  throw InvalidArgument("unknown copula '" + std::string(text) + "'");
}

std::string CopulaSpec::to_string() const {
  switch (family) {
    case CopulaFamily::Logistic: return "logistic:" + format_param(param);
    case CopulaFamily::InvertedLogistic: return "invlogistic:" + format_param(param);
    case CopulaFamily::Gaussian: return "gaussian:" + format_param(param);
    case CopulaFamily::Independence: return "indep";
    case CopulaFamily::PerfectPositive: return "perfect+";
    case CopulaFamily::PerfectNegative: return "perfect-";
  }
  return "?";
}

double log_positive_stable(double alpha, Rng& rng) {
  const double u = std::numbers::pi * open_uniform(rng);
  const double e = standard_exponential(rng);
  return std::log(std::sin(alpha * u)) - std::log(std::sin(u)) / alpha +
         (1.0 - alpha) / alpha * (std::log(std::sin((1.0 - alpha) * u)) - std::log(e));
}

void copula_draw(const CopulaSpec& spec, std::span<double> out, Rng& rng) {
  switch (spec.family) {
    case CopulaFamily::Logistic:
      logistic_draw(spec.param, out, rng);
      return;
    case CopulaFamily::InvertedLogistic:
      logistic_draw(spec.param, out, rng);
      for (auto& u : out) u = clamp_open(1.0 - u);
      return;
    case CopulaFamily::Gaussian: {
      const double common = standard_normal(rng);
      const double a = std::sqrt(spec.param);
      const double b = std::sqrt(1.0 - spec.param);
      for (auto& u : out) u = clamp_open(normal_cdf(a * common + b * standard_normal(rng)));
      return;
    }
    case CopulaFamily::Independence:
      for (auto& u : out) u = open_uniform(rng);
      return;
    case CopulaFamily::PerfectPositive: {
      const double u = open_uniform(rng);
      std::fill(out.begin(), out.end(), u);
      return;
    }
    case CopulaFamily::PerfectNegative:
      if (out.size() != 2) {
        throw InvalidArgument("perfect negative dependence is only defined in two dimensions");
      }
      out[0] = open_uniform(rng);
      out[1] = 1.0 - out[0];
      return;
  }
}

void copula_sample_into(const CopulaSpec& spec, std::span<UniformPair> out, Rng& rng) {
  switch (spec.family) {
    case CopulaFamily::Gaussian: {
      const double rho = spec.param;
      const double tail = std::sqrt(1.0 - rho * rho);
      for (auto& pr : out) {
        const double z1 = standard_normal(rng);
        const double z2 = rho * z1 + tail * standard_normal(rng);
        pr = {clamp_open(normal_cdf(z1)), clamp_open(normal_cdf(z2))};
      }
      return;
    }
    default: {
      double buf[2];
      for (auto& pr : out) {
        copula_draw(spec, buf, rng);
        pr = {buf[0], buf[1]};
      }
      return;
    }
  }
}

std::vector<UniformPair> copula_sample(const CopulaSpec& spec, std::size_t n, Rng& rng) {
  std::vector<UniformPair> out(n);
  copula_sample_into(spec, out, rng);
  return out;
}

DependenceSummary theoretical_dependence(const CopulaSpec& spec) {
  switch (spec.family) {
    case CopulaFamily::Logistic:
      return {2.0 - std::pow(2.0, spec.param), 1.0, 1.0};
    case CopulaFamily::InvertedLogistic: {
      const double eta = std::pow(2.0, -spec.param);
      return {0.0, 2.0 * eta - 1.0, eta};
    }
    case CopulaFamily::Gaussian: {
      const double eta = 0.5 * (1.0 + spec.param);
      return {0.0, 2.0 * eta - 1.0, eta};
    }
    case CopulaFamily::Independence:
      return {0.0, 0.0, 0.5};
    case CopulaFamily::PerfectPositive:
      return {1.0, 1.0, 1.0};
    case CopulaFamily::PerfectNegative:
      return {0.0, -1.0, std::nullopt};
  }
  return {};
}

double v_function_logistic(double gamma, double x, double y) {
  require(gamma > 0.0 && gamma <= 1.0, "V function requires gamma in (0, 1]");
  require(x > 0.0 && y > 0.0, "V function requires positive arguments");
  const double a = -std::log(x) / gamma;
  const double b = -std::log(y) / gamma;
  return std::exp(gamma * log_add_exp(a, b));
}

double ray_function_g(const CopulaSpec& spec, double w) {
  require(w > 0.0 && w < 1.0, "ray function requires w in (0, 1)");
  switch (spec.family) {
    case CopulaFamily::InvertedLogistic:
      return 1.0;
    case CopulaFamily::Logistic: {
      const double gamma = spec.param;
      double inner;
      if (gamma == 0.0) {
        inner = std::max(w, 1.0 - w);
      } else {
        inner = std::exp(gamma * log_add_exp(std::log(w) / gamma, std::log1p(-w) / gamma));
      }
      return (1.0 - inner) / std::sqrt(w * (1.0 - w));
    }
    default:
      throw InvalidArgument("ray function g is only available for logistic families, not " +
                            spec.to_string());
  }
}

}  // namespace tailagg
