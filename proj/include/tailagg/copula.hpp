#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tailagg/random.hpp"

namespace tailagg {

enum class CopulaFamily {
  Logistic,
  InvertedLogistic,
  Gaussian,
  Independence,
  PerfectPositive,
  PerfectNegative,
};

/// A bivariate dependence family with its parameter.
///
/// `param` is gamma for Logistic ([0, 1)) and InvertedLogistic ((0, 1]),
/// rho for Gaussian ([0, 1)), and unused otherwise. Construct through the
/// named factories or `parse`, which validate the range.
struct CopulaSpec {
  CopulaFamily family = CopulaFamily::Independence;
  double param = 0.0;

  static CopulaSpec logistic(double gamma);
  static CopulaSpec inverted_logistic(double gamma);
  static CopulaSpec gaussian(double rho);
  static CopulaSpec independence();
  static CopulaSpec perfect_positive();
  static CopulaSpec perfect_negative();

  /// Parses `logistic:g`, `invlogistic:g`, `gaussian:r`, `indep`,
  /// `perfect+` and `perfect-`.
  static CopulaSpec parse(std::string_view text);
  /// Inverse of parse; the parameter is printed with round-trip precision.
  std::string to_string() const;

  bool operator==(const CopulaSpec&) const = default;
};

/// Theoretical chi, chi_bar and eta. `eta` is empty for perfect negative
/// dependence, whose chi_bar = -1 is reported as an annotation only.
struct DependenceSummary {
  double chi = 0.0;
  double chi_bar = 0.0;
  std::optional<double> eta;
};

struct UniformPair {
  double u;
  double v;
};

/// n pairs on (0,1)^2 drawn from the copula.
///
/// Logistic uses the positive-stable frailty construction (exact); the
/// inverted logistic reflects logistic pairs through (1-u, 1-v).
std::vector<UniformPair> copula_sample(const CopulaSpec& spec, std::size_t n, Rng& rng);

/// Same as copula_sample but fills `out` in place.
void copula_sample_into(const CopulaSpec& spec, std::span<UniformPair> out, Rng& rng);

/// One d-dimensional draw from the exchangeable extension of the family
/// (symmetric logistic, its inversion, equicorrelated Gaussian, independence,
/// comonotone). PerfectNegative is only defined for d = 2.
void copula_draw(const CopulaSpec& spec, std::span<double> out, Rng& rng);

DependenceSummary theoretical_dependence(const CopulaSpec& spec);

/// Logistic exponent measure V(x, y) = (x^{-1/gamma} + y^{-1/gamma})^gamma,
/// gamma in (0, 1]. Infinite arguments contribute zero.
double v_function_logistic(double gamma, double x, double y);

/// Ray function g(w) of the joint-survivor representation. Defined for the
/// logistic and inverted-logistic families only.
double ray_function_g(const CopulaSpec& spec, double w);

/// log of a positive alpha-stable draw with Laplace transform exp(-t^alpha),
/// alpha in (0, 1), via Kanter's representation.
double log_positive_stable(double alpha, Rng& rng);

}  // namespace tailagg
