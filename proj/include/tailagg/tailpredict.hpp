#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "tailagg/copula.hpp"
#include "tailagg/gpd.hpp"

namespace tailagg {

enum class TailRegime { Heavy, Exponential, Bounded };

/// Multiplicative factor in front of the leading tail term.
/// LinearInR marks a non-constant power-of-r factor (the r/(2 eta sigma)
/// term for equal exponential scales, and the interior-maximum rows of the
/// inverted-EV and Gaussian copulas). IntervalConstant marks the bounded
/// constant C in [1, C1] of the mixed-sign, zero-maximum case.
enum class PrefactorClass { Constant, LinearInR, IntervalConstant };

/// First-order upper tail of R = X1 + X2:
///   Heavy:       Pr{R >= r} ~ K r^{-1/xi_R}
///   Exponential: Pr{R >= r} ~ K exp(-r / sigma_R)
///   Bounded:     Pr{R >= r} ~ K (1 - r / r_F)^{-1/xi_R}
struct TailForm {
  TailRegime regime = TailRegime::Exponential;
  std::optional<double> xi_R;
  std::optional<double> sigma_R;
  double r_F = std::numeric_limits<double>::infinity();
  PrefactorClass prefactor_class = PrefactorClass::Constant;
  std::optional<std::pair<double, double>> c_bounds;
  /// Which result produced the form, e.g. "unequal-negative-shapes:cond2" or "copula:gaussian".
  std::string basis;

  /// xi_R for Heavy/Bounded, sigma_R for Exponential.
  double parameter() const;
};

struct MarginPair {
  GpdParams m1;
  GpdParams m2;
};

/// Condition on the ray function g that selects a theorem branch.
enum class LtCondition { Cond1, Cond2, Cond3a, Cond3b };

/// Limit-model dependence description: eta, the Condition 2 exponent kappa
/// and the asserted condition. An empty eta means the dependence has no
/// eta (perfect negative dependence); only eta-free cases then apply.
struct LtDescriptor {
  std::optional<double> eta;
  std::optional<double> kappa;
  LtCondition condition = LtCondition::Cond2;
};

/// Tail form from the limit theorems, dispatched on (xi1, xi2):
/// equal non-zero shapes, equal zero shapes, unequal negative shapes, and
/// unequal shapes with a non-negative maximum. Shape equality is exact.
/// Throws PredictionError when the condition does not fit the case.
TailForm predict_theorem(const MarginPair& margins, const LtDescriptor& dep);

/// The descriptor used when a copula family is routed to predict_theorem.
LtDescriptor lt_descriptor_for(const CopulaSpec& spec);

/// Tail form for a copula family: the copula-specific table for
/// xi1 = xi2 = 0 and for unequal negative shapes, predict_theorem otherwise.
TailForm predict_copula(const MarginPair& margins, const CopulaSpec& spec);

/// sigma_R for xi1 = xi2 = 0 under the inverted logistic copula:
/// max over w of 1 / V(sigma1 / w, sigma2 / (1 - w)).
double inverted_logistic_sigma_R(double gamma, double sigma1, double sigma2);

/// sigma_R for xi1 = xi2 = 0 under the Gaussian copula:
/// (1 - rho^2) max over w of 1 / h(w),
/// h(w) = w/sigma1 - 2 rho sqrt(w (1-w) / (sigma1 sigma2)) + (1-w)/sigma2.
double gaussian_sigma_R(double rho, double sigma1, double sigma2);

/// Law of (R - u_R) | R > u_R when the tail form holds with equality above u_R.
GpdParams gpd_equivalent(const TailForm& form, double u_R);

std::string to_string(TailRegime r);
std::string to_string(PrefactorClass c);
std::string to_string(LtCondition c);
LtCondition parse_condition(const std::string& text);

}  // namespace tailagg
