#include "tailagg/tailpredict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tailagg/errors.hpp"
#include "tailagg/optimize.hpp"

namespace tailagg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TailForm heavy(double xi, std::string basis) {
  TailForm f;
  f.regime = TailRegime::Heavy;
  f.xi_R = xi;
  f.basis = std::move(basis);
  return f;
}

TailForm exponential(double sigma, PrefactorClass prefactor, std::string basis) {
  TailForm f;
  f.regime = TailRegime::Exponential;
  f.sigma_R = sigma;
  f.prefactor_class = prefactor;
  f.basis = std::move(basis);
  return f;
}

TailForm bounded(double xi, double r_F, std::string basis) {
  TailForm f;
  f.regime = TailRegime::Bounded;
  f.xi_R = xi;
  f.r_F = r_F;
  f.basis = std::move(basis);
  return f;
}

// Sum of the marginal endpoints when both shapes are negative.
double endpoint_sum(const MarginPair& m) {
  return -(m.m1.sigma / m.m1.xi + m.m2.sigma / m.m2.xi);
}

double require_eta(const LtDescriptor& dep, const char* shape_case) {
  if (!dep.eta) {
    throw PredictionError(std::string(shape_case) +
                          " needs eta, which perfect negative dependence does not have");
  }
  if (*dep.eta < 0.5) {
    throw PredictionError(std::string(shape_case) + " assumes eta >= 1/2 (non-negative chi_bar)");
  }
  return *dep.eta;
}

void validate(const LtDescriptor& dep) {
  if (dep.eta && !(*dep.eta > 0.0 && *dep.eta <= 1.0)) {
    throw InvalidArgument("eta must lie in (0, 1]");
  }
  if (dep.condition == LtCondition::Cond2) {
    if (dep.kappa && dep.eta && !(*dep.kappa >= 0.0 && *dep.kappa < 0.5 / *dep.eta)) {
      throw InvalidArgument("Condition 2 requires 0 <= kappa < 1/(2 eta)");
    }
  }
}

TailForm equal_nonzero_shapes(const MarginPair& m, const LtDescriptor& dep) {
  const double xi = m.m1.xi;
  const double eta = require_eta(dep, "equal shapes");
  if (xi < 0.0) {
    if (dep.condition == LtCondition::Cond1) {
      throw PredictionError("equal shapes: Condition 1 concerns exponential margins (xi = 0)");
    }
    return bounded(eta * xi, -(m.m1.sigma + m.m2.sigma) / xi, "equal-shapes:negative");
  }
  const bool cond3 = dep.condition == LtCondition::Cond3a || dep.condition == LtCondition::Cond3b;
  if (dep.condition == LtCondition::Cond2 || (cond3 && eta == 1.0)) {
    return heavy(xi, "equal-shapes:positive");
  }
  throw PredictionError(
      "equal shapes with xi > 0 needs Condition 2, or Condition 3 with eta = 1");
}

TailForm zero_shapes(const MarginPair& m, const LtDescriptor& dep) {
  const double s1 = m.m1.sigma, s2 = m.m2.sigma;
  const double eta = require_eta(dep, "zero shapes");
  switch (dep.condition) {
    case LtCondition::Cond1:
      if (s1 != s2) {
        return exponential(2.0 * eta * std::max(s1, s2), PrefactorClass::Constant,
                           "zero-shapes:cond1");
      }
      return exponential(2.0 * eta * s1, PrefactorClass::LinearInR, "zero-shapes:cond1-equal-scale");
    case LtCondition::Cond3a:
      if (eta != 1.0) throw PredictionError("zero shapes: Condition 3a branch requires eta = 1");
      return exponential(s1 + s2, PrefactorClass::Constant, "zero-shapes:cond3a");
    default:
      throw PredictionError("xi1 = xi2 = 0 needs Condition 1 or Condition 3a");
  }
}

TailForm unequal_negative_shapes(const MarginPair& m, const LtDescriptor& dep) {
  const double xi_max = std::max(m.m1.xi, m.m2.xi);
  const double xi_min = std::min(m.m1.xi, m.m2.xi);
  const double eta = require_eta(dep, "unequal negative shapes");
  switch (dep.condition) {
    case LtCondition::Cond2: {
      if (!dep.kappa) throw PredictionError("unequal negative shapes: Condition 2 requires kappa");
      const double kappa = *dep.kappa;
      const double inv = (0.5 / eta + kappa) / xi_max + (0.5 / eta - kappa) / xi_min;
      return bounded(1.0 / inv, endpoint_sum(m), "unequal-negative-shapes:cond2");
    }
    case LtCondition::Cond3b:
      return bounded(eta * xi_max, endpoint_sum(m), "unequal-negative-shapes:cond3b");
    default:
      throw PredictionError("unequal negative shapes needs Condition 2 or 3b");
  }
}

TailForm mixed_shapes(const MarginPair& m) {
  const bool first_max = m.m1.xi > m.m2.xi;
  const GpdParams& top = first_max ? m.m1 : m.m2;
  const GpdParams& other = first_max ? m.m2 : m.m1;
  if (top.xi > 0.0) return heavy(top.xi, "mixed-shapes:positive");
  // top.xi == 0 and other.xi < 0.
  TailForm f = exponential(top.sigma, PrefactorClass::IntervalConstant, "mixed-shapes:zero");
  const double c1 = std::exp(-other.sigma / (top.sigma * other.xi));
  f.c_bounds = std::make_pair(1.0, c1);
  return f;
}

}  // namespace

double TailForm::parameter() const {
  if (regime == TailRegime::Exponential) return sigma_R.value();
  return xi_R.value();
}

TailForm predict_theorem(const MarginPair& margins, const LtDescriptor& dep) {
  validate(dep);
  const double x1 = margins.m1.xi, x2 = margins.m2.xi;
  if (x1 == x2) {
    if (x1 == 0.0) return zero_shapes(margins, dep);
    return equal_nonzero_shapes(margins, dep);
  }
  if (std::max(x1, x2) < 0.0) return unequal_negative_shapes(margins, dep);
  return mixed_shapes(margins);
}

LtDescriptor lt_descriptor_for(const CopulaSpec& spec) {
  const auto summary = theoretical_dependence(spec);
  switch (spec.family) {
    case CopulaFamily::Logistic:
    case CopulaFamily::PerfectPositive:
      // Condition 3 with H = V, eta = 1, kappa = 1/2.
      return {summary.eta, 0.5, LtCondition::Cond3a};
    case CopulaFamily::Independence:
      return {summary.eta, 0.0, LtCondition::Cond2};
    case CopulaFamily::InvertedLogistic:
    case CopulaFamily::Gaussian:
      return {summary.eta, 0.0, LtCondition::Cond2};
    case CopulaFamily::PerfectNegative:
      return {std::nullopt, std::nullopt, LtCondition::Cond2};
  }
  return {};
}

double inverted_logistic_sigma_R(double gamma, double sigma1, double sigma2) {
  const auto best = maximize_unit_interval([&](double w) {
    return 1.0 / v_function_logistic(gamma, sigma1 / w, sigma2 / (1.0 - w));
  });
  return best.value;
}

double gaussian_sigma_R(double rho, double sigma1, double sigma2) {
  const auto best = maximize_unit_interval([&](double w) {
    const double h = w / sigma1 - 2.0 * rho * std::sqrt(w * (1.0 - w) / (sigma1 * sigma2)) +
                     (1.0 - w) / sigma2;
    return 1.0 / h;
  });
  return (1.0 - rho * rho) * best.value;
}

TailForm predict_copula(const MarginPair& margins, const CopulaSpec& spec) {
  const double x1 = margins.m1.xi, x2 = margins.m2.xi;
  const double s1 = margins.m1.sigma, s2 = margins.m2.sigma;
  const bool zero_case = x1 == 0.0 && x2 == 0.0;
  const bool negative_case = x1 != x2 && std::max(x1, x2) < 0.0;

  if (zero_case) {
    switch (spec.family) {
      case CopulaFamily::Independence:
        return exponential(std::max(s1, s2),
                           s1 == s2 ? PrefactorClass::LinearInR : PrefactorClass::Constant,
                           "copula:independence");
      case CopulaFamily::PerfectPositive:
        return exponential(s1 + s2, PrefactorClass::Constant, "copula:perfect-dependence");
      case CopulaFamily::Logistic:
        return exponential(s1 + s2, PrefactorClass::Constant, "copula:extreme-value");
      case CopulaFamily::InvertedLogistic:
        if (spec.param == 1.0) {
          return predict_copula(margins, CopulaSpec::independence());
        }
        return exponential(inverted_logistic_sigma_R(spec.param, s1, s2),
                           PrefactorClass::LinearInR, "copula:inverted-extreme-value");
      case CopulaFamily::Gaussian:
        if (spec.param == 0.0) return predict_copula(margins, CopulaSpec::independence());
        return exponential(gaussian_sigma_R(spec.param, s1, s2), PrefactorClass::LinearInR,
                           "copula:gaussian");
      case CopulaFamily::PerfectNegative:
        throw PredictionError(
            "xi1 = xi2 = 0 needs eta, which perfect negative dependence does not have");
    }
  }

  if (negative_case) {
    const double r_F = endpoint_sum(margins);
    switch (spec.family) {
      case CopulaFamily::Independence:
        return bounded(1.0 / (1.0 / x1 + 1.0 / x2), r_F, "copula:independence");
      case CopulaFamily::PerfectPositive:
        return bounded(std::max(x1, x2), r_F, "copula:perfect-dependence");
      case CopulaFamily::Logistic:
        return bounded(std::max(x1, x2), r_F, "copula:extreme-value");
      case CopulaFamily::InvertedLogistic:
        return bounded(-1.0 / v_function_logistic(spec.param, -x1, -x2), r_F,
                       "copula:inverted-extreme-value");
      case CopulaFamily::Gaussian: {
        const double rho = spec.param;
        const double inv = 1.0 / x1 + 2.0 * rho / std::sqrt(x1 * x2) + 1.0 / x2;
        return bounded((1.0 - rho * rho) / inv, r_F, "copula:gaussian");
      }
      case CopulaFamily::PerfectNegative:
        throw PredictionError(
            "unequal negative shapes need eta, which perfect negative dependence does not have");
    }
  }

  return predict_theorem(margins, lt_descriptor_for(spec));
}

GpdParams gpd_equivalent(const TailForm& form, double u_R) {
  if (!(u_R >= 0.0)) throw InvalidArgument("gpd_equivalent requires u_R >= 0");
  if (!(u_R < form.r_F)) throw InvalidArgument("gpd_equivalent requires u_R < r_F");
  switch (form.regime) {
    case TailRegime::Heavy:
      if (u_R == 0.0) throw InvalidArgument("heavy tail with u_R = 0 has zero scale");
      return GpdParams(u_R * form.xi_R.value(), form.xi_R.value());
    case TailRegime::Exponential:
      return GpdParams(form.sigma_R.value(), 0.0);
    case TailRegime::Bounded:
      return GpdParams(-form.xi_R.value() * (form.r_F - u_R), form.xi_R.value());
  }
  return {};
}

std::string to_string(TailRegime r) {
  switch (r) {
    case TailRegime::Heavy: return "heavy";
    case TailRegime::Exponential: return "exponential";
    case TailRegime::Bounded: return "bounded";
  }
  return "?";
}

std::string to_string(PrefactorClass c) {
  switch (c) {
    case PrefactorClass::Constant: return "constant";
    case PrefactorClass::LinearInR: return "linear_in_r";
    case PrefactorClass::IntervalConstant: return "interval_constant";
  }
  return "?";
}

std::string to_string(LtCondition c) {
  switch (c) {
    case LtCondition::Cond1: return "cond1";
    case LtCondition::Cond2: return "cond2";
    case LtCondition::Cond3a: return "cond3a";
    case LtCondition::Cond3b: return "cond3b";
  }
  return "?";
}

LtCondition parse_condition(const std::string& text) {
  if (text == "cond1" || text == "1") return LtCondition::Cond1;
  if (text == "cond2" || text == "2") return LtCondition::Cond2;
  if (text == "cond3a" || text == "3a") return LtCondition::Cond3a;
  if (text == "cond3b" || text == "3b") return LtCondition::Cond3b;
  throw InvalidArgument("unknown condition '" + text + "' (expected cond1, cond2, cond3a, cond3b)");
}

}  // namespace tailagg
