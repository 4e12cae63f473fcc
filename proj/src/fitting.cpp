#include "tailagg/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "tailagg/errors.hpp"
#include "tailagg/stats.hpp"

namespace tailagg {

namespace {

constexpr double kSeriesCut = 1e-3;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log1p(a)/a
double l1(double a) {
  if (std::abs(a) < kSeriesCut) {
    return 1.0 - a / 2.0 + a * a / 3.0 - a * a * a / 4.0 + a * a * a * a / 5.0;
  }
  return std::log1p(a) / a;
}

// (log1p(a) - a/(1+a)) / a^2 = sum_{k>=2} (-1)^k (k-1)/k a^{k-2}
double phi2(double a) {
  if (std::abs(a) < kSeriesCut) {
    double sum = 0.0, pw = 1.0;
    for (int k = 2; k < 10; ++k, pw *= -a) sum += pw * (k - 1.0) / k;
    return sum;
  }
  return (std::log1p(a) - a / (1.0 + a)) / (a * a);
}

// (a^2/(1+a)^2 - 2 (log1p(a) - a/(1+a))) / a^3 = sum_{k>=3} (-1)^k (k-1)(k-2)/k a^{k-3}
double x3(double a) {
  if (std::abs(a) < kSeriesCut) {
    double sum = 0.0, pw = -1.0;
    for (int k = 3; k < 11; ++k, pw *= -a) sum += pw * (k - 1.0) * (k - 2.0) / k;
    return sum;
  }
  const double t = 1.0 + a;
  return (a * a / (t * t) - 2.0 * (std::log1p(a) - a / t)) / (a * a * a);
}

double weight_at(std::span<const double> w, std::size_t i) { return w.empty() ? 1.0 : w[i]; }

double total_weight(const WeightedExcesses& s) {
  if (s.weights.empty()) return static_cast<double>(s.excess.size());
  return std::accumulate(s.weights.begin(), s.weights.end(), 0.0);
}

struct Evaluation {
  double loglik = kNegInf;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

// Log-likelihood (and optionally derivatives) in theta = (log sigma_1..K, xi).
Evaluation evaluate(std::span<const WeightedExcesses> series, const Eigen::VectorXd& theta,
                    bool derivatives) {
  const auto K = static_cast<Eigen::Index>(series.size());
  const double xi = theta(K);
  Evaluation ev;
  if (derivatives) {
    ev.grad = Eigen::VectorXd::Zero(K + 1);
    ev.hess = Eigen::MatrixXd::Zero(K + 1, K + 1);
  }
  double ll = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto& s = series[static_cast<std::size_t>(k)];
    const double log_sigma = theta(k);
    const double inv_sigma = std::exp(-log_sigma);
    double gs = 0.0, gx = 0.0, hss = 0.0, hsx = 0.0, hxx = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < s.excess.size(); ++i) {
      const double w = weight_at(s.weights, i);
      if (w == 0.0) continue;
      const double y = s.excess[i] * inv_sigma;
      const double a = xi * y;
      const double t = 1.0 + a;
      if (!(t > 0.0)) {
        ev.loglik = kNegInf;
        return ev;
      }
      wsum += w;
      ll += w * (-std::log(t) - y * l1(a));
      if (derivatives) {
        const double yt = y / t;
        gs += w * yt;
        gx += w * (y * y * phi2(a) - yt);
        hss += w * yt / t;
        hsx += w * (yt - (1.0 + xi) * yt * yt);
        hxx += w * (y * y * y * x3(a) + yt * yt);
      }
    }
    ll -= wsum * log_sigma;
    if (derivatives) {
      ev.grad(k) = -wsum + (1.0 + xi) * gs;
      ev.grad(K) += gx;
      ev.hess(k, k) = -(1.0 + xi) * hss;
      ev.hess(k, K) = ev.hess(K, k) = hsx;
      ev.hess(K, K) += hxx;
    }
  }
  ev.loglik = ll;
  return ev;
}

void check_series(const WeightedExcesses& s) {
  if (!s.weights.empty() && s.weights.size() != s.excess.size()) {
    throw InvalidArgument("weights and excesses differ in length");
  }
  if (total_weight(s) < static_cast<double>(kMinExceedances)) {
    throw EstimationError("GPD fit needs at least " + std::to_string(kMinExceedances) +
                          " exceedances");
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < s.excess.size(); ++i) {
    if (weight_at(s.weights, i) == 0.0) continue;
    const double x = s.excess[i];
    if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument("excesses must be finite and >= 0");
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (!(hi > lo)) throw EstimationError("zero-variance excesses: the GPD MLE does not exist");
}

double max_excess(const WeightedExcesses& s) {
  double hi = 0.0;
  for (std::size_t i = 0; i < s.excess.size(); ++i) {
    if (weight_at(s.weights, i) != 0.0) hi = std::max(hi, s.excess[i]);
  }
  return hi;
}

}  // namespace

double gpd_loglik(std::span<const double> excess, const GpdParams& p,
                  std::span<const double> weights) {
  const WeightedExcesses s{excess, weights};
  Eigen::VectorXd theta(2);
  theta << std::log(p.sigma), p.xi;
  return evaluate({&s, 1}, theta, false).loglik;
}

GpdParams gpd_pwm(std::span<const double> excess, std::span<const double> weights) {
  std::vector<std::size_t> order(excess.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return excess[a] < excess[b]; });
  const double W = total_weight({excess, weights});
  double before = 0.0, a0 = 0.0, a1 = 0.0;
  for (const auto i : order) {
    const double w = weight_at(weights, i);
    // Weighted analogue of the (i - 0.35)/n plotting position.
    const double F = (before + 0.5 * (w + 1.0) - 0.35) / W;
    a0 += w * excess[i];
    a1 += w * excess[i] * (1.0 - F);
    before += w;
  }
  a0 /= W;
  a1 /= W;
  const double denom = a0 - 2.0 * a1;
  if (!(denom > 0.0) || !(a0 > 0.0)) return GpdParams(std::max(a0, 1e-300), 0.0);
  return GpdParams(2.0 * a0 * a1 / denom, 2.0 - a0 / denom);
}

SharedShapeFit fit_shared_shape(std::span<const WeightedExcesses> series) {
  if (series.empty()) throw InvalidArgument("no series to fit");
  for (const auto& s : series) check_series(s);
  const auto K = static_cast<Eigen::Index>(series.size());

  // Warm start: weight-averaged PWM shape, scales matched to the mean excess.
  double xi0 = 0.0, wtot = 0.0;
  std::vector<double> means(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto pwm = gpd_pwm(series[k].excess, series[k].weights);
    const double W = total_weight(series[k]);
    xi0 += W * pwm.xi;
    wtot += W;
    double m = 0.0;
    for (std::size_t i = 0; i < series[k].excess.size(); ++i) {
      m += weight_at(series[k].weights, i) * series[k].excess[i];
    }
    means[k] = m / W;
  }
  xi0 = std::clamp(xi0 / wtot, -0.9, 0.9);
  Eigen::VectorXd theta(K + 1);
  for (Eigen::Index k = 0; k < K; ++k) {
    double sigma = means[static_cast<std::size_t>(k)] * (1.0 - xi0);
    if (xi0 < 0.0) sigma = std::max(sigma, -1.05 * xi0 * max_excess(series[static_cast<std::size_t>(k)]));
    theta(k) = std::log(sigma);
  }
  theta(K) = xi0;

  Evaluation cur = evaluate(series, theta, true);
  bool converged = false;
  for (int iter = 0; iter < 500 && !converged; ++iter) {
    const Eigen::MatrixXd info = -cur.hess;
    const double scale = std::max(1.0, info.diagonal().cwiseAbs().maxCoeff());
    bool accepted = false;
    for (double lambda : {0.0, 1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4, 1e6}) {
      Eigen::MatrixXd A = info;
      A.diagonal().array() += lambda * scale;
      Eigen::LLT<Eigen::MatrixXd> llt(A);
      if (llt.info() != Eigen::Success) continue;
      Eigen::VectorXd step = llt.solve(cur.grad);
      Eigen::VectorXd next = theta + step;
      next(K) = std::max(next(K), kXiLowerBound);
      step = next - theta;
      Evaluation trial = evaluate(series, next, true);
      if (!(trial.loglik >= cur.loglik)) continue;
      const double gain = trial.loglik - cur.loglik;
      theta = next;
      cur = std::move(trial);
      accepted = true;
      if (step.cwiseAbs().maxCoeff() < 1e-10 || gain < 1e-13 * (1.0 + std::abs(cur.loglik))) {
        converged = true;
      }
      break;
    }
    if (!accepted) {
      // No ascent direction improves the likelihood: stationary to rounding,
      // or pinned at the shape bound.
      Eigen::VectorXd g = cur.grad;
      if (theta(K) <= kXiLowerBound && g(K) < 0.0) g(K) = 0.0;
      converged = g.cwiseAbs().maxCoeff() < 1e-6 * wtot;
      break;
    }
  }

  SharedShapeFit fit;
  fit.sigma.resize(series.size());
  for (Eigen::Index k = 0; k < K; ++k) fit.sigma[static_cast<std::size_t>(k)] = std::exp(theta(k));
  fit.xi = theta(K);
  fit.loglik = cur.loglik;
  fit.converged = converged;
  fit.se_sigma.assign(series.size(), std::nullopt);
  Eigen::LLT<Eigen::MatrixXd> llt(-cur.hess);
  if (llt.info() == Eigen::Success) {
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(K + 1, K + 1));
    fit.se_xi = std::sqrt(cov(K, K));
    for (Eigen::Index k = 0; k < K; ++k) {
      fit.se_sigma[static_cast<std::size_t>(k)] = fit.sigma[static_cast<std::size_t>(k)] *
                                                  std::sqrt(cov(k, k));
    }
  }
  return fit;
}

std::vector<double> excesses_over(std::span<const double> data, double threshold) {
  std::vector<double> out;
  for (const double x : data) {
    if (x > threshold) out.push_back(x - threshold);
  }
  return out;
}

GpdFit fit_gpd_excesses(std::span<const double> excess, std::span<const double> weights) {
  const WeightedExcesses s{excess, weights};
  const auto shared = fit_shared_shape({&s, 1});
  GpdFit fit;
  fit.params = GpdParams(shared.sigma[0], shared.xi);
  fit.n_exceed = static_cast<std::size_t>(std::llround(total_weight(s)));
  fit.loglik = shared.loglik;
  fit.converged = shared.converged;
  fit.se_sigma = shared.se_sigma[0];
  fit.se_xi = shared.se_xi;
  return fit;
}

GpdFit fit_gpd(std::span<const double> data, double p) {
  if (!(p >= 0.0 && p < 1.0)) throw InvalidArgument("threshold probability must lie in [0, 1)");
  if (data.empty()) throw EstimationError("GPD fit on an empty series");
  const double u = empirical_quantile(data, p);
  const auto excess = excesses_over(data, u);
  auto fit = fit_gpd_excesses(excess);
  fit.threshold = u;
  return fit;
}

PooledFit fit_gpd_pooled(std::span<const double> data_i, std::span<const double> data_j,
                         double p) {
  if (!(p >= 0.0 && p < 1.0)) throw InvalidArgument("threshold probability must lie in [0, 1)");
  if (data_i.empty() || data_j.empty()) throw EstimationError("GPD fit on an empty series");
  const double ui = empirical_quantile(data_i, p);
  const double uj = empirical_quantile(data_j, p);
  const auto ei = excesses_over(data_i, ui);
  const auto ej = excesses_over(data_j, uj);
  const WeightedExcesses series[2] = {{ei, {}}, {ej, {}}};
  const auto shared = fit_shared_shape(series);
  PooledFit fit;
  fit.sigma_i = shared.sigma[0];
  fit.sigma_j = shared.sigma[1];
  fit.xi_common = shared.xi;
  fit.loglik = shared.loglik;
  fit.threshold_i = ui;
  fit.threshold_j = uj;
  fit.n_exceed_i = ei.size();
  fit.n_exceed_j = ej.size();
  fit.converged = shared.converged;
  fit.se_xi = shared.se_xi;
  return fit;
}

}  // namespace tailagg
