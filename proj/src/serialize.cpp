#include "tailagg/serialize.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace tailagg {

namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json number(const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); }

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? to_json(*v) : Json(nullptr);
}

Json error_or_null(const std::string& e) { return e.empty() ? Json(nullptr) : Json(e); }

void put(std::ostream& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

}  // namespace

Json to_json(const GpdParams& p) { return Json{{"sigma", p.sigma}, {"xi", p.xi}}; }

Json to_json(const MarginPair& m) { return Json{{"m1", to_json(m.m1)}, {"m2", to_json(m.m2)}}; }

Json to_json(const TailForm& f) {
  Json j;
  j["regime"] = to_string(f.regime);
  j["xi_R"] = number(f.xi_R);
  j["sigma_R"] = number(f.sigma_R);
  j["r_F"] = number(f.r_F);
  j["prefactor_class"] = to_string(f.prefactor_class);
  j["c_bounds"] = f.c_bounds ? Json::array({f.c_bounds->first, f.c_bounds->second}) : Json(nullptr);
  j["basis"] = f.basis;
  return j;
}

Json to_json(const LtDescriptor& d) {
  return Json{{"eta", number(d.eta)}, {"kappa", number(d.kappa)},
              {"condition", to_string(d.condition)}};
}

Json to_json(const DependenceSummary& s) {
  return Json{{"chi", s.chi}, {"chi_bar", s.chi_bar}, {"eta", number(s.eta)}};
}

Json to_json(const DependenceEstimate& e) {
  return Json{{"value", number(e.value)},
              {"q", e.threshold_q},
              {"n_exceed", e.n_exceed},
              {"stderr", number(e.stderr_)},
              {"clamped", e.clamped}};
}

Json to_json(const GpdFit& f) {
  return Json{{"sigma", f.params.sigma},   {"xi", f.params.xi},
              {"threshold", f.threshold},  {"n_exceed", f.n_exceed},
              {"loglik", number(f.loglik)}, {"converged", f.converged},
              {"se_sigma", number(f.se_sigma)}, {"se_xi", number(f.se_xi)}};
}

Json to_json(const PooledFit& f) {
  return Json{{"sigma_i", f.sigma_i},         {"sigma_j", f.sigma_j},
              {"xi_common", f.xi_common},     {"loglik", number(f.loglik)},
              {"threshold_i", f.threshold_i}, {"threshold_j", f.threshold_j},
              {"n_exceed_i", f.n_exceed_i},   {"n_exceed_j", f.n_exceed_j},
              {"converged", f.converged},     {"se_xi", number(f.se_xi)}};
}

Json to_json(const BootstrapCI& ci) {
  return Json{{"point", number(ci.point)}, {"lower", number(ci.lower)},
              {"upper", number(ci.upper)}, {"level", ci.level},
              {"n_boot", ci.n_boot},       {"n_dropped", ci.n_dropped},
              {"widened", ci.widened}};
}

Json to_json(const QuantileCurve& c) {
  Json j;
  j["transform"] = to_string(c.transform);
  j["slope"] = number(c.slope_estimate);
  j["intercept"] = number(c.intercept);
  Json points = Json::array();
  for (std::size_t i = 0; i < c.probs.size(); ++i) {
    points.push_back(Json{{"p", c.probs[i]}, {"r_p", number(c.quantiles[i])},
                          {"transformed", number(c.transformed[i])}});
  }
  j["points"] = std::move(points);
  return j;
}

Json to_json(const Verdict& v) {
  Json j;
  j["pass"] = v.pass;
  j["prediction"] = to_json(v.prediction);
  j["predicted"] = number(v.predicted);
  j["implied"] = number(v.implied);
  j["relative_error"] = number(v.relative_error);
  j["tolerance"] = v.tolerance;
  if (v.curve) {
    j["slope"] = number(v.curve->slope_estimate);
    j["intercept"] = number(v.curve->intercept);
    j["transform"] = to_string(v.curve->transform);
  }
  if (v.envelope) {
    j["envelope"] = Json{{"min_ratio", number(v.envelope->min_ratio)},
                         {"max_ratio", number(v.envelope->max_ratio)},
                         {"lower", v.envelope->lower},
                         {"upper", number(v.envelope->upper)},
                         {"pass", v.envelope->pass}};
  } else {
    j["envelope"] = nullptr;
  }
  j["failure"] = error_or_null(v.failure);
  return j;
}

Json to_json(const StudyOptions& o) {
  return Json{{"p", o.p},
              {"eta_q", o.eta_q},
              {"mean_block", o.mean_block},
              {"n_boot", o.n_boot},
              {"level", o.level},
              {"seed", o.seed}};
}

Json to_json(const FitReport& r) {
  Json j;
  j["options"] = to_json(r.options);
  j["n_times"] = r.n_times;
  j["dropped_gaps"] = r.dropped_gaps;
  Json marginal = Json::array();
  for (const auto& m : r.marginal) {
    marginal.push_back(Json{{"site", m.site},
                            {"fit", optional_json(m.fit)},
                            {"xi_ci", optional_json(m.xi_ci)},
                            {"error", error_or_null(m.error)}});
  }
  j["marginal"] = std::move(marginal);
  Json pairs = Json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back(Json{{"sites", Json::array({p.site_i, p.site_j})},
                         {"pooled", optional_json(p.pooled)},
                         {"pooled_xi_ci", optional_json(p.pooled_xi_ci)},
                         {"eta", optional_json(p.eta)},
                         {"eta_ci", optional_json(p.eta_ci)},
                         {"aggregate", optional_json(p.aggregate)},
                         {"aggregate_xi_ci", optional_json(p.aggregate_xi_ci)},
                         {"scaled_aggregate_xi_ci", optional_json(p.scaled_aggregate_xi_ci)},
                         {"error", error_or_null(p.error)}});
  }
  j["pairs"] = std::move(pairs);
  const auto& a = r.aggregate;
  j["aggregate"] = Json{{"sites", a.sites},
                        {"fit", optional_json(a.fit)},
                        {"xi_ci", optional_json(a.xi_ci)},
                        {"mean_eta", number(a.mean_eta)},
                        {"error", error_or_null(a.error)}};
  j["scaled_aggregate_xi"] = optional_json(a.scaled_xi_ci);
  j["flags"] = r.flags;
  return j;
}

void write_curve_csv(std::ostream& out, const QuantileCurve& curve) {
  out << "p,r_p,transformed_r_p\n";
  for (std::size_t i = 0; i < curve.probs.size(); ++i) {
    put(out, curve.probs[i]);
    out << ',';
    put(out, curve.quantiles[i]);
    out << ',';
    put(out, curve.transformed[i]);
    out << '\n';
  }
}

}  // namespace tailagg
