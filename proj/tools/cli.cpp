#include "cli.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "tailagg/errors.hpp"
#include "tailagg/montecarlo.hpp"
#include "tailagg/pipeline.hpp"
#include "tailagg/serialize.hpp"
#include "tailagg/stats.hpp"
#include "tailagg/tailpredict.hpp"

namespace tailagg::cli {

namespace {

struct MarginFlags {
  double sigma1 = 1.0, xi1 = 0.0, sigma2 = 1.0, xi2 = 0.0;

  void add(CLI::App* app) {
    app->add_option("--sigma1", sigma1, "scale of X1")->capture_default_str();
    app->add_option("--xi1", xi1, "shape of X1")->required();
    app->add_option("--sigma2", sigma2, "scale of X2")->capture_default_str();
    app->add_option("--xi2", xi2, "shape of X2")->required();
  }
  MarginPair margins() const { return {GpdParams(sigma1, xi1), GpdParams(sigma2, xi2)}; }
};

// Weights: absent means the plain sum X1 + X2.
struct WeightFlags {
  std::optional<double> w1;

  void add(CLI::App* app) {
    app->add_option("--w1", w1, "weight of X1 in w1 X1 + (1-w1) X2; default is the plain sum");
  }
  Json json() const {
    return w1 ? Json{{"w1", *w1}, {"w2", 1.0 - *w1}} : Json("plain_sum");
  }
  // Margins and weights that produce the requested aggregate.
  std::pair<MarginPair, Weights> resolve(const MarginPair& m) const {
    if (w1) return {m, Weights(*w1, 1.0 - *w1)};
    return {plain_sum_margins(m), Weights(0.5, 0.5)};
  }
};

void emit(std::ostream& out, Json config, Json result) {
  Json doc;
  doc["config"] = std::move(config);
  doc["result"] = std::move(result);
  out << doc.dump(2) << '\n';
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write '" + path + "'");
  return f;
}

std::vector<int> parse_months(const std::string& text) {
  std::vector<int> months;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int m = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), m);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size() || m < 1 || m > 12) {
      throw InvalidArgument("bad month '" + item + "' in --months");
    }
    months.push_back(m);
  }
  return months;
}

std::vector<SitePair> parse_pairs(const std::string& text, const GridDataset& ds) {
  std::vector<SitePair> pairs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw InvalidArgument("pair '" + item + "' is not a:b");
    pairs.emplace_back(ds.site_index(item.substr(0, colon)), ds.site_index(item.substr(colon + 1)));
  }
  return pairs;
}

std::vector<double> read_column_pair(const std::string& path, const std::string& c1,
                                     const std::string& c2, std::vector<double>& second) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty input", 1);
  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string h;
    while (std::getline(hs, h, ',')) header.push_back(h);
  }
  const auto find = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("unknown column '" + name + "'", 1);
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto i1 = find(c1), i2 = find(c2);
  std::vector<double> first;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (fields.size() != header.size()) throw DataError("wrong number of fields", line_no);
    const auto parse = [&](const std::string& s) {
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw DataError("value '" + s + "' is not a number", line_no);
      }
      return v;
    };
    first.push_back(parse(fields[i1]));
    second.push_back(parse(fields[i2]));
  }
  return first;
}

void put_number(std::ostream& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Upper-tail behaviour of aggregated GPD-margined pairs"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "cap on worker threads (0 = runtime default)")
      ->check(CLI::NonNegativeNumber);

  // predict
  auto* predict = app.add_subcommand("predict", "first-order tail form of the aggregate");
  MarginFlags pm;
  pm.add(predict);
  std::string p_copula;
  std::optional<double> p_eta, p_kappa;
  std::string p_condition = "cond2";
  std::optional<double> p_w1;
  predict->add_option("--copula", p_copula, "logistic:g, invlogistic:g, gaussian:r, indep, perfect+, perfect-");
  predict->add_option("--eta", p_eta, "limit-model eta (instead of --copula)");
  predict->add_option("--kappa", p_kappa, "Condition 2 exponent");
  predict->add_option("--condition", p_condition, "cond1, cond2, cond3a or cond3b")
      ->capture_default_str();
  predict->add_option("--w1", p_w1, "weight of X1; margins become GPD(w_i sigma_i, xi_i)");

  // verify
  auto* verify = app.add_subcommand("verify", "Monte Carlo slope check of a prediction");
  MarginFlags vm;
  vm.add(verify);
  WeightFlags vw;
  vw.add(verify);
  std::string v_copula, v_curve;
  std::size_t v_n = 10'000'000, v_count = 40, v_shards = 16;
  std::uint64_t v_seed = 1;
  double v_lo = 0.99, v_hi = 0.999;
  std::optional<double> v_tol, v_force_rf, v_force_param;
  verify->add_option("--copula", v_copula)->required();
  verify->add_option("--n", v_n, "sample size")->capture_default_str();
  verify->add_option("--seed", v_seed)->capture_default_str();
  verify->add_option("--p-lo", v_lo)->capture_default_str();
  verify->add_option("--p-hi", v_hi)->capture_default_str();
  verify->add_option("--p-count", v_count)->capture_default_str();
  verify->add_option("--tolerance", v_tol, "relative tolerance (default 0.10, 0.15 if prefactor grows with r)");
  verify->add_option("--shards", v_shards)->capture_default_str();
  verify->add_option("--curve", v_curve, "write the quantile curve CSV here");
  verify->add_option("--force-r-F", v_force_rf, "replace the predicted endpoint (negative control)");
  verify->add_option("--force-param", v_force_param,
                     "replace the predicted xi_R or sigma_R (negative control)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "draw the aggregate and its components");
  MarginFlags sm;
  sm.add(simulate);
  WeightFlags sw;
  sw.add(simulate);
  std::string s_copula, s_out;
  std::size_t s_n = 100'000, s_shards = 16;
  std::uint64_t s_seed = 1;
  simulate->add_option("--copula", s_copula)->required();
  simulate->add_option("--n", s_n)->capture_default_str();
  simulate->add_option("--seed", s_seed)->capture_default_str();
  simulate->add_option("--shards", s_shards)->capture_default_str();
  simulate->add_option("--out", s_out, "CSV of draws (u, v, x1, x2, r)")->required();

  // estimate
  auto* estimate = app.add_subcommand("estimate", "empirical chi and eta of a paired sample");
  std::string e_in, e_col1 = "x1", e_col2 = "x2";
  double e_chi_q = 0.95, e_eta_q = kDefaultEtaQ;
  estimate->add_option("--in", e_in)->required();
  estimate->add_option("--col1", e_col1)->capture_default_str();
  estimate->add_option("--col2", e_col2)->capture_default_str();
  estimate->add_option("--chi-q", e_chi_q)->capture_default_str();
  estimate->add_option("--eta-q", e_eta_q)->capture_default_str();

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "marginal, pooled and aggregate GPD study");
  CsvSchema schema;
  std::string g_in, g_months, g_pairs, g_table, g_row, g_col;
  StudyOptions study;
  pipeline->add_option("--in", g_in)->required();
  pipeline->add_option("--time-col", schema.time_col)->capture_default_str();
  pipeline->add_option("--site-col", schema.site_col)->capture_default_str();
  pipeline->add_option("--value-col", schema.value_col)->capture_default_str();
  pipeline->add_option("--row-col", g_row, "grid row column (enables rook adjacency)");
  pipeline->add_option("--col-col", g_col, "grid column column");
  pipeline->add_option("--months", g_months, "month whitelist, e.g. 12,1,2");
  pipeline->add_option("--pairs", g_pairs, "adjacent pairs a:b,c:d (default: grid neighbours or all pairs)");
  pipeline->add_option("--p", study.p, "threshold probability")->capture_default_str();
  pipeline->add_option("--eta-q", study.eta_q)->capture_default_str();
  pipeline->add_option("--mean-block", study.mean_block)->capture_default_str();
  pipeline->add_option("--n-boot", study.n_boot)->capture_default_str();
  pipeline->add_option("--level", study.level)->capture_default_str();
  pipeline->add_option("--seed", study.seed)->capture_default_str();
  pipeline->add_option("--table", g_table, "write the text table here (default: stderr)");

  // synth
  auto* synth = app.add_subcommand("synth", "synthetic gridded dataset for the pipeline");
  SyntheticOptions so;
  std::string y_copula = "indep", y_out;
  double y_sigma = 1.0, y_xi = 0.0, y_cadence_hours = 24.0;
  synth->add_option("--rows", so.rows)->capture_default_str();
  synth->add_option("--cols", so.cols)->capture_default_str();
  synth->add_option("--n", so.n_times)->capture_default_str();
  synth->add_option("--sigma", y_sigma)->capture_default_str();
  synth->add_option("--xi", y_xi)->capture_default_str();
  synth->add_option("--copula", y_copula)->capture_default_str();
  synth->add_option("--cadence-hours", y_cadence_hours)->capture_default_str();
  synth->add_option("--seed", so.seed)->capture_default_str();
  synth->add_option("--out", y_out)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    err << app.help();
    return kExitPass;
  } catch (const CLI::CallForAllHelp& e) {
    err << app.help("", CLI::AppFormatMode::All);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*predict) {
      const auto margins = pm.margins();
      Json config{{"subcommand", "predict"}, {"margins", to_json(margins)}};
      MarginPair used = margins;
      if (p_w1) {
        const Weights w(*p_w1, 1.0 - *p_w1);
        used = weighted_margins(margins, w);
        config["weights"] = Json{{"w1", w.w1}, {"w2", w.w2}};
      } else {
        config["weights"] = "plain_sum";
      }
      TailForm form;
      if (!p_copula.empty()) {
        if (p_eta || p_kappa) throw InvalidArgument("give either --copula or --eta/--kappa, not both");
        const auto spec = CopulaSpec::parse(p_copula);
        config["copula"] = spec.to_string();
        form = predict_copula(used, spec);
      } else {
        if (!p_eta) throw InvalidArgument("give --copula, or --eta with --condition");
        const LtDescriptor dep{p_eta, p_kappa, parse_condition(p_condition)};
        config["descriptor"] = to_json(dep);
        form = predict_theorem(used, dep);
      }
      emit(out, config, to_json(form));
      return kExitPass;
    }

    if (*verify) {
      const auto margins = vm.margins();
      const auto spec = CopulaSpec::parse(v_copula);
      const auto [sim_margins, weights] = vw.resolve(margins);
      const auto grid = default_p_grid(v_count, v_lo, v_hi);
      SimulationOptions so_{v_shards, Execution::Parallel};
      Json config{{"subcommand", "verify"}, {"margins", to_json(margins)},
                  {"weights", vw.json()},    {"copula", spec.to_string()},
                  {"n", v_n},                {"seed", v_seed},
                  {"shards", v_shards},      {"p_grid", Json{{"lo", v_lo}, {"hi", v_hi}, {"count", v_count}}},
                  {"tolerance", v_tol ? Json(*v_tol) : Json(nullptr)},
                  {"force_r_F", v_force_rf ? Json(*v_force_rf) : Json(nullptr)},
                  {"force_param", v_force_param ? Json(*v_force_param) : Json(nullptr)}};
      auto prediction = predict_copula(weighted_margins(sim_margins, weights), spec);
      if (v_force_rf) prediction.r_F = *v_force_rf;
      if (v_force_param) {
        if (prediction.regime == TailRegime::Exponential) {
          prediction.sigma_R = *v_force_param;
        } else {
          prediction.xi_R = *v_force_param;
        }
      }
      const auto sample = simulate_aggregate(sim_margins, spec, weights, v_n, v_seed, so_);
      const auto verdict = verify_sample(sample.values, prediction, grid, v_tol);
      if (!v_curve.empty() && verdict.curve) {
        auto f = open_output(v_curve);
        write_curve_csv(f, *verdict.curve);
      }
      if (!verdict.failure.empty()) err << verdict.failure << '\n';
      emit(out, config, to_json(verdict));
      return verdict.pass ? kExitPass : kExitFail;
    }

    if (*simulate) {
      const auto margins = sm.margins();
      const auto spec = CopulaSpec::parse(s_copula);
      const auto [sim_margins, weights] = sw.resolve(margins);
      const SimulationOptions opts{s_shards, Execution::Parallel};
      const auto pairs = simulate_pairs(spec, s_n, s_seed, opts);
      auto f = open_output(s_out);
      f << "u,v,x1,x2,r\n";
      std::vector<double> r(s_n);
      for (std::size_t i = 0; i < s_n; ++i) {
        // Components are reported on the scale of the requested margins.
        const double x1 = gpd_quantile(sim_margins.m1, pairs[i].u);
        const double x2 = gpd_quantile(sim_margins.m2, pairs[i].v);
        r[i] = weights.w1 * x1 + weights.w2 * x2;
        put_number(f, pairs[i].u);
        f << ',';
        put_number(f, pairs[i].v);
        f << ',';
        put_number(f, gpd_quantile(margins.m1, pairs[i].u));
        f << ',';
        put_number(f, gpd_quantile(margins.m2, pairs[i].v));
        f << ',';
        put_number(f, r[i]);
        f << '\n';
      }
      double mean = 0.0;
      for (const double v : r) mean += v;
      mean /= static_cast<double>(s_n);
      const std::vector<double> probs{0.5, 0.9, 0.99, 0.999};
      const auto q = empirical_quantiles(r, probs);
      Json quantiles = Json::object();
      for (std::size_t i = 0; i < probs.size(); ++i) {
        quantiles[std::to_string(probs[i]).substr(0, 5)] = q[i];
      }
      Json config{{"subcommand", "simulate"}, {"margins", to_json(margins)},
                  {"weights", sw.json()},       {"copula", spec.to_string()},
                  {"n", s_n},                   {"seed", s_seed},
                  {"shards", s_shards},         {"out", s_out}};
      emit(out, config,
           Json{{"n", s_n}, {"mean_r", mean}, {"quantiles_r", quantiles},
                {"theoretical", to_json(theoretical_dependence(spec))}});
      return kExitPass;
    }

    if (*estimate) {
      std::vector<double> x2;
      const auto x1 = read_column_pair(e_in, e_col1, e_col2, x2);
      const auto chi = chi_empirical(x1, x2, e_chi_q);
      const auto eta = eta_estimate(x1, x2, e_eta_q);
      Json config{{"subcommand", "estimate"}, {"in", e_in}, {"col1", e_col1},
                  {"col2", e_col2},         {"chi_q", e_chi_q}, {"eta_q", e_eta_q}};
      emit(out, config, Json{{"n", x1.size()}, {"chi", to_json(chi)}, {"eta", to_json(eta)}});
      return kExitPass;
    }

    if (*pipeline) {
      if (!g_row.empty()) schema.row_col = g_row;
      if (!g_col.empty()) schema.col_col = g_col;
      if (!g_months.empty()) schema.months = parse_months(g_months);
      const auto ds = ingest_csv_file(g_in, schema);
      const auto pairs = g_pairs.empty() ? default_adjacency(ds) : parse_pairs(g_pairs, ds);
      const auto report = run_study(ds, pairs, study);
      Json pair_names = Json::array();
      for (const auto& [i, j] : pairs) pair_names.push_back(Json::array({ds.sites[i].id, ds.sites[j].id}));
      Json config{{"subcommand", "pipeline"},
                  {"in", g_in},
                  {"schema", Json{{"time_col", schema.time_col},
                                  {"site_col", schema.site_col},
                                  {"value_col", schema.value_col},
                                  {"row_col", schema.row_col ? Json(*schema.row_col) : Json(nullptr)},
                                  {"col_col", schema.col_col ? Json(*schema.col_col) : Json(nullptr)},
                                  {"months", schema.months}}},
                  {"pairs", pair_names},
                  {"study", to_json(study)}};
      const auto table = format_report_table(report);
      if (g_table.empty()) {
        err << table;
      } else {
        auto f = open_output(g_table);
        f << table;
      }
      emit(out, config, to_json(report));
      return kExitPass;
    }

    if (*synth) {
      so.margin = GpdParams(y_sigma, y_xi);
      so.copula = CopulaSpec::parse(y_copula);
      so.cadence_seconds = static_cast<std::int64_t>(std::llround(y_cadence_hours * 3600.0));
      const auto ds = make_synthetic(so);
      auto f = open_output(y_out);
      write_csv(f, ds);
      Json config{{"subcommand", "synth"}, {"rows", so.rows},   {"cols", so.cols},
                  {"n", so.n_times},       {"margin", to_json(so.margin)},
                  {"copula", so.copula.to_string()},
                  {"cadence_seconds", so.cadence_seconds}, {"seed", so.seed}, {"out", y_out}};
      emit(out, config, Json{{"sites", ds.n_sites()}, {"times", ds.n_times()}});
      return kExitPass;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace tailagg::cli
