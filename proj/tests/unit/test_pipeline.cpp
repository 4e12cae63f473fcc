#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <string>

#include "tailagg/errors.hpp"
#include "tailagg/pipeline.hpp"
#include "tailagg/serialize.hpp"

using namespace tailagg;

namespace {

GridDataset parse(const std::string& text, CsvSchema schema = {}) {
  std::istringstream in(text);
  return ingest_csv(in, schema);
}

std::size_t error_line(const std::string& text, CsvSchema schema = {}) {
  try {
    parse(text, schema);
  } catch (const DataError& e) {
    return e.line();
  }
  return static_cast<std::size_t>(-1);
}

GridDataset synthetic(double xi, const CopulaSpec& copula, std::size_t n, std::uint64_t seed) {
  SyntheticOptions o;
  o.n_times = n;
  o.margin = GpdParams(1.0, xi);
  o.copula = copula;
  o.seed = seed;
  return make_synthetic(o);
}

StudyOptions small_options(std::uint64_t seed) {
  StudyOptions o;
  o.p = 0.95;
  o.n_boot = 60;
  o.seed = seed;
  return o;
}

void same_ci(const std::optional<BootstrapCI>& a, const std::optional<BootstrapCI>& b, double tol) {
  REQUIRE(a.has_value() == b.has_value());
  if (!a) return;
  CHECK(a->point == doctest::Approx(b->point).epsilon(tol));
  CHECK(a->lower == doctest::Approx(b->lower).epsilon(tol));
  CHECK(a->upper == doctest::Approx(b->upper).epsilon(tol));
  CHECK(a->n_dropped == b->n_dropped);
}

}  // namespace

TEST_CASE("ingest: shape follows the schema") {
  const std::string text = "time,site,value\n2000-01-01,a,1\n2000-01-01,b,2\n2000-01-01,c,3\n";
  const auto wide = parse(text);
  CHECK(wide.n_times() == 1);
  CHECK(wide.n_sites() == 3);
  CHECK(wide.values[wide.site_index("b")][0] == 2.0);

  const std::string tall = "t;s;v\n1;x;1\n2;x;2\n3;x;3\n";
  CsvSchema schema;
  schema.time_col = "t";
  schema.site_col = "s";
  schema.value_col = "v";
  schema.delimiter = ';';
  const auto ds = parse(tall, schema);
  CHECK(ds.n_times() == 3);
  CHECK(ds.n_sites() == 1);
  CHECK(ds.cadence == 1);
  CHECK_FALSE(ds.calendar_times);
}

TEST_CASE("ingest: a gap drops its timestamp and is counted") {
  const std::string text =
      "time,site,value\n"
      "2000-01-01,a,1\n2000-01-01,b,2\n"
      "2000-01-02,a,NA\n2000-01-02,b,2\n"
      "2000-01-03,a,1\n2000-01-03,b,5\n";
  const auto ds = parse(text);
  CHECK(ds.n_times() == 2);
  CHECK(ds.dropped_gaps == 1);
  CHECK(ds.cadence == 86400);
  CHECK(ds.values[1] == std::vector<double>{2.0, 5.0});
  // A missing row behaves like a missing value.
  const auto missing_row = parse("time,site,value\n1,a,1\n1,b,1\n2,b,1\n3,a,1\n3,b,1\n");
  CHECK(missing_row.dropped_gaps == 1);
}

TEST_CASE("ingest: month whitelist") {
  std::string days = "time,site,value\n";
  auto add_month = [&](int month, int n_days, int value) {
    for (int d = 1; d <= n_days; ++d) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "2001-%02d-%02d,a,%d\n", month, d, value);
      days += buf;
    }
  };
  add_month(1, 31, 1);
  add_month(2, 28, 2);
  add_month(3, 31, 3);
  CsvSchema schema;
  schema.months = {12, 1, 2};
  const auto ds = parse(days, schema);
  CHECK(ds.n_times() == 59);
  for (double v : ds.values[0]) CHECK(v < 3.0);
  CHECK(ds.dropped_gaps == 0);
  CHECK(parse(days).n_times() == 90);

  // Month filtering needs calendar timestamps.
  CHECK_THROWS_AS(parse("time,site,value\n1,a,1\n2,a,1\n", schema), DataError);
  // Calendar months are not a uniform cadence.
  CHECK_THROWS_AS(parse("time,site,value\n2001-01-01,a,1\n2001-02-01,a,1\n2001-03-01,a,1\n"), DataError);
}

TEST_CASE("ingest: errors carry line numbers") {
  CHECK(error_line("time,site,val\n1,a,1\n") == 1);
  CHECK(error_line("time,site,value\n1,a,1\n1,a,2\n") == 3);
  CHECK(error_line("time,site,value\n1,a,1\n2,a,x\n") == 3);
  CHECK(error_line("time,site,value\n1,a,1\n2,a\n") == 3);
  CHECK(error_line("time,site,value\n1,a,1\nyesterday,a,1\n") == 3);
  CHECK_THROWS_AS(parse("time,site,value\n1,a,1\n2,a,1\n4,a,1\n"), DataError);
  CHECK_THROWS_AS(parse(""), DataError);
  CHECK_THROWS_AS(parse("time,site,value\n"), DataError);
}

TEST_CASE("timestamps") {
  bool cal = false;
  CHECK(parse_timestamp("2000-01-01", cal) == 946684800);
  CHECK(cal);
  CHECK(parse_timestamp("2000-01-01T06:30:00Z", cal) == 946684800 + 6 * 3600 + 1800);
  CHECK(parse_timestamp("2000-01-01 06:30", cal) == 946684800 + 6 * 3600 + 1800);
  CHECK(parse_timestamp("42", cal) == 42);
  CHECK_FALSE(cal);
  CHECK_THROWS_AS(parse_timestamp("2000-02-30", cal), InvalidArgument);
  CHECK(format_timestamp(946684800, true) == "2000-01-01");
  CHECK(format_timestamp(946684800 + 3600, true) == "2000-01-01T01:00:00");
  CHECK(format_timestamp(-5, false) == "-5");
}

TEST_CASE("spatial aggregate") {
  GridDataset ds;
  ds.times = {0, 1, 2};
  ds.sites = {{"a", {}, {}}, {"b", {}, {}}, {"c", {}, {}}};
  ds.values = {{1, 1, 1}, {3, 3, 3}, {0, 5, 10}};
  CHECK(spatial_aggregate(ds, {2}) == ds.values[2]);
  CHECK(spatial_aggregate(ds, {0, 1}) == std::vector<double>{2, 2, 2});
  const auto all = spatial_aggregate(ds, {0, 1, 2});
  double site_means = 0;
  for (const auto& v : ds.values) site_means += std::accumulate(v.begin(), v.end(), 0.0) / 3;
  CHECK(std::accumulate(all.begin(), all.end(), 0.0) / 3 == doctest::Approx(site_means / 3));
  CHECK_THROWS_AS(spatial_aggregate(ds, {}), InvalidArgument);
}

TEST_CASE("adjacency") {
  const auto grid = synthetic(0.1, CopulaSpec::independence(), 10, 1);
  const auto pairs = default_adjacency(grid);
  CHECK(pairs.size() == 4);
  for (const auto& [i, j] : pairs) {
    const int d = std::abs(*grid.sites[i].row - *grid.sites[j].row) + std::abs(*grid.sites[i].col - *grid.sites[j].col);
    CHECK(d == 1);
  }
  auto loose = grid;
  for (auto& s : loose.sites) s.row.reset();
  CHECK(default_adjacency(loose).size() == 6);
}

TEST_CASE("synthetic data round trips through CSV") {
  const auto ds = synthetic(-0.2, CopulaSpec::inverted_logistic(0.5), 200, 2);
  CHECK(ds.n_sites() == 4);
  CHECK(ds.sites[0].id == "r0c0");
  CHECK(ds.times.front() == 946684800);
  std::stringstream buf;
  write_csv(buf, ds);
  CsvSchema schema;
  schema.row_col = "row";
  schema.col_col = "col";
  const auto back = ingest_csv(buf, schema);
  CHECK(back.times == ds.times);
  CHECK(back.values == ds.values);
  CHECK(back.cadence == 86400);
  for (std::size_t s = 0; s < ds.n_sites(); ++s) {
    CHECK(back.sites[s].id == ds.sites[s].id);
    CHECK(back.sites[s].row == ds.sites[s].row);
    CHECK(back.sites[s].col == ds.sites[s].col);
  }
  const auto again = synthetic(-0.2, CopulaSpec::inverted_logistic(0.5), 200, 2);
  CHECK(again.values == ds.values);
}

TEST_CASE("study: report structure and invariants") {
  const auto ds = synthetic(0.2, CopulaSpec::logistic(0.3), 4000, 3);
  const auto adj = default_adjacency(ds);
  const auto r = run_study(ds, adj, small_options(4));
  CHECK(r.n_times == 4000);
  REQUIRE(r.marginal.size() == 4);
  REQUIRE(r.pairs.size() == adj.size());
  for (std::size_t k = 0; k < adj.size(); ++k) {
    CHECK(r.pairs[k].site_i == ds.sites[adj[k].first].id);
    CHECK(r.pairs[k].site_j == ds.sites[adj[k].second].id);
    REQUIRE(r.pairs[k].pooled_xi_ci);
    CHECK(r.pairs[k].pooled_xi_ci->lower <= r.pairs[k].pooled_xi_ci->upper);
    REQUIRE(r.pairs[k].eta_ci);
    CHECK(r.pairs[k].eta_ci->upper <= 1.0);
  }
  for (const auto& m : r.marginal) {
    REQUIRE(m.xi_ci);
    CHECK(m.xi_ci->lower <= m.xi_ci->point);
    CHECK(m.xi_ci->point <= m.xi_ci->upper);
    CHECK(m.xi_ci->n_boot == 60);
  }
  REQUIRE(r.aggregate.xi_ci);
  CHECK(r.aggregate.sites.size() == 4);
  // Positive aggregate shape: no scaled comparison.
  if (r.aggregate.fit->params.xi > 0) CHECK_FALSE(r.aggregate.scaled_xi_ci.has_value());
  const auto table = format_report_table(r);
  CHECK(table.find("marginal") != std::string::npos);
  CHECK(table.find("pooled") != std::string::npos);
  CHECK(table.find("aggregate") != std::string::npos);
}

TEST_CASE("study: deterministic, serial equals parallel, fast path equals reference") {
  const auto ds = synthetic(-0.2, CopulaSpec::inverted_logistic(0.5), 3000, 5);
  const auto adj = default_adjacency(ds);
  auto o = small_options(6);
  o.execution = Execution::Serial;
  const auto serial = run_study(ds, adj, o);
  o.execution = Execution::Parallel;
  const auto parallel = run_study(ds, adj, o);
  const auto reference = run_study_reference(ds, adj, o);
  // Weighted and materialised fits agree to the optimizer's tolerance.
  const double tol = 1e-6;
  CHECK(to_json(serial).dump() == to_json(parallel).dump());
  CHECK(to_json(parallel).dump() == to_json(run_study(ds, adj, o)).dump());
  for (std::size_t s = 0; s < 4; ++s) same_ci(parallel.marginal[s].xi_ci, reference.marginal[s].xi_ci, tol);
  for (std::size_t k = 0; k < adj.size(); ++k) {
    same_ci(parallel.pairs[k].pooled_xi_ci, reference.pairs[k].pooled_xi_ci, tol);
    same_ci(parallel.pairs[k].eta_ci, reference.pairs[k].eta_ci, tol);
    same_ci(parallel.pairs[k].aggregate_xi_ci, reference.pairs[k].aggregate_xi_ci, tol);
    same_ci(parallel.pairs[k].scaled_aggregate_xi_ci, reference.pairs[k].scaled_aggregate_xi_ci, tol);
  }
  same_ci(parallel.aggregate.xi_ci, reference.aggregate.xi_ci, tol);
  same_ci(parallel.aggregate.scaled_xi_ci, reference.aggregate.scaled_xi_ci, tol);
}

TEST_CASE("study: one resample drives every statistic") {
  // Site b is a copy of site a, so every replicate must give identical
  // marginal, pooled and pair-aggregate shapes if the indices are shared.
  const auto base = synthetic(0.1, CopulaSpec::independence(), 3000, 7);
  GridDataset ds;
  ds.times = base.times;
  ds.cadence = base.cadence;
  ds.calendar_times = true;
  ds.sites = {{"a", {}, {}}, {"b", {}, {}}};
  ds.values = {base.values[0], base.values[0]};
  const std::vector<SitePair> adj{{0, 1}};
  for (bool reference : {false, true}) {
    const auto o = small_options(8);
    const auto r = reference ? run_study_reference(ds, adj, o) : run_study(ds, adj, o);
    same_ci(r.marginal[0].xi_ci, r.marginal[1].xi_ci, 1e-12);
    same_ci(r.marginal[0].xi_ci, r.pairs[0].pooled_xi_ci, 1e-7);
    same_ci(r.marginal[0].xi_ci, r.pairs[0].aggregate_xi_ci, 1e-12);
    same_ci(r.marginal[0].xi_ci, r.aggregate.xi_ci, 1e-12);
  }
}

TEST_CASE("study: single site") {
  const auto base = synthetic(0.1, CopulaSpec::independence(), 3000, 9);
  GridDataset ds;
  ds.times = base.times;
  ds.cadence = base.cadence;
  ds.sites = {base.sites[0]};
  ds.values = {base.values[0]};
  const auto r = run_study(ds, default_adjacency(ds), small_options(10));
  CHECK(r.pairs.empty());
  REQUIRE(r.marginal.size() == 1);
  CHECK(r.marginal[0].fit->params.xi == r.aggregate.fit->params.xi);
  CHECK(r.marginal[0].fit->params.sigma == r.aggregate.fit->params.sigma);
  same_ci(r.marginal[0].xi_ci, r.aggregate.xi_ci, 1e-12);
  CHECK_FALSE(r.aggregate.mean_eta.has_value());
}

TEST_CASE("study: a failing site yields a partial report") {
  auto ds = synthetic(0.1, CopulaSpec::independence(), 2000, 11);
  ds.values[1].assign(ds.n_times(), 1.0);
  const auto r = run_study(ds, default_adjacency(ds), small_options(12));
  CHECK_FALSE(r.marginal[1].error.empty());
  CHECK_FALSE(r.marginal[1].fit.has_value());
  CHECK(r.marginal[0].fit.has_value());
  CHECK(r.marginal[0].xi_ci.has_value());
}

TEST_CASE("study: bounded synthetic case scales the aggregate shape") {
  const auto ds = synthetic(-0.2, CopulaSpec::inverted_logistic(0.5), 20000, 13);
  auto o = small_options(14);
  o.p = 0.98;
  o.n_boot = 100;
  const auto r = run_study(ds, default_adjacency(ds), o);
  REQUIRE(r.aggregate.fit);
  REQUIRE(r.aggregate.fit->params.xi < 0);
  REQUIRE(r.aggregate.scaled_xi_ci);
  REQUIRE(r.aggregate.mean_eta);
  CHECK(r.aggregate.scaled_xi_ci->point == doctest::Approx(r.aggregate.fit->params.xi / *r.aggregate.mean_eta));
  CHECK(*r.aggregate.mean_eta == doctest::Approx(std::pow(2.0, -0.5)).epsilon(0.1));
  bool flagged = false;
  for (const auto& f : r.flags) flagged = flagged || f.find("mean of the pairwise eta") != std::string::npos;
  CHECK(flagged);
}
