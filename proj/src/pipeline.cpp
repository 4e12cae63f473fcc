#include "tailagg/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "tailagg/errors.hpp"
#include "tailagg/stats.hpp"

namespace tailagg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  std::string out(s.substr(first, last - first + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    fields.push_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

bool is_missing(const std::string& s) {
  if (s.empty()) return true;
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower == "na" || lower == "nan" || lower == "null";
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("unknown column '" + name + "'", 1);
  return static_cast<std::size_t>(it - header.begin());
}

int month_of(std::int64_t t) {
  using namespace std::chrono;
  const sys_days day = floor<days>(sys_seconds{seconds{t}});
  return static_cast<int>(static_cast<unsigned>(year_month_day{day}.month()));
}

}  // namespace

std::size_t GridDataset::site_index(const std::string& id) const {
  for (std::size_t s = 0; s < sites.size(); ++s) {
    if (sites[s].id == id) return s;
  }
  throw InvalidArgument("unknown site '" + id + "'");
}

std::int64_t parse_timestamp(const std::string& text, bool& calendar) {
  std::int64_t raw = 0;
  if (parse_number(text, raw)) {
    calendar = false;
    return raw;
  }
  // YYYY-MM-DD[(T| )HH:MM[:SS]][Z]
  int y = 0, mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
  std::string_view s(text);
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  const auto field = [&](std::size_t pos, std::size_t len, int& out) {
    return s.size() >= pos + len && parse_number(s.substr(pos, len), out);
  };
  bool ok = s.size() >= 10 && s[4] == '-' && s[7] == '-' && field(0, 4, y) && field(5, 2, mo) &&
            field(8, 2, d);
  if (ok && s.size() > 10) {
    ok = (s[10] == 'T' || s[10] == ' ') && s.size() >= 16 && s[13] == ':' && field(11, 2, hh) &&
         field(14, 2, mm);
    if (ok && s.size() > 16) ok = s.size() == 19 && s[16] == ':' && field(17, 2, ss);
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ok || !ymd.ok() || hh > 23 || mm > 59 || ss > 60) {
    throw InvalidArgument("unparseable timestamp '" + text + "'");
  }
  calendar = true;
  const auto secs = sys_days{ymd}.time_since_epoch() + hours{hh} + minutes{mm} + seconds{ss};
  return duration_cast<seconds>(secs).count();
}

std::string format_timestamp(std::int64_t t, bool calendar) {
  if (!calendar) return std::to_string(t);
  using namespace std::chrono;
  const sys_seconds tp{seconds{t}};
  const sys_days day = floor<days>(tp);
  const year_month_day ymd{day};
  const auto tod = hh_mm_ss{tp - day};
  std::ostringstream os;
  os << std::setfill('0') << std::setw(4) << static_cast<int>(ymd.year()) << '-' << std::setw(2)
     << static_cast<unsigned>(ymd.month()) << '-' << std::setw(2)
     << static_cast<unsigned>(ymd.day());
  if (tp != day) {
    os << 'T' << std::setw(2) << tod.hours().count() << ':' << std::setw(2)
       << tod.minutes().count() << ':' << std::setw(2) << tod.seconds().count();
  }
  return os.str();
}

GridDataset ingest_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split(line, schema.delimiter);
      break;
    }
  }
  if (header.empty()) throw DataError("empty input");
  const auto header_line = line_no;
  const auto tcol = column_index(header, schema.time_col);
  const auto scol = column_index(header, schema.site_col);
  const auto vcol = column_index(header, schema.value_col);
  constexpr auto kAbsent = std::string::npos;
  const auto rcol = schema.row_col ? column_index(header, *schema.row_col) : kAbsent;
  const auto ccol = schema.col_col ? column_index(header, *schema.col_col) : kAbsent;

  struct Record {
    std::int64_t time;
    std::size_t site;
    double value;
    std::size_t line;
  };
  std::vector<Record> records;
  GridDataset ds;
  std::unordered_map<std::string, std::size_t> site_ids;
  std::optional<bool> calendar;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, schema.delimiter);
    if (fields.size() != header.size()) {
      throw DataError("expected " + std::to_string(header.size()) + " fields, found " +
                          std::to_string(fields.size()),
                      line_no);
    }
    bool is_calendar = false;
    std::int64_t t = 0;
    try {
      t = parse_timestamp(fields[tcol], is_calendar);
    } catch (const InvalidArgument& e) {
      throw DataError(e.what(), line_no);
    }
    if (calendar && *calendar != is_calendar) {
      throw DataError("mixed calendar and numeric timestamps", line_no);
    }
    calendar = is_calendar;

    const auto& id = fields[scol];
    if (id.empty()) throw DataError("empty site identifier", line_no);
    auto [it, inserted] = site_ids.try_emplace(id, ds.sites.size());
    if (inserted) ds.sites.push_back({id, std::nullopt, std::nullopt});
    Site& site = ds.sites[it->second];
    const auto coordinate = [&](std::size_t col, std::optional<int>& slot) {
      if (col == kAbsent) return;
      int v = 0;
      if (!parse_number(fields[col], v)) {
        throw DataError("grid coordinate '" + fields[col] + "' is not an integer", line_no);
      }
      if (slot && *slot != v) throw DataError("site '" + id + "' changes grid coordinates", line_no);
      slot = v;
    };
    coordinate(rcol, site.row);
    coordinate(ccol, site.col);

    double value = kNaN;
    if (!is_missing(fields[vcol])) {
      if (!parse_number(fields[vcol], value) || !std::isfinite(value)) {
        throw DataError("value '" + fields[vcol] + "' is not a number", line_no);
      }
    }
    records.push_back({t, it->second, value, line_no});
  }
  if (records.empty()) throw DataError("no data rows after the header", header_line);
  ds.calendar_times = calendar.value_or(false);

  std::vector<std::int64_t> all_times;
  all_times.reserve(records.size());
  for (const auto& r : records) all_times.push_back(r.time);
  std::sort(all_times.begin(), all_times.end());
  all_times.erase(std::unique(all_times.begin(), all_times.end()), all_times.end());
  if (all_times.size() >= 2) {
    ds.cadence = all_times[1] - all_times[0];
    for (std::size_t i = 2; i < all_times.size(); ++i) {
      if (all_times[i] - all_times[i - 1] != ds.cadence) {
        throw DataError("non-uniform cadence at " +
                        format_timestamp(all_times[i], ds.calendar_times));
      }
    }
  }

  const auto S = ds.sites.size();
  const auto T = all_times.size();
  std::vector<double> cells(T * S, kNaN);
  std::vector<char> seen(T * S, 0);
  for (const auto& r : records) {
    const auto t = static_cast<std::size_t>(
        std::lower_bound(all_times.begin(), all_times.end(), r.time) - all_times.begin());
    const auto cell = t * S + r.site;
    if (seen[cell]) {
      throw DataError("duplicate row for time " + format_timestamp(r.time, ds.calendar_times) +
                          " and site '" + ds.sites[r.site].id + "'",
                      r.line);
    }
    seen[cell] = 1;
    cells[cell] = r.value;
  }

  if (!schema.months.empty() && !ds.calendar_times) {
    throw DataError("a month filter needs calendar timestamps");
  }
  ds.values.assign(S, {});
  for (std::size_t t = 0; t < T; ++t) {
    if (!schema.months.empty() &&
        std::find(schema.months.begin(), schema.months.end(), month_of(all_times[t])) ==
            schema.months.end()) {
      continue;
    }
    bool complete = true;
    for (std::size_t s = 0; s < S; ++s) complete = complete && !std::isnan(cells[t * S + s]);
    if (!complete) {
      ++ds.dropped_gaps;
      continue;
    }
    ds.times.push_back(all_times[t]);
    for (std::size_t s = 0; s < S; ++s) ds.values[s].push_back(cells[t * S + s]);
  }
  return ds;
}

GridDataset ingest_csv_file(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return ingest_csv(in, schema);
}

std::vector<double> spatial_aggregate(const GridDataset& ds, const std::vector<std::size_t>& sites) {
  if (sites.empty()) throw InvalidArgument("spatial aggregate over no sites");
  for (const auto s : sites) {
    if (s >= ds.n_sites()) throw InvalidArgument("site index out of range");
  }
  std::vector<double> out(ds.n_times(), 0.0);
  for (const auto s : sites) {
    for (std::size_t t = 0; t < out.size(); ++t) out[t] += ds.values[s][t];
  }
  const auto d = static_cast<double>(sites.size());
  for (auto& v : out) v /= d;
  return out;
}

std::vector<SitePair> default_adjacency(const GridDataset& ds) {
  const auto S = ds.n_sites();
  const bool grid = std::all_of(ds.sites.begin(), ds.sites.end(),
                                [](const Site& s) { return s.row && s.col; });
  std::vector<SitePair> pairs;
  for (std::size_t i = 0; i < S; ++i) {
    for (std::size_t j = i + 1; j < S; ++j) {
      if (grid) {
        const int dist = std::abs(*ds.sites[i].row - *ds.sites[j].row) +
                         std::abs(*ds.sites[i].col - *ds.sites[j].col);
        if (dist != 1) continue;
      }
      pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

namespace {

// Positions of the statistics in one bootstrap replicate row.
struct Layout {
  std::size_t S, P;
  std::size_t marginal(std::size_t s) const { return s; }
  std::size_t pooled(std::size_t k) const { return S + k; }
  std::size_t pair_aggregate(std::size_t k) const { return S + P + k; }
  std::size_t pair_eta(std::size_t k) const { return S + 2 * P + k; }
  std::size_t pair_scaled(std::size_t k) const { return S + 3 * P + k; }
  std::size_t aggregate() const { return S + 4 * P; }
  std::size_t mean_eta() const { return S + 4 * P + 1; }
  std::size_t scaled() const { return S + 4 * P + 2; }
  std::size_t size() const { return S + 4 * P + 3; }
};

template <typename F>
double guarded(F&& f) {
  try {
    return f();
  } catch (const Error&) {
    return kNaN;
  }
}

// Fills the derived entries (scaled shapes, mean eta) of a row.
void finish_row(const Layout& L, std::vector<double>& row) {
  double eta_sum = 0.0;
  for (std::size_t k = 0; k < L.P; ++k) {
    row[L.pair_scaled(k)] = row[L.pair_aggregate(k)] / row[L.pair_eta(k)];
    eta_sum += row[L.pair_eta(k)];
  }
  row[L.mean_eta()] = L.P ? eta_sum / static_cast<double>(L.P) : kNaN;
  row[L.scaled()] = row[L.aggregate()] / row[L.mean_eta()];
  for (auto& v : row) {
    if (!std::isfinite(v)) v = kNaN;
  }
}

struct StudySeries {
  // Site series, then one mean series per pair, then the all-site mean.
  std::vector<std::vector<double>> series;
  std::vector<SitePair> pairs;
  Layout layout;

  const std::vector<double>& site(std::size_t s) const { return series[s]; }
  const std::vector<double>& pair_mean(std::size_t k) const { return series[layout.S + k]; }
  const std::vector<double>& all_mean() const { return series.back(); }
};

StudySeries prepare(const GridDataset& ds, const std::vector<SitePair>& adjacency) {
  StudySeries st;
  st.layout = {ds.n_sites(), adjacency.size()};
  st.pairs = adjacency;
  for (const auto& [i, j] : adjacency) {
    if (i >= ds.n_sites() || j >= ds.n_sites() || i == j) {
      throw InvalidArgument("adjacency refers to an invalid site pair");
    }
  }
  st.series = ds.values;
  for (const auto& [i, j] : adjacency) st.series.push_back(spatial_aggregate(ds, {i, j}));
  std::vector<std::size_t> all(ds.n_sites());
  std::iota(all.begin(), all.end(), std::size_t{0});
  st.series.push_back(spatial_aggregate(ds, all));
  return st;
}

// Statistic row from plain estimators on fully materialised series.
std::vector<double> evaluate_plain(const StudySeries& st,
                                   const std::vector<std::vector<double>>& series,
                                   const StudyOptions& o) {
  const auto& L = st.layout;
  std::vector<double> row(L.size(), kNaN);
  for (std::size_t s = 0; s < L.S; ++s) {
    row[L.marginal(s)] = guarded([&] { return fit_gpd(series[s], o.p).params.xi; });
  }
  for (std::size_t k = 0; k < L.P; ++k) {
    const auto [i, j] = st.pairs[k];
    row[L.pooled(k)] =
        guarded([&] { return fit_gpd_pooled(series[i], series[j], o.p).xi_common; });
    row[L.pair_aggregate(k)] = guarded([&] { return fit_gpd(series[L.S + k], o.p).params.xi; });
    row[L.pair_eta(k)] = guarded([&] { return eta_estimate(series[i], series[j], o.eta_q).value; });
  }
  row[L.aggregate()] = guarded([&] { return fit_gpd(series.back(), o.p).params.xi; });
  finish_row(L, row);
  return row;
}

// Per-series order from the largest value down, for threshold and excess
// extraction under multiplicity counts.
struct DescendingSeries {
  std::vector<double> value;
  std::vector<std::uint32_t> index;

  explicit DescendingSeries(const std::vector<double>& x) {
    std::vector<std::uint32_t> order(x.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] > x[b]; });
    index = std::move(order);
    value.resize(x.size());
    for (std::size_t r = 0; r < x.size(); ++r) value[r] = x[index[r]];
  }

  // Threshold at the empirical p-quantile of the resample and its excesses.
  void excesses(std::span<const std::uint32_t> counts, double p, std::vector<double>& ex,
                std::vector<double>& w) const {
    const auto n = value.size();
    const auto k = order_statistic_index(n, p);
    const auto need = n - k;  // resampled values at or above position k
    std::size_t cum = 0;
    double u = value.back();
    for (std::size_t r = 0; r < n; ++r) {
      cum += counts[index[r]];
      if (cum >= need) {
        u = value[r];
        break;
      }
    }
    ex.clear();
    w.clear();
    for (std::size_t r = 0; r < n && value[r] > u; ++r) {
      const auto c = counts[index[r]];
      if (c == 0) continue;
      ex.push_back(value[r] - u);
      w.push_back(static_cast<double>(c));
    }
  }
};

class CountEvaluator {
 public:
  CountEvaluator(const StudySeries& st, const StudyOptions& o) : st_(st), o_(o) {
    for (const auto& s : st.series) sorted_.emplace_back(s);
    for (const auto& [i, j] : st.pairs) eta_.emplace_back(st.site(i), st.site(j));
  }

  std::vector<double> operator()(std::span<const std::uint32_t> counts) const {
    const auto& L = st_.layout;
    std::vector<double> row(L.size(), kNaN);
    const auto n_series = st_.series.size();
    std::vector<std::vector<double>> ex(n_series), w(n_series);
    for (std::size_t s = 0; s < n_series; ++s) sorted_[s].excesses(counts, o_.p, ex[s], w[s]);
    const auto single = [&](std::size_t s) {
      return guarded([&] { return fit_gpd_excesses(ex[s], w[s]).params.xi; });
    };
    for (std::size_t s = 0; s < L.S; ++s) row[L.marginal(s)] = single(s);
    for (std::size_t k = 0; k < L.P; ++k) {
      const auto [i, j] = st_.pairs[k];
      row[L.pooled(k)] = guarded([&] {
        const WeightedExcesses both[2] = {{ex[i], w[i]}, {ex[j], w[j]}};
        return fit_shared_shape(both).xi;
      });
      row[L.pair_aggregate(k)] = single(L.S + k);
      row[L.pair_eta(k)] = guarded([&] { return eta_[k].estimate(counts, o_.eta_q).value; });
    }
    row[L.aggregate()] = single(n_series - 1);
    finish_row(L, row);
    return row;
  }

 private:
  const StudySeries& st_;
  const StudyOptions& o_;
  std::vector<DescendingSeries> sorted_;
  std::vector<EtaResampler> eta_;
};

std::vector<std::vector<double>> replicate_rows(const StudySeries& st, const StudyOptions& o,
                                                bool reference) {
  const auto n = st.series.front().size();
  std::vector<std::vector<double>> rows(o.n_boot);
  const auto B = static_cast<std::int64_t>(o.n_boot);
  if (reference) {
    BootstrapOptions bo{o.mean_block, o.n_boot, o.level, o.seed, o.execution};
    return stationary_bootstrap_replicates(
        n,
        [&](std::span<const std::size_t> idx) {
          std::vector<std::vector<double>> resampled(st.series.size());
          for (std::size_t s = 0; s < st.series.size(); ++s) {
            resampled[s].resize(idx.size());
            for (std::size_t t = 0; t < idx.size(); ++t) resampled[s][t] = st.series[s][idx[t]];
          }
          return evaluate_plain(st, resampled, o);
        },
        bo);
  }
  const CountEvaluator eval(st, o);
  const auto one = [&](std::size_t r, std::vector<std::uint32_t>& counts) {
    Rng rng = make_stream(o.seed, r);
    stationary_bootstrap_counts(n, o.mean_block, rng, counts);
    rows[r] = eval(counts);
  };
  if (o.execution == Execution::Parallel) {
#pragma omp parallel
    {
      std::vector<std::uint32_t> counts(n);
#pragma omp for schedule(dynamic)
      for (std::int64_t r = 0; r < B; ++r) one(static_cast<std::size_t>(r), counts);
    }
  } else {
    std::vector<std::uint32_t> counts(n);
    for (std::int64_t r = 0; r < B; ++r) one(static_cast<std::size_t>(r), counts);
  }
  return rows;
}

std::optional<BootstrapCI> column_ci(const std::vector<std::vector<double>>& rows,
                                     std::size_t col, double point, const StudyOptions& o,
                                     std::string& error, std::vector<std::string>& flags,
                                     const std::string& label) {
  std::vector<double> values(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) values[r] = rows[r][col];
  try {
    auto ci = percentile_ci(point, values, o.level);
    if (ci.widened) flags.push_back(label + ": percentile CI widened to contain the point estimate");
    if (ci.n_dropped) {
      flags.push_back(label + ": " + std::to_string(ci.n_dropped) + " bootstrap replicates dropped");
    }
    return ci;
  } catch (const EstimationError& e) {
    if (!error.empty()) error += "; ";
    error += e.what();
    return std::nullopt;
  }
}

template <typename F>
auto attempt(F&& f, std::string& error) -> std::optional<decltype(f())> {
  try {
    return f();
  } catch (const Error& e) {
    if (!error.empty()) error += "; ";
    error += e.what();
    return std::nullopt;
  }
}

FitReport run_study_impl(const GridDataset& ds, const std::vector<SitePair>& adjacency,
                         const StudyOptions& o, bool reference) {
  if (ds.n_sites() == 0 || ds.n_times() == 0) throw InvalidArgument("empty dataset");
  if (o.n_boot == 0) throw InvalidArgument("n_boot must be positive");
  const auto st = prepare(ds, adjacency);
  const auto& L = st.layout;

  FitReport rep;
  rep.options = o;
  rep.n_times = ds.n_times();
  rep.dropped_gaps = ds.dropped_gaps;

  const auto rows = replicate_rows(st, o, reference);
  auto& flags = rep.flags;

  for (std::size_t s = 0; s < L.S; ++s) {
    MarginalResult m;
    m.site = ds.sites[s].id;
    m.fit = attempt([&] { return fit_gpd(st.site(s), o.p); }, m.error);
    if (m.fit) {
      if (!m.fit->converged) flags.push_back(m.site + ": marginal fit did not converge");
      m.xi_ci = column_ci(rows, L.marginal(s), m.fit->params.xi, o, m.error, flags, m.site);
    }
    rep.marginal.push_back(std::move(m));
  }

  for (std::size_t k = 0; k < L.P; ++k) {
    const auto [i, j] = st.pairs[k];
    PairResult pr;
    pr.site_i = ds.sites[i].id;
    pr.site_j = ds.sites[j].id;
    const auto label = pr.site_i + "/" + pr.site_j;
    pr.pooled = attempt([&] { return fit_gpd_pooled(st.site(i), st.site(j), o.p); }, pr.error);
    if (pr.pooled) {
      pr.pooled_xi_ci =
          column_ci(rows, L.pooled(k), pr.pooled->xi_common, o, pr.error, flags, label + " pooled");
    }
    pr.eta = attempt([&] { return eta_estimate(st.site(i), st.site(j), o.eta_q); }, pr.error);
    if (pr.eta) {
      if (pr.eta->clamped) flags.push_back(label + ": eta estimate clamped at 1");
      pr.eta_ci = column_ci(rows, L.pair_eta(k), pr.eta->value, o, pr.error, flags, label + " eta");
    }
    pr.aggregate = attempt([&] { return fit_gpd(st.pair_mean(k), o.p); }, pr.error);
    if (pr.aggregate) {
      pr.aggregate_xi_ci = column_ci(rows, L.pair_aggregate(k), pr.aggregate->params.xi, o,
                                     pr.error, flags, label + " aggregate");
      if (pr.aggregate->params.xi < 0.0 && pr.eta) {
        pr.scaled_aggregate_xi_ci =
            column_ci(rows, L.pair_scaled(k), pr.aggregate->params.xi / pr.eta->value, o, pr.error,
                      flags, label + " scaled aggregate");
      }
    }
    rep.pairs.push_back(std::move(pr));
  }

  auto& agg = rep.aggregate;
  for (const auto& s : ds.sites) agg.sites.push_back(s.id);
  agg.fit = attempt([&] { return fit_gpd(st.all_mean(), o.p); }, agg.error);
  if (agg.fit) {
    agg.xi_ci = column_ci(rows, L.aggregate(), agg.fit->params.xi, o, agg.error, flags, "aggregate");
    const bool etas = L.P > 0 && std::all_of(rep.pairs.begin(), rep.pairs.end(),
                                             [](const PairResult& p) { return p.eta.has_value(); });
    if (etas) {
      double sum = 0.0;
      for (const auto& p : rep.pairs) sum += p.eta->value;
      agg.mean_eta = sum / static_cast<double>(L.P);
    }
    if (agg.fit->params.xi < 0.0 && agg.mean_eta) {
      agg.scaled_xi_ci = column_ci(rows, L.scaled(), agg.fit->params.xi / *agg.mean_eta, o,
                                   agg.error, flags, "scaled aggregate");
      flags.push_back(
          "scaled aggregate: all-site shape divided by the mean of the pairwise eta estimates");
    }
  }
  return rep;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  return os.str();
}

}  // namespace

FitReport run_study(const GridDataset& ds, const std::vector<SitePair>& adjacency,
                    const StudyOptions& opts) {
  return run_study_impl(ds, adjacency, opts, false);
}

FitReport run_study_reference(const GridDataset& ds, const std::vector<SitePair>& adjacency,
                              const StudyOptions& opts) {
  return run_study_impl(ds, adjacency, opts, true);
}

std::string format_report_table(const FitReport& report) {
  std::ostringstream os;
  const auto row = [&](const std::string& kind, const std::string& name, std::optional<double> point,
                       const std::optional<BootstrapCI>& ci) {
    os << std::left << std::setw(18) << kind << std::setw(22) << name << std::right << std::setw(9)
       << (point ? fmt(*point) : "-");
    if (ci) {
      os << "  (" << fmt(ci->lower) << ", " << fmt(ci->upper) << ")";
    }
    os << '\n';
  };
  os << std::left << std::setw(18) << "variable" << std::setw(22) << "sites" << std::right
     << std::setw(9) << "xi" << "  " << static_cast<int>(std::lround(100 * report.options.level))
     << "% CI\n";
  for (const auto& m : report.marginal) {
    row("marginal", m.site, m.fit ? std::optional(m.fit->params.xi) : std::nullopt, m.xi_ci);
  }
  for (const auto& p : report.pairs) {
    const auto name = p.site_i + "/" + p.site_j;
    row("pooled", name, p.pooled ? std::optional(p.pooled->xi_common) : std::nullopt,
        p.pooled_xi_ci);
    row("aggregate", name, p.aggregate ? std::optional(p.aggregate->params.xi) : std::nullopt,
        p.aggregate_xi_ci);
    if (p.scaled_aggregate_xi_ci) {
      row("aggregate/eta", name, p.scaled_aggregate_xi_ci->point, p.scaled_aggregate_xi_ci);
    }
    row("eta", name, p.eta ? std::optional(p.eta->value) : std::nullopt, p.eta_ci);
  }
  const auto& a = report.aggregate;
  row("aggregate", "all", a.fit ? std::optional(a.fit->params.xi) : std::nullopt, a.xi_ci);
  if (a.scaled_xi_ci) row("aggregate/eta", "all", a.scaled_xi_ci->point, a.scaled_xi_ci);
  return os.str();
}

GridDataset make_synthetic(const SyntheticOptions& o) {
  if (o.rows < 1 || o.cols < 1) throw InvalidArgument("grid needs at least one row and column");
  if (o.n_times == 0) throw InvalidArgument("n_times must be positive");
  if (o.cadence_seconds <= 0) throw InvalidArgument("cadence must be positive");
  GridDataset ds;
  ds.cadence = o.cadence_seconds;
  ds.calendar_times = true;
  for (int r = 0; r < o.rows; ++r) {
    for (int c = 0; c < o.cols; ++c) {
      ds.sites.push_back({"r" + std::to_string(r) + "c" + std::to_string(c), r, c});
    }
  }
  const auto S = ds.sites.size();
  ds.values.assign(S, std::vector<double>(o.n_times));
  bool calendar = false;
  const auto start = parse_timestamp("2000-01-01", calendar);
  Rng rng = make_stream(o.seed, 0);
  std::vector<double> u(S);
  for (std::size_t t = 0; t < o.n_times; ++t) {
    ds.times.push_back(start + static_cast<std::int64_t>(t) * o.cadence_seconds);
    copula_draw(o.copula, u, rng);
    for (std::size_t s = 0; s < S; ++s) ds.values[s][t] = gpd_quantile(o.margin, u[s]);
  }
  return ds;
}

void write_csv(std::ostream& out, const GridDataset& ds) {
  out << "time,site,row,col,value\n";
  char buf[64];
  for (std::size_t t = 0; t < ds.n_times(); ++t) {
    const auto stamp = format_timestamp(ds.times[t], ds.calendar_times);
    for (std::size_t s = 0; s < ds.n_sites(); ++s) {
      const auto& site = ds.sites[s];
      const auto res = std::to_chars(buf, buf + sizeof buf, ds.values[s][t]);
      out << stamp << ',' << site.id << ',';
      if (site.row) out << *site.row;
      out << ',';
      if (site.col) out << *site.col;
      out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
    }
  }
}

}  // namespace tailagg
