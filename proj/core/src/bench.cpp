#include "ots/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "ots/formulation.hpp"
#include "ots/oracle.hpp"

namespace ots::bench {

namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string trimmed_count(double v) {
  const long long rounded = std::llround(v);
  if (std::abs(v - static_cast<double>(rounded)) < 1e-9)
    return std::to_string(rounded);
  return std::to_string(v);
}

}  // namespace

std::string Approach::name() const {
  switch (kind) {
    case Kind::kMip:
      return "mip";
    case Kind::kTbt:
      return "tbt-" + std::to_string(k);
    case Kind::kSbt:
      return "sbt-" + trimmed_count(t_ms);
  }
  return "?";
}

Approach Approach::parse(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "mip") return {Kind::kMip};
  if (s == "ind" || s == "ind+" || s == "nlp" || s == "nlp+")
    throw ValidationError("approach '" + s + "' needs backend features (" +
                          milp::backend_info().name +
                          " has no indicator/bilinear support)");
  auto parse_tail = [&](const char* prefix) -> std::optional<double> {
    const size_t len = std::string(prefix).size();
    if (s.rfind(prefix, 0) != 0 || s.size() <= len) return std::nullopt;
    try {
      size_t used = 0;
      const double v = std::stod(s.substr(len), &used);
      if (used != s.size() - len) return std::nullopt;
      return v;
    } catch (...) {
      return std::nullopt;
    }
  };
  if (auto k = parse_tail("tbt-")) {
    if (*k < 0 || *k != std::floor(*k))
      throw ValidationError("TBT level must be a non-negative integer: " + s);
    return {Kind::kTbt, static_cast<int>(*k), 0};
  }
  if (auto t = parse_tail("sbt-")) {
    if (!(*t > 0))
      throw ValidationError("SBT budget must be positive milliseconds: " + s);
    return {Kind::kSbt, 0, *t};
  }
  throw ValidationError("unknown approach '" + s +
                        "' (expected mip, tbt-<k> or sbt-<t_ms>)");
}

std::pair<double, double> compute_bound_metrics(const Bounds& bounds0,
                                                const Bounds& bounds) {
  if (bounds0.size() != bounds.size())
    throw ValidationError("bound metric inputs cover different line sets");
  double sum_f = 0, sum_m = 0;
  for (const auto& [id, lb0] : bounds0.entries()) {
    const LineBounds& lb = bounds.at(id);
    if (!(lb0.f_width() > 0) || !(lb0.m_width() > 0))
      throw ZeroWidthError("line " + std::to_string(id) +
                           " has a degenerate initial bound width");
    sum_f += 1.0 - lb.f_width() / lb0.f_width();
    sum_m += 1.0 - lb.m_width() / lb0.m_width();
  }
  const double n = static_cast<double>(bounds0.size());
  return {100.0 * sum_f / n, 100.0 * sum_m / n};
}

double gap_pct(double cost, double dual_bound) {
  if (!std::isfinite(dual_bound)) return std::numeric_limits<double>::infinity();
  return std::max(0.0, 100.0 * (cost - dual_bound) /
                           std::max(std::abs(cost), 1e-9));
}

double sub_pct(double cost, double best_cost) {
  return std::max(0.0, 100.0 * (cost - best_cost) /
                           std::max(std::abs(best_cost), 1e-9));
}

double dif_pct(double cost, double refit_cost) {
  if (std::abs(cost) < 1e-9 && std::abs(refit_cost) < 1e-9) return 0.0;
  return 100.0 * std::abs(cost - refit_cost) /
         std::max(std::abs(refit_cost), 1e-9);
}

SolutionMetrics compute_solution_metrics(std::optional<double> cost,
                                         double dual_bound, double best_cost,
                                         double refit_cost) {
  if (!cost) throw NoIncumbentError("solution metrics need an incumbent");
  return {gap_pct(*cost, dual_bound), sub_pct(*cost, best_cost),
          dif_pct(*cost, refit_cost)};
}

namespace {

BenchmarkRecord run_row(const Network& net, const Instance& inst,
                        const Approach& approach, const BenchOptions& options) {
  BenchmarkRecord rec;
  rec.instance = inst.seed_info.index;
  rec.approach = approach.name();

  TightenReport report;
  if (approach.kind == Approach::Kind::kMip) {
    report.network = net.name();
    report.seed_info = inst.seed_info;
    report.mode_name = "mip";
    report.bounds0 = initial_bounds(net);
    report.bounds = report.bounds0;
  } else {
    TightenConfig cfg = approach.kind == Approach::Kind::kTbt
                            ? TightenConfig::tbt(approach.k)
                            : TightenConfig::sbt(approach.t_ms);
    cfg.per_problem_time_limit = options.per_problem_time_limit;
    cfg.heuristic_budget = options.heuristic_budget;
    cfg.propagation = options.propagation;
    report = approach.kind == Approach::Kind::kTbt ? run_tbt(net, inst, cfg)
                                                   : run_sbt(net, inst, cfg);
  }
  const auto [dF, dM] = compute_bound_metrics(report.bounds0, report.bounds);
  rec.dF_pct = dF;
  rec.dM_pct = dM;
  rec.tB_s = report.t_bound;

  const OtsSolution sol = solve_ots(net, inst, report, options.controls);
  rec.status = std::string(milp::to_string(sol.status));
  rec.tO_s = sol.t_solve;
  rec.tT_s = rec.tB_s + rec.tO_s;
  if (!sol.line_status.empty()) {
    rec.cost = sol.cost;
    rec.gap_pct = sol.gap_pct;
    const milp::ModelSpec refit_model =
        build_dcopf_fixed(net, inst, sol.line_status);
    milp::SolveControls refit_controls;
    refit_controls.time_limit = 600.0;
    refit_controls.rel_gap = 0.0;
    const milp::SolveOutcome refit = milp::solve(refit_model, refit_controls);
    if (refit.status == milp::SolveStatus::kOptimal)
      rec.dif_pct = dif_pct(sol.cost, refit.objective);
  }
  return rec;
}

}  // namespace

std::vector<BenchmarkRecord> run_benchmark(
    const Network& net, const std::vector<Instance>& instances,
    const std::vector<Approach>& approaches, const BenchOptions& options) {
  if (instances.empty()) throw ValidationError("no instances to benchmark");
  if (approaches.empty()) throw ValidationError("no approaches to benchmark");
  {
    std::vector<std::string> names;
    for (const Approach& a : approaches) names.push_back(a.name());
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end())
      throw ValidationError("duplicate approach names in one run");
  }

  struct Task {
    const Instance* inst;
    const Approach* approach;
  };
  std::vector<Task> tasks;
  for (const Instance& inst : instances)
    for (const Approach& a : approaches) tasks.push_back({&inst, &a});

  std::vector<BenchmarkRecord> records(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < tasks.size();
         i = next.fetch_add(1)) {
      try {
        records[i] =
            run_row(net, *tasks[i].inst, *tasks[i].approach, options);
      } catch (const Error& e) {
        BenchmarkRecord rec;
        rec.instance = tasks[i].inst->seed_info.index;
        rec.approach = tasks[i].approach->name();
        rec.status = "error";
        records[i] = std::move(rec);
      }
    }
  };
  const int n_workers =
      std::max(1, std::min<int>(options.jobs, static_cast<int>(tasks.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  // Suboptimality against the best incumbent per instance.
  std::map<int, double> best;
  for (const BenchmarkRecord& r : records)
    if (r.cost) {
      auto [it, inserted] = best.try_emplace(r.instance, *r.cost);
      if (!inserted) it->second = std::min(it->second, *r.cost);
    }
  for (BenchmarkRecord& r : records)
    if (r.cost) r.sub_pct = sub_pct(*r.cost, best.at(r.instance));

  std::sort(records.begin(), records.end(),
            [](const BenchmarkRecord& a, const BenchmarkRecord& b) {
              return std::tie(a.instance, a.approach) <
                     std::tie(b.instance, b.approach);
            });
  return records;
}

const char* const kRecordsCsvHeader =
    "instance,approach,status,cost,gap_pct,sub_pct,dif_pct,dF_pct,dM_pct,"
    "tB_s,tO_s,tT_s";

namespace {

std::string opt_cell(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

}  // namespace

void write_records_csv(const std::vector<BenchmarkRecord>& records,
                       std::ostream& out) {
  out << kRecordsCsvHeader << '\n';
  for (const BenchmarkRecord& r : records) {
    out << r.instance << ',' << r.approach << ',' << r.status << ','
        << opt_cell(r.cost) << ',' << opt_cell(r.gap_pct) << ','
        << opt_cell(r.sub_pct) << ',' << opt_cell(r.dif_pct) << ','
        << format_number(r.dF_pct) << ',' << format_number(r.dM_pct) << ','
        << format_number(r.tB_s) << ',' << format_number(r.tO_s) << ','
        << format_number(r.tT_s) << '\n';
  }
}

std::vector<BenchmarkRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("empty results file");
  if (line != kRecordsCsvHeader)
    throw ParseError("unexpected results header: " + line);
  std::vector<BenchmarkRecord> records;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (cells.size() != 12)
      throw ParseError("line " + std::to_string(line_no) + ": expected 12 cells");
    auto opt = [&](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return std::stod(s);
    };
    try {
      BenchmarkRecord r;
      r.instance = std::stoi(cells[0]);
      r.approach = cells[1];
      r.status = cells[2];
      r.cost = opt(cells[3]);
      r.gap_pct = opt(cells[4]);
      r.sub_pct = opt(cells[5]);
      r.dif_pct = opt(cells[6]);
      r.dF_pct = std::stod(cells[7]);
      r.dM_pct = std::stod(cells[8]);
      r.tB_s = std::stod(cells[9]);
      r.tO_s = std::stod(cells[10]);
      r.tT_s = std::stod(cells[11]);
      records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

namespace {

bool hit_time_limit(const BenchmarkRecord& r) {
  return r.status == "feasible_at_limit" || r.status == "no_solution_at_limit";
}

ApproachSummary summarize_one(const std::string& name,
                              const std::vector<const BenchmarkRecord*>& rows) {
  ApproachSummary s;
  s.approach = name;
  s.n = static_cast<int>(rows.size());
  int n_gap = 0, n_dif = 0, n_sub = 0;
  for (const BenchmarkRecord* r : rows) {
    s.mean_dF += r->dF_pct;
    s.mean_dM += r->dM_pct;
    s.mean_tB += r->tB_s;
    s.mean_tO += r->tO_s;
    s.mean_tT += r->tT_s;
    if (r->gap_pct && std::isfinite(*r->gap_pct)) {
      s.mean_gap += *r->gap_pct;
      s.max_gap = std::max(s.max_gap, *r->gap_pct);
      ++n_gap;
    }
    if (r->dif_pct) {
      s.mean_dif += *r->dif_pct;
      s.max_dif = std::max(s.max_dif, *r->dif_pct);
      ++n_dif;
    }
    if (r->sub_pct) {
      s.mean_sub += *r->sub_pct;
      s.max_sub = std::max(s.max_sub, *r->sub_pct);
      ++n_sub;
    }
    if (hit_time_limit(*r)) ++s.n_tl;
  }
  if (s.n > 0) {
    s.mean_dF /= s.n;
    s.mean_dM /= s.n;
    s.mean_tB /= s.n;
    s.mean_tO /= s.n;
    s.mean_tT /= s.n;
  }
  if (n_gap > 0) s.mean_gap /= n_gap;
  if (n_dif > 0) s.mean_dif /= n_dif;
  if (n_sub > 0) s.mean_sub /= n_sub;
  return s;
}

std::vector<ApproachSummary> summarize_rows(
    const std::vector<const BenchmarkRecord*>& rows) {
  std::map<std::string, std::vector<const BenchmarkRecord*>> by_approach;
  for (const BenchmarkRecord* r : rows) by_approach[r->approach].push_back(r);
  std::vector<ApproachSummary> out;
  for (const auto& [name, group] : by_approach)
    out.push_back(summarize_one(name, group));
  return out;
}

}  // namespace

std::vector<ApproachSummary> summarize(
    const std::vector<BenchmarkRecord>& records) {
  std::vector<const BenchmarkRecord*> rows;
  rows.reserve(records.size());
  for (const BenchmarkRecord& r : records) rows.push_back(&r);
  return summarize_rows(rows);
}

SplitSummary summarize_with_split(const std::vector<BenchmarkRecord>& records,
                                  double split_fraction) {
  if (split_fraction <= 0 || split_fraction > 0.5)
    throw ValidationError("split fraction must lie in (0, 0.5]");
  SplitSummary out;
  out.all = summarize(records);

  std::map<int, std::pair<double, int>> totals;  // instance -> (sum tT, n)
  for (const BenchmarkRecord& r : records) {
    auto& [sum, n] = totals[r.instance];
    sum += r.tT_s;
    ++n;
  }
  std::vector<std::pair<double, int>> ranked;  // (mean tT, instance)
  for (const auto& [inst, acc] : totals)
    ranked.push_back({acc.first / std::max(1, acc.second), inst});
  std::sort(ranked.begin(), ranked.end());
  const size_t n_split = std::max<size_t>(
      1, static_cast<size_t>(std::floor(ranked.size() * split_fraction)));

  std::vector<const BenchmarkRecord*> hard, easy;
  auto in_set = [&](int inst, bool from_top) {
    for (size_t i = 0; i < n_split && i < ranked.size(); ++i) {
      const int candidate =
          from_top ? ranked[ranked.size() - 1 - i].second : ranked[i].second;
      if (candidate == inst) return true;
    }
    return false;
  };
  for (const BenchmarkRecord& r : records) {
    if (in_set(r.instance, /*from_top=*/true)) hard.push_back(&r);
    if (in_set(r.instance, /*from_top=*/false)) easy.push_back(&r);
  }
  out.hard = summarize_rows(hard);
  out.easy = summarize_rows(easy);
  return out;
}

void write_summary(const std::vector<ApproachSummary>& summary,
                   std::ostream& out) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %4s %8s %8s %8s %8s %8s %8s %8s %8s %9s %9s %9s %5s",
                "approach", "n", "dF%", "dM%", "gap%", "gap%max", "dif%",
                "dif%max", "sub%", "sub%max", "tB(s)", "tO(s)", "tT(s)", "#TL");
  out << buf << '\n';
  for (const ApproachSummary& s : summary) {
    std::snprintf(buf, sizeof buf,
                  "%-10s %4d %8.2f %8.2f %8.2f %8.2f %8.2f %8.2f %8.2f %8.2f "
                  "%9.2f %9.2f %9.2f %5d",
                  s.approach.c_str(), s.n, s.mean_dF, s.mean_dM, s.mean_gap,
                  s.max_gap, s.mean_dif, s.max_dif, s.mean_sub, s.max_sub,
                  s.mean_tB, s.mean_tO, s.mean_tT, s.n_tl);
    out << buf << '\n';
  }
}

std::vector<ProfilePoint> performance_profile(
    const std::vector<BenchmarkRecord>& records, double time_limit) {
  std::map<std::string, std::vector<const BenchmarkRecord*>> by_approach;
  for (const BenchmarkRecord& r : records) by_approach[r.approach].push_back(&r);
  std::vector<ProfilePoint> out;
  for (const auto& [name, rows] : by_approach) {
    std::vector<double> solved_times;
    int unsolved = 0;
    for (const BenchmarkRecord* r : rows) {
      if (r->status == "optimal")
        solved_times.push_back(r->tT_s);
      else
        ++unsolved;
    }
    std::sort(solved_times.begin(), solved_times.end());
    int count = 0;
    for (double t : solved_times) out.push_back({name, t, ++count});
    for (int i = 0; i < unsolved; ++i) out.push_back({name, time_limit, count});
    if (solved_times.empty() && unsolved == 0) continue;
    if (out.empty() || out.back().t_total != time_limit ||
        out.back().approach != name)
      out.push_back({name, time_limit, count});
  }
  return out;
}

void write_profile_csv(const std::vector<ProfilePoint>& profile,
                       std::ostream& out) {
  out << "approach,t_total_s,n_solved\n";
  for (const ProfilePoint& p : profile)
    out << p.approach << ',' << format_number(p.t_total) << ',' << p.solved
        << '\n';
}

}  // namespace ots::bench
