#include "hopca/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "hopca/io.hpp"
#include "hopca/sparse.hpp"

namespace hopca {

const std::vector<std::string>& table_methods() {
  static const std::vector<std::string> m{"cp-als",        "tpa",           "hosvd",
                                          "hooi",          "sparse-cp-tpa", "sparse-cp-als",
                                          "sparse-hosvd",  "sparse-hooi"};
  return m;
}

const std::vector<std::string>& roc_methods() {
  static const std::vector<std::string> m{"sparse-cp-tpa", "sparse-cp-als", "sparse-hosvd",
                                          "sparse-hooi",   "naive-cp",      "naive-tucker"};
  return m;
}

void ExperimentConfig::validate() const {
  scenario.validate();
  solver.validate();
  if (replicates < 1) throw Error("replicates must be >= 1");
  if (jobs < 1) throw Error("jobs must be >= 1");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw Error("grid must be non-negative and strictly increasing");
    }
  }
}

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(jobs, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

PenaltySpec sparse_mode_penalty(const SimTruth& truth, const std::vector<double>& grid) {
  PenaltySpec pen;
  for (std::size_t m = 0; m < 3; ++m) {
    if (!truth.sparse_modes[m]) continue;
    if (grid.empty()) pen[m] = ModePenalty::bic();
    else if (grid.size() == 1) pen[m] = ModePenalty::fixed_relative(grid[0]);
    else pen[m] = ModePenalty::grid(grid, PenaltyKind::lasso, true);
  }
  return pen;
}

SimScenarioSpec replicate_spec(const ExperimentConfig& cfg, int r) {
  SimScenarioSpec s = cfg.scenario;
  s.seed = cfg.seed;
  s.replicate = static_cast<std::uint64_t>(r);
  return s;
}

SolverConfig replicate_solver(const ExperimentConfig& cfg, int r) {
  SolverConfig s = cfg.solver;
  s.seed = cfg.seed * 1000003ULL + static_cast<std::uint64_t>(r);
  return s;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

RecoveryMetrics run_method(const std::string& method, const SimTruth& truth,
                           const std::vector<double>& grid, const SolverConfig& cfg) {
  const Tensor3& x = truth.x;
  const Index K = truth.model.rank();
  const Ranks ranks{K, K, K};
  if (method == "cp-als") return support_metrics(cp_als(x, K, cfg).model, truth);
  if (method == "tpa") return support_metrics(tpa(x, K, cfg).model, truth);
  if (method == "hosvd") return support_metrics(hosvd(x, ranks).model, truth);
  if (method == "hooi") return support_metrics(hooi(x, ranks, cfg).model, truth);
  const PenaltySpec pen = sparse_mode_penalty(truth, grid);
  if (method == "sparse-cp-tpa") return support_metrics(sparse_cp_tpa(x, K, pen, cfg).model, truth);
  if (method == "sparse-cp-als") return support_metrics(sparse_cp_als(x, K, pen, cfg).model, truth);
  if (method == "sparse-hosvd") return support_metrics(sparse_hosvd(x, ranks, pen, cfg).model, truth);
  if (method == "sparse-hooi") return support_metrics(sparse_hooi(x, ranks, pen, cfg).model, truth);
  throw Error("unknown method '" + method + "'");
}

TableResult run_table_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  for (const auto& m : cfg.methods) {
    if (std::find(table_methods().begin(), table_methods().end(), m) == table_methods().end()) {
      throw Error("unknown method '" + m + "'");
    }
  }
  TableResult res;
  if (cfg.methods.empty()) return res;
  const std::size_t nm = cfg.methods.size();
  res.records.resize(nm * static_cast<std::size_t>(cfg.replicates));
  parallel_for(cfg.replicates, cfg.jobs, [&](int r) {
    const SimTruth truth = simulate(replicate_spec(cfg, r));
    const SolverConfig solver = replicate_solver(cfg, r);
    for (std::size_t mi = 0; mi < nm; ++mi) {
      ReplicateRecord& rec = res.records[static_cast<std::size_t>(r) * nm + mi];
      rec.method = cfg.methods[mi];
      rec.replicate = r;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        rec.metrics = run_method(rec.method, truth, cfg.grid, solver);
        rec.ok = true;
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  });

  const Index K = cfg.scenario.K;
  const auto sparse = cfg.scenario.sparse_modes();
  for (const auto& method : cfg.methods) {
    for (Index k = 0; k < K; ++k) {
      for (int m = 1; m <= 3; ++m) {
        if (!sparse[static_cast<std::size_t>(m - 1)]) continue;
        std::vector<double> tp, fp, mse;
        int failed = 0;
        for (const auto& rec : res.records) {
          if (rec.method != method) continue;
          if (!rec.ok) {
            ++failed;
            continue;
          }
          tp.push_back(rec.metrics.tp[static_cast<std::size_t>(k)][static_cast<std::size_t>(m - 1)]);
          fp.push_back(rec.metrics.fp[static_cast<std::size_t>(k)][static_cast<std::size_t>(m - 1)]);
          mse.push_back(rec.metrics.mse);
        }
        res.rows.push_back({method, k, m, mean(tp), mean(fp), sd(tp), sd(fp), mean(mse), sd(mse),
                            static_cast<int>(tp.size()), failed});
      }
    }
  }
  return res;
}

RocResult run_roc_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  for (const auto& m : cfg.methods) {
    if (std::find(roc_methods().begin(), roc_methods().end(), m) == roc_methods().end()) {
      throw Error("unknown ROC method '" + m + "'");
    }
  }
  RocResult res;
  if (cfg.methods.empty()) return res;
  const std::vector<double> grid = cfg.grid.empty() ? default_roc_grid() : cfg.grid;
  const std::size_t nm = cfg.methods.size();
  std::vector<std::vector<RocPoint>> points(nm * static_cast<std::size_t>(cfg.replicates));
  res.records.resize(points.size());
  parallel_for(cfg.replicates, cfg.jobs, [&](int r) {
    const SimTruth truth = simulate(replicate_spec(cfg, r));
    const SolverConfig solver = replicate_solver(cfg, r);
    for (std::size_t mi = 0; mi < nm; ++mi) {
      const std::size_t slot = static_cast<std::size_t>(r) * nm + mi;
      ReplicateRecord& rec = res.records[slot];
      rec.method = cfg.methods[mi];
      rec.replicate = r;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        points[slot] = roc_sweep(truth.x, truth, rec.method, grid, solver);
        rec.ok = true;
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  });

  for (std::size_t mi = 0; mi < nm; ++mi) {
    // Average at matched (grid index, component, mode).
    std::map<std::tuple<std::size_t, Index, int>, std::pair<RocRow, int>> acc;
    for (int r = 0; r < cfg.replicates; ++r) {
      const std::size_t slot = static_cast<std::size_t>(r) * nm + mi;
      if (!res.records[slot].ok) continue;
      for (const auto& p : points[slot]) {
        auto& [row, count] = acc[{p.grid_index, p.component, p.mode}];
        row.method = cfg.methods[mi];
        row.grid_index = p.grid_index;
        row.lambda = p.lambda;
        row.component = p.component;
        row.mode = p.mode;
        row.tp += p.tp;
        row.fp += p.fp;
        ++count;
      }
    }
    for (auto& [key, entry] : acc) {
      auto& [row, count] = entry;
      row.tp /= count;
      row.fp /= count;
      row.replicates = count;
      res.rows.push_back(row);
    }
  }
  return res;
}

namespace {

void write_timings(const std::filesystem::path& dir, const std::vector<ReplicateRecord>& records) {
  CsvWriter csv(dir / "timings.csv", {"method", "replicate", "seconds", "ok", "error"});
  for (const auto& r : records) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    csv << r.method << r.replicate << r.seconds << (r.ok ? 1 : 0) << err;
    csv.endrow();
  }
}

}  // namespace

void write_table_csv(const std::filesystem::path& dir, int scenario, const TableResult& res) {
  CsvWriter csv(dir / "table.csv",
                {"scenario", "method", "component", "mode", "tp_mean", "fp_mean", "tp_sd", "fp_sd",
                 "mse_mean", "mse_sd", "replicates", "failed"});
  for (const auto& r : res.rows) {
    csv << scenario << r.method << r.component + 1 << r.mode << r.tp_mean << r.fp_mean << r.tp_sd
        << r.fp_sd << r.mse_mean << r.mse_sd << r.replicates << r.failed;
    csv.endrow();
  }
  CsvWriter per(dir / "metrics.csv", {"method", "replicate", "component", "tp_u", "fp_u", "tp_v",
                                      "fp_v", "tp_w", "fp_w", "mse"});
  for (const auto& r : res.records) {
    if (!r.ok) continue;
    for (std::size_t k = 0; k < r.metrics.tp.size(); ++k) {
      per << r.method << r.replicate << k + 1;
      for (std::size_t m = 0; m < 3; ++m) per << r.metrics.tp[k][m] << r.metrics.fp[k][m];
      per << r.metrics.mse;
      per.endrow();
    }
  }
  write_timings(dir, res.records);
}

void write_roc_csv(const std::filesystem::path& dir, int scenario, const RocResult& res) {
  CsvWriter csv(dir / "roc.csv", {"scenario", "method", "grid_index", "lambda", "component", "mode",
                                  "tp", "fp", "replicates"});
  for (const auto& r : res.rows) {
    csv << scenario << r.method << r.grid_index << r.lambda << r.component + 1 << r.mode << r.tp
        << r.fp << r.replicates;
    csv.endrow();
  }
  write_timings(dir, res.records);
}

}  // namespace hopca
