#include "hopca/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "hopca/bic.hpp"
#include "hopca/experiments.hpp"
#include "hopca/generalized.hpp"
#include "hopca/io.hpp"
#include "hopca/selection.hpp"
#include "hopca/simulation.hpp"
#include "hopca/sparse.hpp"

namespace hopca {

namespace fs = std::filesystem;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

std::vector<std::string> split(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw UsageError("invalid number '" + s + "' for " + what);
  }
  return v;
}

std::vector<double> parse_doubles(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split(s)) out.push_back(parse_double(item, what));
  if (out.empty()) throw UsageError("empty list for " + what);
  return out;
}

// "" -> none; "bic" -> default relative BIC grid; "rel:a[,b...]" -> relative
// value or grid; "a[,b...]" -> absolute value or grid.
ModePenalty parse_lambda(const std::string& spec, PenaltyKind kind, const std::string& flag) {
  if (spec.empty()) return ModePenalty::none();
  if (spec == "bic") return ModePenalty::bic(kind);
  bool relative = false;
  std::string body = spec;
  if (body.rfind("rel:", 0) == 0) {
    relative = true;
    body = body.substr(4);
  }
  ModePenalty p{kind, parse_doubles(body, flag), relative};
  try {
    p.validate();
  } catch (const Error& e) {
    throw UsageError(flag + ": " + e.what());
  }
  return p;
}

double fixed_lambda(const std::string& spec, const std::string& flag) {
  if (spec.empty()) return 0.0;
  const double v = parse_double(spec, flag);
  if (!(v >= 0.0)) throw UsageError(flag + " must be non-negative");
  return v;
}

SolverConfig solver_config(int max_iter, double tol, std::uint64_t seed, bool orthogonalize,
                           const std::string& init) {
  SolverConfig cfg;
  cfg.max_iter = max_iter;
  cfg.tol = tol;
  cfg.seed = seed;
  cfg.orthogonalize = orthogonalize;
  cfg.init = init == "random" ? InitMethod::random : InitMethod::hosvd;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

void write_sparse_outputs(const fs::path& dir, const std::string& method, const SparseCpFit& fit) {
  write_cp_model(dir, fit.model);
  write_diagnostics(dir, method, fit.diag, &fit.diag);
  write_traces(dir, fit.diag.traces);
  write_supports(dir, fit.model.U, fit.model.V, fit.model.W);
}

void print_weights(std::ostream& out, const Vector& d) {
  out << std::setprecision(10) << "d =";
  for (Index k = 0; k < d.size(); ++k) out << ' ' << d[k];
  out << '\n';
}

// ---------------------------------------------------------------------------

struct DecomposeArgs {
  std::string method, input, out_dir;
  Index rank = 1;
  std::string ranks;
  std::string lambda_u, lambda_v, lambda_w;
  std::string penalty = "lasso";
  Index group_size = 2;
  std::string q1, q2, q3;
  double alpha = 1.0;
  std::string smoother = "second";
  std::string omega_u, omega_v, omega_w;
  std::uint64_t seed = 0;
  int max_iter = 500;
  double tol = 1e-6;
  bool orthogonalize = false;
  std::string init = "hosvd";
};

Matrix operator_or_identity(const std::string& path, Index n) {
  return path.empty() ? Matrix(Matrix::Identity(n, n)) : read_matrix_csv(path);
}

int decompose(const DecomposeArgs& a, std::ostream& out) {
  const Tensor3 x = read_t3(a.input);
  const SolverConfig cfg = solver_config(a.max_iter, a.tol, a.seed, a.orthogonalize, a.init);
  const fs::path dir = a.out_dir;
  if (a.rank < 1) throw UsageError("--rank must be >= 1");
  Ranks ranks{a.rank, a.rank, a.rank};
  if (!a.ranks.empty()) {
    const auto r = parse_doubles(a.ranks, "--ranks");
    if (r.size() != 3) throw UsageError("--ranks needs three values");
    for (std::size_t m = 0; m < 3; ++m) ranks[m] = static_cast<Index>(r[m]);
  }
  PenaltyKind kind = PenaltyKind::lasso;
  if (a.penalty == "nonneg") kind = PenaltyKind::nonneg_lasso;
  const std::string& m = a.method;

  if (m == "cp-als" || m == "tpa") {
    const CpFit fit = m == "tpa" ? tpa(x, a.rank, cfg) : cp_als(x, a.rank, cfg);
    write_cp_model(dir, fit.model);
    write_diagnostics(dir, m, fit.diag);
    write_traces(dir, fit.diag.traces);
    print_weights(out, fit.model.d);
    return kExitOk;
  }
  if (m == "hosvd" || m == "hooi") {
    const TuckerFit fit = m == "hosvd" ? hosvd(x, ranks) : hooi(x, ranks, cfg);
    write_tucker_model(dir, fit.model);
    write_diagnostics(dir, m, fit.diag);
    write_traces(dir, fit.diag.traces);
    out << "core norm = " << std::setprecision(10) << frob_norm(fit.model.core) << '\n';
    return kExitOk;
  }
  if (m == "sparse-cp-tpa" || m == "sparse-cp-als" || m == "sparse-hosvd" || m == "sparse-hooi") {
    if (a.penalty == "group") {
      if (m != "sparse-cp-tpa") throw UsageError("--penalty group is only available for sparse-cp-tpa");
      GeneralPenaltySpec pen;
      const std::array<const std::string*, 3> lams{&a.lambda_u, &a.lambda_v, &a.lambda_w};
      for (std::size_t i = 0; i < 3; ++i) {
        const double lam = fixed_lambda(*lams[i], "--lambda");
        if (lam > 0.0) {
          pen[i] = {std::make_shared<GroupLassoPenalty>(
                        GroupLassoPenalty::uniform(x.dims()[i], a.group_size)),
                    lam};
        }
      }
      const SparseCpFit fit = general_cp_tpa(x, a.rank, pen, cfg);
      write_sparse_outputs(dir, m, fit);
      print_weights(out, fit.model.d);
      return kExitOk;
    }
    const PenaltySpec pen{parse_lambda(a.lambda_u, kind, "--lambda-u"),
                          parse_lambda(a.lambda_v, kind, "--lambda-v"),
                          parse_lambda(a.lambda_w, kind, "--lambda-w")};
    if (m == "sparse-cp-tpa" || m == "sparse-cp-als") {
      const SparseCpFit fit =
          m == "sparse-cp-tpa" ? sparse_cp_tpa(x, a.rank, pen, cfg) : sparse_cp_als(x, a.rank, pen, cfg);
      write_sparse_outputs(dir, m, fit);
      print_weights(out, fit.model.d);
      return kExitOk;
    }
    const SparseTuckerFit fit =
        m == "sparse-hosvd" ? sparse_hosvd(x, ranks, pen, cfg) : sparse_hooi(x, ranks, pen, cfg);
    write_tucker_model(dir, fit.model);
    write_diagnostics(dir, m, fit.diag, &fit.diag);
    write_traces(dir, fit.diag.traces);
    write_supports(dir, fit.model.U, fit.model.V, fit.model.W);
    out << "core norm = " << std::setprecision(10) << frob_norm(fit.model.core) << '\n';
    return kExitOk;
  }
  if (m == "gcp" || m == "sparse-gcp") {
    const QuadOperators q{operator_or_identity(a.q1, x.n()), operator_or_identity(a.q2, x.p()),
                          operator_or_identity(a.q3, x.q())};
    std::array<double, 3> lam{0.0, 0.0, 0.0};
    if (m == "sparse-gcp") {
      lam = {fixed_lambda(a.lambda_u, "--lambda-u"), fixed_lambda(a.lambda_v, "--lambda-v"),
             fixed_lambda(a.lambda_w, "--lambda-w")};
    }
    const SparseCpFit fit = sparse_gcp(x, a.rank, q, lam, cfg);
    write_sparse_outputs(dir, m, fit);
    print_weights(out, fit.model.d);
    return kExitOk;
  }
  if (m == "fpca" || m == "fpca-halfsmooth") {
    SmootherSet s = a.smoother == "fourth" ? SmootherSet::fourth_diff(x.dims(), a.alpha)
                                           : SmootherSet::second_diff(x.dims(), a.alpha);
    if (!a.omega_u.empty()) s.omega_u = read_matrix_csv(a.omega_u);
    if (!a.omega_v.empty()) s.omega_v = read_matrix_csv(a.omega_v);
    if (!a.omega_w.empty()) s.omega_w = read_matrix_csv(a.omega_w);
    if (m == "fpca") {
      const CpFit fit = fpca(x, a.rank, s, cfg);
      write_cp_model(dir, fit.model);
      write_diagnostics(dir, m, fit.diag);
      write_traces(dir, fit.diag.traces);
      print_weights(out, fit.model.d);
    } else {
      const TuckerFit fit = fpca_half_smoothing(x, s, ranks, cfg);
      write_tucker_model(dir, fit.model);
      write_diagnostics(dir, m, fit.diag);
      write_traces(dir, fit.diag.traces);
      out << "core norm = " << std::setprecision(10) << frob_norm(fit.model.core) << '\n';
    }
    return kExitOk;
  }
  throw UsageError("unknown method '" + m + "'");
}

// ---------------------------------------------------------------------------

struct SimArgs {
  int scenario = 1;
  Index k = 1;
  double sparsity = 0.5;
  std::string signal = "high";
  std::uint64_t seed = 0;
  double noise = 1.0;
  std::string out_dir;
};

SimScenarioSpec scenario_spec(const SimArgs& a) {
  SimScenarioSpec s;
  s.scenario = a.scenario;
  s.K = a.k;
  s.sparsity = a.sparsity;
  if (a.signal != "high" && a.signal != "low") throw UsageError("--signal must be high or low");
  s.low_signal = a.signal == "low";
  s.seed = a.seed;
  s.noise_scale = a.noise;
  try {
    s.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return s;
}

int simulate_cmd(const SimArgs& a, std::ostream& out) {
  const SimTruth t = simulate(scenario_spec(a));
  const fs::path dir = a.out_dir;
  fs::create_directories(dir);
  write_t3(dir / "x.t3", t.x);
  write_t3(dir / "signal.t3", t.signal);
  write_cp_model(dir / "truth", t.model);
  write_supports(dir / "truth", t.model.U, t.model.V, t.model.W);
  const Dims d = t.x.dims();
  out << "wrote " << d[0] << 'x' << d[1] << 'x' << d[2] << " tensor to " << dir.string() << '\n';
  return kExitOk;
}

struct ExperimentArgs {
  SimArgs sim;
  std::string methods;
  int replicates = 10;
  std::string grid;
  int jobs = 1;
  int max_iter = 500;
  double tol = 1e-6;
};

ExperimentConfig experiment_config(const ExperimentArgs& a, const std::vector<std::string>& all) {
  ExperimentConfig c;
  c.scenario = scenario_spec(a.sim);
  c.methods = a.methods.empty() ? all : split(a.methods);
  c.replicates = a.replicates;
  c.seed = a.sim.seed;
  c.jobs = a.jobs;
  if (!a.grid.empty()) c.grid = parse_doubles(a.grid, "--grid");
  c.solver = solver_config(a.max_iter, a.tol, a.sim.seed, false, "hosvd");
  for (const auto& m : c.methods) {
    if (std::find(all.begin(), all.end(), m) == all.end()) {
      throw UsageError("unknown method '" + m + "'");
    }
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return c;
}

int table_cmd(const ExperimentArgs& a, std::ostream& out) {
  const ExperimentConfig c = experiment_config(a, table_methods());
  const TableResult res = run_table_experiment(c);
  write_table_csv(a.sim.out_dir, a.sim.scenario, res);
  out << std::setprecision(4);
  for (const auto& r : res.rows) {
    out << r.method << " component " << r.component + 1 << " mode " << r.mode
        << ": TP " << r.tp_mean << " FP " << r.fp_mean << " MSE " << r.mse_mean;
    if (r.failed > 0) out << " (" << r.failed << " failed)";
    out << '\n';
  }
  return kExitOk;
}

int roc_cmd(const ExperimentArgs& a, std::ostream& out) {
  const ExperimentConfig c = experiment_config(a, roc_methods());
  const RocResult res = run_roc_experiment(c);
  write_roc_csv(a.sim.out_dir, a.sim.scenario, res);
  out << "wrote " << res.rows.size() << " ROC points to "
      << (fs::path(a.sim.out_dir) / "roc.csv").string() << '\n';
  return kExitOk;
}

int varex_cmd(const std::string& input, const std::string& model_dir, Index k,
              const std::string& out_dir, std::ostream& out) {
  const Tensor3 x = read_t3(input);
  const AnyModel model = read_model(model_dir);
  Matrix U, V, W;
  if (const auto* cp = std::get_if<CpModel>(&model)) {
    U = cp->U, V = cp->V, W = cp->W;
  } else {
    const auto& tk = std::get<TuckerModel>(model);
    U = tk.U, V = tk.V, W = tk.W;
  }
  const Index kmax = std::max({U.cols(), V.cols(), W.cols()});
  if (k <= 0) k = kmax;
  if (k > kmax) throw UsageError("--k exceeds the number of model components");
  const VarianceReport rep = variance_explained(x, U, V, W, k);
  std::ostringstream csv;
  csv << std::setprecision(17) << "k,cumulative\n";
  for (std::size_t i = 0; i < rep.cumulative.size(); ++i) {
    csv << i + 1 << ',' << rep.cumulative[i] << '\n';
  }
  if (out_dir.empty()) {
    out << csv.str();
  } else {
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / "varex.csv");
    if (!(f << csv.str())) throw IoError("cannot write varex.csv");
  }
  return kExitOk;
}

int bic_cmd(const std::string& input, int mode, const std::string& grid_spec,
            const std::string& penalty, const std::string& out_dir, std::ostream& out) {
  const Tensor3 x = read_t3(input);
  if (mode < 1 || mode > 3) throw UsageError("--mode must be 1, 2 or 3");
  const PenaltyKind kind = penalty == "nonneg" ? PenaltyKind::nonneg_lasso : PenaltyKind::lasso;
  // The other modes are fixed at their leading singular vectors.
  const int a = mode == 1 ? 2 : 1;
  const int b = mode == 3 ? 2 : 3;
  const Vector fa = leading_mode_vectors(x, a, 1).col(0);
  const Vector fb = leading_mode_vectors(x, b, 1).col(0);
  const Vector c = contract_pair(x, fa, fb, mode);
  const ModePenalty pen = grid_spec.empty() ? ModePenalty::bic(kind)
                                            : parse_lambda(grid_spec, kind, "--grid");
  const std::vector<double> grid = pen.absolute_grid(c);
  const BicResult res =
      bic_select(frob_norm_sq(x), static_cast<double>(x.size()), c, grid, kind);
  std::ostringstream csv;
  csv << std::setprecision(17) << "lambda,bic,nnz,selected\n";
  for (std::size_t i = 0; i < res.lambdas.size(); ++i) {
    csv << res.lambdas[i] << ',' << res.bic[i] << ',' << res.nnz[i] << ','
        << (i == res.index ? 1 : 0) << '\n';
  }
  if (out_dir.empty()) {
    out << csv.str();
  } else {
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / "bic.csv");
    if (!(f << csv.str())) throw IoError("cannot write bic.csv");
    out << "selected lambda = " << std::setprecision(10) << res.lambda << '\n';
  }
  return kExitOk;
}

void add_sim_options(CLI::App* cmd, SimArgs& a, bool require_out) {
  cmd->add_option("--scenario", a.scenario, "Simulation scenario 1-4")->check(CLI::Range(1, 4));
  cmd->add_option("--k", a.k, "Number of true components");
  cmd->add_option("--sparsity", a.sparsity, "Fraction of zeros in sparse factors");
  cmd->add_option("--signal", a.signal, "Signal strength: high or low");
  cmd->add_option("--seed", a.seed, "Random seed");
  cmd->add_option("--noise", a.noise, "Noise standard deviation (0 for noiseless)");
  auto* o = cmd->add_option("--out", a.out_dir, "Output directory");
  if (require_out) o->required();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Higher-order PCA and sparse tensor decompositions", "hopca"};
  app.require_subcommand(1);

  DecomposeArgs dec;
  auto* dcmd = app.add_subcommand("decompose", "Fit a decomposition to a .t3 tensor");
  dcmd->add_option("--method", dec.method,
                   "cp-als, tpa, hosvd, hooi, sparse-cp-tpa, sparse-cp-als, sparse-hosvd, "
                   "sparse-hooi, gcp, sparse-gcp, fpca, fpca-halfsmooth")
      ->required();
  dcmd->add_option("--input", dec.input, "Input tensor (.t3)")->required();
  dcmd->add_option("--out", dec.out_dir, "Output directory")->required();
  dcmd->add_option("--rank", dec.rank, "Number of components (Tucker: rank on every mode)");
  dcmd->add_option("--ranks", dec.ranks, "Tucker ranks as r1,r2,r3");
  dcmd->add_option("--lambda-u", dec.lambda_u, "Penalty for mode 1: value, list, rel:..., or bic");
  dcmd->add_option("--lambda-v", dec.lambda_v, "Penalty for mode 2");
  dcmd->add_option("--lambda-w", dec.lambda_w, "Penalty for mode 3");
  dcmd->add_option("--penalty", dec.penalty, "lasso, nonneg or group")
      ->check(CLI::IsMember({"lasso", "nonneg", "group"}));
  dcmd->add_option("--group-size", dec.group_size, "Contiguous group size for --penalty group");
  dcmd->add_option("--q1", dec.q1, "Mode-1 quadratic operator (CSV)");
  dcmd->add_option("--q2", dec.q2, "Mode-2 quadratic operator (CSV)");
  dcmd->add_option("--q3", dec.q3, "Mode-3 quadratic operator (CSV)");
  dcmd->add_option("--alpha", dec.alpha, "Smoothing scale for fpca");
  dcmd->add_option("--smoother", dec.smoother, "second or fourth differences")
      ->check(CLI::IsMember({"second", "fourth"}));
  dcmd->add_option("--omega-u", dec.omega_u, "Mode-1 roughness penalty (CSV)");
  dcmd->add_option("--omega-v", dec.omega_v, "Mode-2 roughness penalty (CSV)");
  dcmd->add_option("--omega-w", dec.omega_w, "Mode-3 roughness penalty (CSV)");
  dcmd->add_option("--seed", dec.seed, "Random seed");
  dcmd->add_option("--max-iter", dec.max_iter, "Iteration cap");
  dcmd->add_option("--tol", dec.tol, "Relative objective tolerance");
  dcmd->add_option("--init", dec.init, "hosvd or random")->check(CLI::IsMember({"hosvd", "random"}));
  dcmd->add_flag("--orthogonalize", dec.orthogonalize, "Orthogonalize TPA components");

  SimArgs sim;
  auto* scmd = app.add_subcommand("simulate", "Simulate a scenario tensor");
  add_sim_options(scmd, sim, true);

  ExperimentArgs tab;
  tab.sim.k = 2;
  auto* tcmd = app.add_subcommand("table", "TP/FP and signal recovery table");
  add_sim_options(tcmd, tab.sim, true);
  tcmd->add_option("--methods", tab.methods, "Comma-separated methods (default: all)");
  tcmd->add_option("--replicates", tab.replicates, "Replicates");
  tcmd->add_option("--grid", tab.grid, "Relative lambda grid for BIC (default: 50 log-spaced)");
  tcmd->add_option("--jobs", tab.jobs, "Parallel replicates");
  tcmd->add_option("--max-iter", tab.max_iter, "Iteration cap");
  tcmd->add_option("--tol", tab.tol, "Relative objective tolerance");

  ExperimentArgs roc;
  roc.sim.k = 2;
  roc.replicates = 5;
  auto* rcmd = app.add_subcommand("roc", "ROC sweep over a relative lambda grid");
  add_sim_options(rcmd, roc.sim, true);
  rcmd->add_option("--methods", roc.methods, "Comma-separated methods (default: all)");
  rcmd->add_option("--replicates", roc.replicates, "Replicates");
  rcmd->add_option("--grid", roc.grid, "Relative lambda fractions (default: 0, 0.05, ..., 1)");
  rcmd->add_option("--jobs", roc.jobs, "Parallel replicates");
  rcmd->add_option("--max-iter", roc.max_iter, "Iteration cap");
  rcmd->add_option("--tol", roc.tol, "Relative objective tolerance");

  std::string vx_input, vx_model, vx_out;
  Index vx_k = 0;
  auto* vcmd = app.add_subcommand("varex", "Cumulative proportion of variance explained");
  vcmd->add_option("--input", vx_input, "Input tensor (.t3)")->required();
  vcmd->add_option("--model", vx_model, "Model directory written by decompose")->required();
  vcmd->add_option("--k", vx_k, "Number of components (default: all)");
  vcmd->add_option("--out", vx_out, "Output directory (default: stdout)");

  std::string bic_input, bic_grid, bic_out, bic_penalty = "lasso";
  int bic_mode = 1;
  auto* bcmd = app.add_subcommand("bic", "BIC curve for one factor update");
  bcmd->add_option("--input", bic_input, "Input tensor (.t3)")->required();
  bcmd->add_option("--mode", bic_mode, "Mode 1, 2 or 3");
  bcmd->add_option("--grid", bic_grid, "Lambda grid: list, rel:list, or bic");
  bcmd->add_option("--penalty", bic_penalty, "lasso or nonneg")
      ->check(CLI::IsMember({"lasso", "nonneg"}));
  bcmd->add_option("--out", bic_out, "Output directory (default: stdout)");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (dcmd->parsed()) return decompose(dec, out);
    if (scmd->parsed()) return simulate_cmd(sim, out);
    if (tcmd->parsed()) return table_cmd(tab, out);
    if (rcmd->parsed()) return roc_cmd(roc, out);
    if (vcmd->parsed()) return varex_cmd(vx_input, vx_model, vx_k, vx_out, out);
    if (bcmd->parsed()) return bic_cmd(bic_input, bic_mode, bic_grid, bic_penalty, bic_out, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace hopca
