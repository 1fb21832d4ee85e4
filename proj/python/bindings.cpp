#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <variant>

#include "hopca/classic.hpp"
#include "hopca/generalized.hpp"
#include "hopca/selection.hpp"
#include "hopca/simulation.hpp"
#include "hopca/sparse.hpp"

namespace py = pybind11;
using namespace hopca;

namespace {

using FArray = py::array_t<double, py::array::f_style | py::array::forcecast>;

// Mode-1 fastest storage is Fortran order.
Tensor3 to_tensor(const FArray& a) {
  if (a.ndim() != 3) throw DimensionError("expected a 3-d array");
  const Dims dims{a.shape(0), a.shape(1), a.shape(2)};
  return Tensor3(dims, std::vector<double>(a.data(), a.data() + a.size()));
}

FArray to_array(const Tensor3& x) {
  FArray out({x.n(), x.p(), x.q()});
  std::copy(x.data(), x.data() + x.size(), out.mutable_data());
  return out;
}

SolverConfig solver(int max_iter, double tol, std::uint64_t seed, const std::string& init) {
  SolverConfig cfg;
  cfg.max_iter = max_iter;
  cfg.tol = tol;
  cfg.seed = seed;
  if (init == "hosvd") cfg.init = InitMethod::hosvd;
  else if (init == "random") cfg.init = InitMethod::random;
  else throw Error("init must be 'hosvd' or 'random'");
  cfg.validate();
  return cfg;
}

// None, "bic", a relative fraction, or a list of relative fractions.
using ModeArg = std::variant<std::monostate, std::string, double, std::vector<double>>;

PenaltySpec penalties(const std::array<ModeArg, 3>& args, bool nonneg) {
  const PenaltyKind kind = nonneg ? PenaltyKind::nonneg_lasso : PenaltyKind::lasso;
  PenaltySpec pen;
  for (std::size_t m = 0; m < 3; ++m) {
    const ModeArg& a = args[m];
    if (const auto* s = std::get_if<std::string>(&a)) {
      if (*s != "bic") throw Error("penalty string must be 'bic'");
      pen[m] = ModePenalty::bic(kind);
    } else if (const auto* f = std::get_if<double>(&a)) {
      pen[m] = ModePenalty::fixed_relative(*f, kind);
    } else if (const auto* g = std::get_if<std::vector<double>>(&a)) {
      pen[m] = ModePenalty::grid(*g, kind, true);
    }
    pen[m].validate();
  }
  return pen;
}

py::dict cp_dict(const CpModel& m, const Diagnostics& d) {
  py::dict out;
  out["U"] = m.U;
  out["V"] = m.V;
  out["W"] = m.W;
  out["d"] = m.d;
  out["iterations"] = d.iterations;
  out["converged"] = d.converged;
  out["traces"] = d.traces;
  return out;
}

py::dict tucker_dict(const TuckerModel& m, const Diagnostics& d) {
  py::dict out;
  out["U"] = m.U;
  out["V"] = m.V;
  out["W"] = m.W;
  out["core"] = to_array(m.core);
  out["iterations"] = d.iterations;
  out["converged"] = d.converged;
  return out;
}

void add_sparse(py::dict& out, const SparseDiagnostics& d) {
  out["lambdas"] = d.lambdas;
  out["nonzeros"] = d.nonzeros;
  out["zero_filled"] = d.zero_filled;
}

SmootherSet smoother(const Dims& dims, const std::string& kind, double alpha) {
  if (kind == "second") return SmootherSet::second_diff(dims, alpha);
  if (kind == "fourth") return SmootherSet::fourth_diff(dims, alpha);
  throw Error("smoother must be 'second' or 'fourth'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Higher-order PCA: CP and Tucker decompositions with sparse and smooth variants.";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<Error>(m, "Error", PyExc_ValueError);


  m.def(
      "tpa",
      [](const FArray& x, Index k, int max_iter, double tol, std::uint64_t seed,
         const std::string& init) {
        const CpFit f = tpa(to_tensor(x), k, solver(max_iter, tol, seed, init));
        return cp_dict(f.model, f.diag);
      },
      py::arg("x"), py::arg("k"), py::arg("max_iter") = 500, py::arg("tol") = 1e-6,
      py::arg("seed") = 0, py::arg("init") = "hosvd", "Greedy rank-one power deflation.");

  m.def(
      "cp_als",
      [](const FArray& x, Index k, int max_iter, double tol, std::uint64_t seed,
         const std::string& init) {
        const CpFit f = cp_als(to_tensor(x), k, solver(max_iter, tol, seed, init));
        return cp_dict(f.model, f.diag);
      },
      py::arg("x"), py::arg("k"), py::arg("max_iter") = 500, py::arg("tol") = 1e-6,
      py::arg("seed") = 0, py::arg("init") = "hosvd");

  m.def(
      "hosvd",
      [](const FArray& x, const Ranks& ranks) {
        const TuckerFit f = hosvd(to_tensor(x), ranks);
        return tucker_dict(f.model, f.diag);
      },
      py::arg("x"), py::arg("ranks"));

  m.def(
      "hooi",
      [](const FArray& x, const Ranks& ranks, int max_iter, double tol) {
        const TuckerFit f = hooi(to_tensor(x), ranks, solver(max_iter, tol, 0, "hosvd"));
        return tucker_dict(f.model, f.diag);
      },
      py::arg("x"), py::arg("ranks"), py::arg("max_iter") = 500, py::arg("tol") = 1e-6);

  m.def(
      "sparse_cp_tpa",
      [](const FArray& x, Index k, const std::array<ModeArg, 3>& pen, bool nonneg, int max_iter,
         double tol) {
        const SparseCpFit f = sparse_cp_tpa(to_tensor(x), k, penalties(pen, nonneg),
                                            solver(max_iter, tol, 0, "hosvd"));
        py::dict out = cp_dict(f.model, f.diag);
        add_sparse(out, f.diag);
        return out;
      },
      py::arg("x"), py::arg("k"), py::arg("penalties"), py::arg("nonneg") = false,
      py::arg("max_iter") = 500, py::arg("tol") = 1e-6,
      "Per-mode penalties: None, 'bic', a fraction of lambda_max, or a list of fractions.");

  m.def(
      "sparse_cp_als",
      [](const FArray& x, Index k, const std::array<ModeArg, 3>& pen, bool nonneg, int max_iter,
         double tol) {
        const SparseCpFit f = sparse_cp_als(to_tensor(x), k, penalties(pen, nonneg),
                                            solver(max_iter, tol, 0, "hosvd"));
        py::dict out = cp_dict(f.model, f.diag);
        add_sparse(out, f.diag);
        return out;
      },
      py::arg("x"), py::arg("k"), py::arg("penalties"), py::arg("nonneg") = false,
      py::arg("max_iter") = 500, py::arg("tol") = 1e-6);

  m.def(
      "sparse_hosvd",
      [](const FArray& x, const Ranks& ranks, const std::array<ModeArg, 3>& pen, bool nonneg) {
        const SparseTuckerFit f = sparse_hosvd(to_tensor(x), ranks, penalties(pen, nonneg), {});
        py::dict out = tucker_dict(f.model, f.diag);
        add_sparse(out, f.diag);
        return out;
      },
      py::arg("x"), py::arg("ranks"), py::arg("penalties"), py::arg("nonneg") = false);

  m.def(
      "sparse_hooi",
      [](const FArray& x, const Ranks& ranks, const std::array<ModeArg, 3>& pen, bool nonneg,
         int max_iter, double tol) {
        const SparseTuckerFit f = sparse_hooi(to_tensor(x), ranks, penalties(pen, nonneg),
                                              solver(max_iter, tol, 0, "hosvd"));
        py::dict out = tucker_dict(f.model, f.diag);
        add_sparse(out, f.diag);
        return out;
      },
      py::arg("x"), py::arg("ranks"), py::arg("penalties"), py::arg("nonneg") = false,
      py::arg("max_iter") = 500, py::arg("tol") = 1e-6);

  m.def(
      "fpca",
      [](const FArray& x, Index k, double alpha, const std::string& kind, int max_iter,
         double tol) {
        const Tensor3 t = to_tensor(x);
        const CpFit f = fpca(t, k, smoother(t.dims(), kind, alpha),
                             solver(max_iter, tol, 0, "hosvd"));
        return cp_dict(f.model, f.diag);
      },
      py::arg("x"), py::arg("k"), py::arg("alpha") = 1.0, py::arg("smoother") = "second",
      py::arg("max_iter") = 500, py::arg("tol") = 1e-6);

  m.def(
      "variance_explained",
      [](const FArray& x, const Matrix& U, const Matrix& V, const Matrix& W, Index upto_k) {
        return variance_explained(to_tensor(x), U, V, W, upto_k).cumulative;
      },
      py::arg("x"), py::arg("U"), py::arg("V"), py::arg("W"), py::arg("upto_k"),
      "Cumulative proportion of variance explained by the first k columns, k = 1..upto_k.");

  m.def(
      "simulate",
      [](int scenario, Index k, std::uint64_t seed, bool low_signal, double noise_scale) {
        SimScenarioSpec spec;
        spec.scenario = scenario;
        spec.K = k;
        spec.seed = seed;
        spec.low_signal = low_signal;
        spec.noise_scale = noise_scale;
        const SimTruth t = simulate(spec);
        py::dict out;
        out["x"] = to_array(t.x);
        out["signal"] = to_array(t.signal);
        out["U"] = t.model.U;
        out["V"] = t.model.V;
        out["W"] = t.model.W;
        out["d"] = t.model.d;
        return out;
      },
      py::arg("scenario"), py::arg("k") = 1, py::arg("seed") = 0, py::arg("low_signal") = false,
      py::arg("noise_scale") = 1.0);
}
