#include "hopca/io.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace hopca {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace

Matrix read_matrix_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell = trim(cell);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v)) {
        throw IoError(path.string() + ":" + std::to_string(lineno) + ": bad value '" + cell + "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("empty matrix file " + path.string());
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
  std::ofstream out = open_out(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header)
    : path_(path), out_(open_out(path)), columns_(header.size()) {
  for (const auto& h : header) *this << h;
  endrow();
}

void CsvWriter::separator() {
  if (filled_ >= columns_) throw Error("CSV row in " + path_.string() + " has too many fields");
  if (filled_ > 0) out_ << ',';
  ++filled_;
}

CsvWriter& CsvWriter::operator<<(const std::string& field) {
  separator();
  out_ << field;
  return *this;
}

CsvWriter& CsvWriter::operator<<(double value) {
  separator();
  out_ << value;
  return *this;
}

CsvWriter& CsvWriter::operator<<(long long value) {
  separator();
  out_ << value;
  return *this;
}

void CsvWriter::endrow() {
  if (filled_ != columns_) throw Error("CSV row in " + path_.string() + " is incomplete");
  out_ << '\n';
  filled_ = 0;
  if (!out_) throw IoError("write failed for " + path_.string());
}

// ---------------------------------------------------------------------------

void write_cp_model(const fs::path& dir, const CpModel& model) {
  fs::create_directories(dir);
  write_matrix_csv(dir / "U.csv", model.U);
  write_matrix_csv(dir / "V.csv", model.V);
  write_matrix_csv(dir / "W.csv", model.W);
  write_matrix_csv(dir / "d.csv", model.d);
  std::ofstream out = open_out(dir / "model.txt");
  out << "kind=cp\nrank=" << model.rank() << '\n';
}

void write_tucker_model(const fs::path& dir, const TuckerModel& model) {
  fs::create_directories(dir);
  write_matrix_csv(dir / "U.csv", model.U);
  write_matrix_csv(dir / "V.csv", model.V);
  write_matrix_csv(dir / "W.csv", model.W);
  write_t3(dir / "core.t3", model.core);
  std::ofstream out = open_out(dir / "model.txt");
  out << "kind=tucker\nranks=" << model.U.cols() << ',' << model.V.cols() << ','
      << model.W.cols() << '\n';
}

AnyModel read_model(const fs::path& dir) {
  std::ifstream in(dir / "model.txt");
  if (!in) throw IoError("cannot open " + (dir / "model.txt").string());
  std::string line, kind;
  while (std::getline(in, line)) {
    if (line.rfind("kind=", 0) == 0) kind = trim(line.substr(5));
  }
  if (kind == "cp") {
    CpModel m{read_matrix_csv(dir / "U.csv"), read_matrix_csv(dir / "V.csv"),
              read_matrix_csv(dir / "W.csv"), read_matrix_csv(dir / "d.csv").col(0)};
    if (m.U.cols() != m.rank() || m.V.cols() != m.rank() || m.W.cols() != m.rank()) {
      throw IoError("inconsistent CP model in " + dir.string());
    }
    return m;
  }
  if (kind == "tucker") {
    TuckerModel m{read_matrix_csv(dir / "U.csv"), read_matrix_csv(dir / "V.csv"),
                  read_matrix_csv(dir / "W.csv"), read_t3(dir / "core.t3")};
    if (m.core.dims() != Dims{m.U.cols(), m.V.cols(), m.W.cols()}) {
      throw IoError("core dimensions do not match factors in " + dir.string());
    }
    return m;
  }
  throw IoError("unknown model kind '" + kind + "' in " + dir.string());
}

void write_diagnostics(const fs::path& dir, const std::string& method, const Diagnostics& diag,
                       const SparseDiagnostics* sparse) {
  std::ofstream out = open_out(dir / "diagnostics.txt");
  out << "method=" << method << '\n';
  out << "iterations=" << join(diag.iterations) << '\n';
  std::vector<int> conv(diag.converged.begin(), diag.converged.end());
  out << "converged=" << join(conv) << '\n';
  out << "final_objective=" << join(diag.final_objective) << '\n';
  out << "computation_order=" << join(diag.computation_order) << '\n';
  out << "used_pseudo_inverse=" << (diag.used_pseudo_inverse ? 1 : 0) << '\n';
  out << "truncated=" << (diag.truncated ? 1 : 0) << '\n';
  if (sparse != nullptr) {
    for (std::size_t k = 0; k < sparse->lambdas.size(); ++k) {
      out << "lambda_" << k + 1 << '=' << join(std::vector<double>(sparse->lambdas[k].begin(),
                                                                   sparse->lambdas[k].end()))
          << '\n';
    }
    for (std::size_t k = 0; k < sparse->nonzeros.size(); ++k) {
      out << "nonzeros_" << k + 1 << '='
          << join(std::vector<Index>(sparse->nonzeros[k].begin(), sparse->nonzeros[k].end()))
          << '\n';
    }
    out << "zero_filled=" << (sparse->zero_filled ? 1 : 0) << '\n';
  }
  for (const auto& n : diag.notes) out << "note=" << n << '\n';
  if (!out) throw IoError("write failed for diagnostics in " + dir.string());
}

void write_traces(const fs::path& dir, const std::vector<std::vector<double>>& traces) {
  CsvWriter csv(dir / "trace.csv", {"component", "update", "objective"});
  for (std::size_t k = 0; k < traces.size(); ++k) {
    for (std::size_t i = 0; i < traces[k].size(); ++i) {
      csv << k + 1 << i + 1 << traces[k][i];
      csv.endrow();
    }
  }
}

void write_supports(const fs::path& dir, const Matrix& U, const Matrix& V, const Matrix& W) {
  auto mask = [](const Matrix& f) { return Matrix((f.array() != 0.0).cast<double>()); };
  write_matrix_csv(dir / "support_u.csv", mask(U));
  write_matrix_csv(dir / "support_v.csv", mask(V));
  write_matrix_csv(dir / "support_w.csv", mask(W));
}

}  // namespace hopca
