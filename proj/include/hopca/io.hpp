#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "hopca/classic.hpp"
#include "hopca/sparse.hpp"

namespace hopca {

/// Dense matrix as comma-separated rows; blank lines and '#' comments skipped.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

/// Minimal CSV table writer with a fixed header.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  CsvWriter& operator<<(const std::string& field);
  CsvWriter& operator<<(double value);
  CsvWriter& operator<<(long long value);
  CsvWriter& operator<<(int value) { return *this << static_cast<long long>(value); }
  CsvWriter& operator<<(Index value) { return *this << static_cast<long long>(value); }
  CsvWriter& operator<<(std::size_t value) { return *this << static_cast<long long>(value); }
  /// Ends the current row.
  void endrow();

 private:
  void separator();
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

/// Writes U.csv, V.csv, W.csv, d.csv and model.txt (kind=cp).
void write_cp_model(const std::filesystem::path& dir, const CpModel& model);
/// Writes U.csv, V.csv, W.csv, core.t3 and model.txt (kind=tucker).
void write_tucker_model(const std::filesystem::path& dir, const TuckerModel& model);

using AnyModel = std::variant<CpModel, TuckerModel>;
AnyModel read_model(const std::filesystem::path& dir);

/// diagnostics.txt as key=value lines.
void write_diagnostics(const std::filesystem::path& dir, const std::string& method,
                       const Diagnostics& diag, const SparseDiagnostics* sparse = nullptr);

/// trace.csv with one row per objective evaluation.
void write_traces(const std::filesystem::path& dir, const std::vector<std::vector<double>>& traces);

/// support_u.csv, support_v.csv, support_w.csv as 0/1 masks.
void write_supports(const std::filesystem::path& dir, const Matrix& U, const Matrix& V,
                    const Matrix& W);

}  // namespace hopca
