#pragma once

// Result tables (CSV or JSON) and optional SVG line charts.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace roughflow::cli {

enum class Format { Csv, Json };

struct Table {
  Table(std::string name_, std::string units_, std::vector<std::string> columns_)
      : name(std::move(name_)), units(std::move(units_)), columns(std::move(columns_)) {}

  std::string name;  // file stem
  std::string units;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  /// Columns plotted against column 0; empty means no plot.
  std::vector<std::size_t> plot_columns;
  bool log_y = false;

  void add(std::vector<double> row) { rows.push_back(std::move(row)); }
};

class ResultWriter {
 public:
  ResultWriter(std::filesystem::path dir, std::string command, std::string config_hash,
               std::optional<std::uint64_t> seed, Format format, bool plots, std::ostream& warnings);

  /// Throws IoError when the table cannot be written. Plot failures only warn.
  void write(const Table& table);
  /// name.json with the provenance line folded in.
  void write_json(const std::string& name, const nlohmann::json& doc);

  const std::filesystem::path& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }
  std::string provenance() const;

 private:
  std::filesystem::path dir_;
  std::string command_, hash_;
  std::optional<std::uint64_t> seed_;
  Format format_;
  bool plots_;
  std::ostream& warnings_;
  std::vector<std::string> files_;
};

/// Shortest round-trip text of a double ("%.17g"; nan and inf spelled out).
std::string format_number(double v);

/// Line chart of the series against x. Throws on I/O failure.
void write_svg_chart(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                     const std::vector<double>& x, const std::vector<std::string>& labels,
                     const std::vector<std::vector<double>>& series, bool log_y);

}  // namespace roughflow::cli
