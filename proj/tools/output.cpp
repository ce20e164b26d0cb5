#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "roughflow/errors.hpp"

namespace roughflow::cli {

namespace fs = std::filesystem;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ResultWriter::ResultWriter(fs::path dir, std::string command, std::string config_hash,
                           std::optional<std::uint64_t> seed, Format format, bool plots, std::ostream& warnings)
    : dir_(std::move(dir)),
      command_(std::move(command)),
      hash_(std::move(config_hash)),
      seed_(seed),
      format_(format),
      plots_(plots),
      warnings_(warnings) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) throw IoError("cannot create output directory '" + dir_.string() + "'");
}

std::string ResultWriter::provenance() const {
  return "roughflow " + command_ + " config_hash=" + hash_ + " seed=" + (seed_ ? std::to_string(*seed_) : "none");
}

void ResultWriter::write(const Table& table) {
  for (const auto& row : table.rows)
    if (row.size() != table.columns.size()) throw DimensionError("table '" + table.name + "' has a ragged row");

  if (format_ == Format::Csv) {
    const fs::path path = dir_ / (table.name + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "# " << provenance() << "\n";
    out << "# units: " << table.units << "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
    out << "\n";
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
      out << "\n";
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
    files_.push_back(path.filename().string());
  } else {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
      nlohmann::json r = nlohmann::json::array();
      for (double v : row) r.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_number(v)));
      rows.push_back(std::move(r));
    }
    write_json(table.name, {{"units", table.units}, {"columns", table.columns}, {"rows", std::move(rows)}});
  }

  if (!plots_ || table.plot_columns.empty() || table.rows.empty()) return;
  try {
    std::vector<double> x;
    std::vector<std::vector<double>> series(table.plot_columns.size());
    std::vector<std::string> labels;
    for (std::size_t c : table.plot_columns) labels.push_back(table.columns.at(c));
    for (const auto& row : table.rows) {
      x.push_back(row[0]);
      for (std::size_t s = 0; s < table.plot_columns.size(); ++s) series[s].push_back(row.at(table.plot_columns[s]));
    }
    const fs::path path = dir_ / (table.name + ".svg");
    write_svg_chart(path, table.name, table.columns[0], x, labels, series, table.log_y);
    files_.push_back(path.filename().string());
  } catch (const std::exception& e) {
    warnings_ << "warning: plot for '" << table.name << "' skipped: " << e.what() << "\n";
  }
}

void ResultWriter::write_json(const std::string& name, const nlohmann::json& doc) {
  const fs::path path = dir_ / (name + ".json");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  nlohmann::json full = doc;
  if (full.is_object()) full["provenance"] = provenance();
  out << full.dump(2) << "\n";
  if (!out) throw IoError("write failed for '" + path.string() + "'");
  files_.push_back(path.filename().string());
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string r;
  for (char c : s) {
    switch (c) {
      case '&': r += "&amp;"; break;
      case '<': r += "&lt;"; break;
      case '>': r += "&gt;"; break;
      case '"': r += "&quot;"; break;
      default: r += c;
    }
  }
  return r;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

void write_svg_chart(const fs::path& path, const std::string& title, const std::string& x_label,
                     const std::vector<double>& x, const std::vector<std::string>& labels,
                     const std::vector<std::vector<double>>& series, bool log_y) {
  constexpr double W = 720, H = 440, left = 70, right = 170, top = 40, bottom = 50;
  const auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
  const auto usable = [&](double v) { return std::isfinite(v) && (!log_y || v > 0); };

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (double v : x)
    if (std::isfinite(v)) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
  for (const auto& s : series)
    for (double v : s)
      if (usable(v)) ymin = std::min(ymin, ty(v)), ymax = std::max(ymax, ty(v));
  if (!std::isfinite(xmin) || !std::isfinite(ymin)) throw Error("no finite data to plot");
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad, ymax += pad;

  const auto px = [&](double v) { return left + (v - xmin) / (xmax - xmin) * (W - left - right); };
  const auto py = [&](double v) { return H - bottom - (ty(v) - ymin) / (ymax - ymin) * (H - top - bottom); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(title) << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right << "\" height=\"" << H - top - bottom
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    const double yp = H - bottom - (H - top - bottom) * i / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\">" << tick(xv) << "</text>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << yp + 4 << "\" text-anchor=\"end\">"
        << (log_y ? "1e" + tick(yv) : tick(yv)) << "</text>\n";
  }
  out << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << escape_xml(x_label)
      << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* colour = palette[s % 7];
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size() && i < series[s].size(); ++i)
      if (std::isfinite(x[i]) && usable(series[s][i])) out << px(x[i]) << "," << py(series[s][i]) << " ";
    out << "\"/>\n";
    const double ly = top + 14 + 18.0 * s;
    out << "<line x1=\"" << W - right + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - right + 30 << "\" y2=\"" << ly - 4
        << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << W - right + 36 << "\" y=\"" << ly << "\">" << escape_xml(labels[s]) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace roughflow::cli
