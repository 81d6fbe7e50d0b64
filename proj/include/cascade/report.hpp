// CSV tables and self-contained SVG plots.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cascade {

// Shortest round-trip decimal; "nan" / "inf" / "-inf" for non-finite values.
std::string csv_number(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  std::size_t rows() const { return rows_.size(); }

  // Header, rows, then `# manifest: <manifest_ref>`.
  std::string render(const std::string& manifest_ref) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  std::optional<double> y_min;
  std::optional<double> y_max;
};

// Line chart with axes, ticks and a legend. Non-finite points break the line.
std::string line_plot_svg(const PlotSpec& spec, const std::vector<Series>& series);

// Colour map of values[iy][ix] over the (xs, ys) grid with optional overlay lines.
std::string heatmap_svg(const PlotSpec& spec, const std::vector<double>& xs, const std::vector<double>& ys,
                        const std::vector<std::vector<double>>& values, const std::vector<Series>& overlay = {});

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace cascade
