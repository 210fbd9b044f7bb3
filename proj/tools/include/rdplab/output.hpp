#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rdp/elliptic.hpp"

namespace rdplab {

/// %.17g, with inf / -inf / nan spelled out.
std::string fmt(double v);

/// Comma-separated table with a header row and LF line endings.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}

  Csv& row(std::vector<std::string> cells);
  std::string text() const;
  void write(const std::filesystem::path& file) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Log-log line plot; nonpositive points are skipped in the drawing but kept in
/// the embedded data block. Throws std::invalid_argument on empty data.
std::string svg_loglog(const std::string& title, const std::string& xlabel,
                       const std::vector<Series>& panels);

/// Nodal heatmap of a 2-D field (the middle slice along axis 2 for N = 3) with
/// values mapped linearly onto [lo, hi].
std::string svg_heatmap(const std::string& title, const rdp::Field& u, double lo, double hi);

void write_text(const std::filesystem::path& file, const std::string& text);

}  // namespace rdplab
