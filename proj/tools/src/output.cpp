#include "rdplab/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace rdplab {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Csv& Csv::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw std::logic_error("CSV row width does not match header");
  rows_.push_back(std::move(cells));
  return *this;
}

std::string Csv::text() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

void Csv::write(const std::filesystem::path& file) const { write_text(file, text()); }

void write_text(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
}

namespace {

constexpr double kW = 640, kH = 420, kMargin = 60;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

}  // namespace

std::string svg_loglog(const std::string& title, const std::string& xlabel,
                       const std::vector<Series>& panels) {
  std::size_t points = 0;
  for (const auto& s : panels) points += s.x.size();
  if (panels.empty() || points == 0) throw std::invalid_argument("plot data is empty");

  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& s : panels) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, std::log10(s.x[i]));
      xhi = std::max(xhi, std::log10(s.x[i]));
      ylo = std::min(ylo, std::log10(s.y[i]));
      yhi = std::max(yhi, std::log10(s.y[i]));
    }
  }
  if (!(xhi >= xlo)) xlo = 0, xhi = 1;
  if (!(yhi >= ylo)) ylo = 0, yhi = 1;
  if (xhi - xlo < 1e-12) xlo -= 0.5, xhi += 0.5;
  if (yhi - ylo < 1e-12) ylo -= 0.5, yhi += 0.5;
  auto px = [&](double x) { return kMargin + (std::log10(x) - xlo) / (xhi - xlo) * (kW - 2 * kMargin); };
  auto py = [&](double y) { return kH - kMargin - (std::log10(y) - ylo) / (yhi - ylo) * (kH - 2 * kMargin); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kW) + "\" height=\"" +
                  num(kH) + "\">\n<!-- data\nseries,x,y\n";
  for (const auto& p : panels)
    for (std::size_t i = 0; i < p.x.size(); ++i) s += p.name + "," + fmt(p.x[i]) + "," + fmt(p.y[i]) + "\n";
  s += "-->\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kW / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + title + "</text>\n";
  s += "<rect x=\"" + num(kMargin) + "\" y=\"" + num(kMargin) + "\" width=\"" + num(kW - 2 * kMargin) +
       "\" height=\"" + num(kH - 2 * kMargin) + "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<text x=\"" + num(kW / 2) + "\" y=\"" + num(kH - 15) + "\" text-anchor=\"middle\" font-size=\"12\">" +
       xlabel + " (log10 " + num(xlo) + " .. " + num(xhi) + ")</text>\n";
  s += "<text x=\"12\" y=\"" + num(kH / 2) + "\" font-size=\"12\" transform=\"rotate(-90 12 " + num(kH / 2) +
       ")\" text-anchor=\"middle\">log10 " + num(ylo) + " .. " + num(yhi) + "</text>\n";
  for (std::size_t k = 0; k < panels.size(); ++k) {
    const auto& p = panels[k];
    const char* color = kColors[k % 5];
    std::string pts;
    for (std::size_t i = 0; i < p.x.size(); ++i) {
      if (!(p.x[i] > 0.0) || !(p.y[i] > 0.0) || !std::isfinite(p.y[i])) continue;
      pts += num(px(p.x[i])) + "," + num(py(p.y[i])) + " ";
      s += "<circle cx=\"" + num(px(p.x[i])) + "\" cy=\"" + num(py(p.y[i])) + "\" r=\"3\" fill=\"" +
           color + "\"/>\n";
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" points=\"" + pts + "\"/>\n";
    s += "<text x=\"" + num(kW - kMargin - 100) + "\" y=\"" + num(kMargin + 16 + 16 * double(k)) +
         "\" font-size=\"12\" fill=\"" + color + "\">" + p.name + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string svg_heatmap(const std::string& title, const rdp::Field& u, double lo, double hi) {
  const rdp::Grid& g = u.grid;
  if (u.values.empty()) throw std::invalid_argument("plot data is empty");
  const std::size_t nx = g.nodes_along(0), ny = g.nodes_along(1);
  const std::size_t kz = g.dim() == 3 ? g.nodes_along(2) / 2 : 0;
  const double cell = std::max(1.0, std::min(4.0, 480.0 / double(std::max(nx, ny))));
  const double w = cell * double(nx) + 2 * kMargin, h = cell * double(ny) + 2 * kMargin;
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
                  "\">\n<!-- data\ni,j,u\n";
  std::string body;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double v = u.values[g.index({i, j, kz})];
      s += std::to_string(i) + "," + std::to_string(j) + "," + fmt(v) + "\n";
      const double t = hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.5;
      const int r = int(255 * t), b = int(255 * (1 - t));
      char color[16];
      std::snprintf(color, sizeof color, "#%02x40%02x", r, b);
      body += "<rect x=\"" + num(kMargin + cell * double(i)) + "\" y=\"" +
              num(kMargin + cell * double(ny - 1 - j)) + "\" width=\"" + num(cell) + "\" height=\"" +
              num(cell) + "\" fill=\"" + color + "\"/>\n";
    }
  }
  s += "-->\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(w / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + title + " [" +
       fmt(lo) + ", " + fmt(hi) + "]</text>\n";
  s += body + "</svg>\n";
  return s;
}

}  // namespace rdplab
